#include "evacnet/qn.hpp"

#include <cmath>
#include <deque>
#include <functional>
#include <limits>
#include <queue>
#include <random>

#include "evacnet/errors.hpp"

namespace evacnet {

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

// Controller CPU means per architecture.
struct ControllerDemands {
  double monitor, analyze, plan_hr, plan_lr, execute;
};
constexpr ControllerDemands kCentralized{0.0045067, 0.00676, 110.1791139, 1.1668182, 0.0045067};
constexpr ControllerDemands kCollaborative{0.0045067, 0.005735, 2.0164557, 0.5016667, 0.0045067};

constexpr double kCctvSense = 0.01386;
constexpr double kPl2il = 0.023480633;
constexpr double kActuate = 0.000921667;
const char* const kActuators[] = {"DashboardActuate", "AlarmActuate", "EvacuationSignsActuate"};
const char* const kActuatorStations[] = {"Dashboards", "Alarms", "EvacuationSigns"};
constexpr double kIl2al[] = {0.013619641, 1.013619641, 2.013619641};

struct Job {
  int epoch = 0;
  std::string cls;
};

struct Event {
  double time = 0.0;
  long seq = 0;
  int station = -1;  // -1: sampling epoch
  Job job;
  bool operator>(const Event& o) const { return time != o.time ? time > o.time : seq > o.seq; }
};

}  // namespace

std::string_view to_string(Architecture a) {
  return a == Architecture::Centralized ? "centralized" : "collaborative";
}

std::string_view to_string(Resolution r) { return r == Resolution::HR ? "HR" : "LR"; }

int QNModel::station_index(std::string_view name) const {
  for (std::size_t i = 0; i < stations.size(); ++i) {
    if (stations[i].name == name) return static_cast<int>(i);
  }
  return -1;
}

QNModel build_qn(Architecture arch, Resolution res) {
  QNModel m;
  m.arch = arch;
  m.res = res;
  m.period = res == Resolution::HR ? 1.25 : 2.5;
  m.source_class = "CctvSense";
  const int controllers = arch == Architecture::Centralized ? 1 : 2;
  const ControllerDemands& d = arch == Architecture::Centralized ? kCentralized : kCollaborative;
  const std::string plan = res == Resolution::HR ? "CriticalPlan-HR" : "CriticalPlan-LR";
  const double plan_mean = res == Resolution::HR ? d.plan_hr : d.plan_lr;

  // Station ids in list order.
  const int cctvs = 1, pl2il = 2, first_controller = 3;
  const int il2al = first_controller + controllers;
  const int first_actuator = il2al + 1;
  const int done = first_actuator + 3;

  Station sampling{"Sampling", StationKind::Source, {}, {}};
  sampling.routes["CctvSense"] = {{{cctvs, "CctvSense"}}, false};
  m.stations.push_back(sampling);

  Station cctv{"CCTVs", StationKind::Queue, {{"CctvSense", kCctvSense}}, {}};
  cctv.routes["CctvSense"] = {{{pl2il, "CctvSense"}}, false};
  m.stations.push_back(cctv);

  Station net{"PL2IL", StationKind::Queue, {{"CctvSense", kPl2il}, {"Sense", 0.0}}, {}};
  net.routes["CctvSense"] = {{{pl2il, "Sense"}}, false};
  Routing to_controllers{{}, true};
  for (int c = 0; c < controllers; ++c) to_controllers.next.push_back({first_controller + c, "CriticalMonitor"});
  net.routes["Sense"] = to_controllers;
  m.stations.push_back(net);

  for (int c = 0; c < controllers; ++c) {
    const int self = first_controller + c;
    Station ctl{controllers == 1 ? "Controller" : "Controller" + std::to_string(c + 1),
                StationKind::Queue,
                {{"CriticalMonitor", d.monitor},
                 {"CriticalAnalyze", d.analyze},
                 {plan, plan_mean},
                 {"CriticalExecute", d.execute}},
                {}};
    ctl.routes["CriticalMonitor"] = {{{self, "CriticalAnalyze"}}, false};
    ctl.routes["CriticalAnalyze"] = {{{self, plan}}, false};
    ctl.routes[plan] = {{{self, "CriticalExecute"}}, false};
    Routing fork;
    for (const char* a : kActuators) fork.next.push_back({il2al, a});
    ctl.routes["CriticalExecute"] = fork;
    m.stations.push_back(ctl);
  }

  Station out{"IL2AL", StationKind::Delay, {}, {}};
  for (int k = 0; k < 3; ++k) {
    out.service[kActuators[k]] = kIl2al[k];
    out.routes[kActuators[k]] = {{{first_actuator + k, kActuators[k]}}, false};
  }
  m.stations.push_back(out);

  for (int k = 0; k < 3; ++k) {
    Station act{kActuatorStations[k], StationKind::Queue, {{kActuators[k], kActuate}}, {}};
    act.routes[kActuators[k]] = {{{done, kActuators[k]}}, false};
    m.stations.push_back(act);
  }
  m.stations.push_back({"Done", StationKind::Sink, {}, {}});
  return m;
}

QNModel single_station(double rate, double mean, bool poisson) {
  if (!(rate > 0.0)) throw ConfigError("arrival rate must be positive");
  QNModel m;
  m.period = 1.0 / rate;
  m.poisson = poisson;
  m.source_class = "Job";
  Station src{"Source", StationKind::Source, {}, {}};
  src.routes["Job"] = {{{1, "Job"}}, false};
  Station server{"Server", StationKind::Queue, {{"Job", mean}}, {}};
  server.routes["Job"] = {{{2, "Job"}}, false};
  m.stations = {src, server, {"Done", StationKind::Sink, {}, {}}};
  return m;
}

std::vector<double> utilization(const QNModel& m) {
  std::vector<double> rho(m.stations.size(), 0.0);
  // Visits per epoch, pushed along the routing from the source.
  std::function<void(int, const std::string&, double, int)> visit =
      [&](int s, const std::string& cls, double weight, int depth) {
        if (depth > 1000) throw ConfigError("routing of class '" + cls + "' does not terminate");
        const Station& st = m.stations[idx(s)];
        if (st.kind == StationKind::Sink) return;
        if (st.kind != StationKind::Source) {
          const auto it = st.service.find(cls);
          if (it == st.service.end()) {
            throw ConfigError("station '" + st.name + "' has no service for class '" + cls + "'");
          }
          rho[idx(s)] += weight * it->second;
        }
        const auto r = st.routes.find(cls);
        if (r == st.routes.end()) {
          throw ConfigError("station '" + st.name + "' has no route for class '" + cls + "'");
        }
        const auto& next = r->second.next;
        const double share = r->second.alternate ? weight / static_cast<double>(next.size()) : weight;
        for (const Hop& h : next) visit(h.station, h.cls, share, depth + 1);
      };
  visit(m.source, m.source_class, 1.0, 0);
  for (double& r : rho) r /= m.period;
  return rho;
}

ResponseStats simulate_qn(const QNModel& m, int epochs, std::uint64_t seed, double warmup) {
  if (epochs < 1) throw ConfigError("at least one epoch is required");
  if (warmup < 0.0 || warmup >= 1.0) throw ConfigError("warm-up fraction must lie in [0, 1)");
  ResponseStats stats;
  stats.rho = utilization(m);
  for (std::size_t s = 0; s < m.stations.size(); ++s) {
    if (m.stations[s].kind == StationKind::Queue && stats.rho[s] >= 1.0) stats.saturated = true;
  }

  std::mt19937_64 rng(seed);
  auto draw = [&](double mean) {
    return mean > 0.0 ? std::exponential_distribution<double>(1.0 / mean)(rng) : 0.0;
  };

  const std::size_t S = m.stations.size();
  std::vector<std::deque<Job>> queue(S);
  std::vector<char> busy(S, 0);
  std::vector<double> busy_time(S, 0.0);
  std::vector<double> born(idx(epochs), 0.0);
  std::vector<double> first(idx(epochs), std::numeric_limits<double>::infinity());
  std::vector<double> last(idx(epochs), 0.0);

  std::priority_queue<Event, std::vector<Event>, std::greater<>> events;
  long seq = 0;
  double now = 0.0;

  std::function<void(int, Job)> arrive;
  auto depart = [&](int s, const Job& job) {
    const Station& st = m.stations[idx(s)];
    const auto r = st.routes.find(job.cls);
    if (r == st.routes.end()) {
      throw ConfigError("station '" + st.name + "' has no route for class '" + job.cls + "'");
    }
    const Routing& routing = r->second;
    if (routing.alternate) {
      const Hop& h = routing.next[idx(job.epoch) % routing.next.size()];
      arrive(h.station, {job.epoch, h.cls});
    } else {
      for (const Hop& h : routing.next) arrive(h.station, {job.epoch, h.cls});
    }
  };
  auto start = [&](int s, const Job& job) {
    const double t = draw(m.stations[idx(s)].service.at(job.cls));
    busy_time[idx(s)] += t;
    events.push({now + t, seq++, s, job});
  };
  arrive = [&](int s, Job job) {
    const Station& st = m.stations[idx(s)];
    if (st.kind == StationKind::Sink) {
      ++stats.completions[job.cls];
      first[idx(job.epoch)] = std::min(first[idx(job.epoch)], now);
      last[idx(job.epoch)] = std::max(last[idx(job.epoch)], now);
      return;
    }
    const auto it = st.service.find(job.cls);
    if (it == st.service.end()) {
      throw ConfigError("station '" + st.name + "' has no service for class '" + job.cls + "'");
    }
    if (it->second == 0.0) {
      depart(s, job);
    } else if (st.kind == StationKind::Delay) {
      start(s, job);
    } else if (busy[idx(s)]) {
      queue[idx(s)].push_back(std::move(job));
    } else {
      busy[idx(s)] = 1;
      start(s, job);
    }
  };

  double t = 0.0;
  std::exponential_distribution<double> gap(1.0 / m.period);
  for (int k = 0; k < epochs; ++k) {
    born[idx(k)] = t;
    events.push({t, seq++, -1, {k, m.source_class}});
    t += m.poisson ? gap(rng) : m.period;
  }

  while (!events.empty()) {
    Event e = events.top();
    events.pop();
    now = e.time;
    if (e.station < 0) {
      depart(m.source, e.job);
      continue;
    }
    const Station& st = m.stations[idx(e.station)];
    if (st.kind == StationKind::Queue) {
      auto& q = queue[idx(e.station)];
      if (q.empty()) {
        busy[idx(e.station)] = 0;
      } else {
        Job next = std::move(q.front());
        q.pop_front();
        start(e.station, next);
      }
    }
    depart(e.station, e.job);
  }

  stats.busy.assign(S, 0.0);
  if (now > 0.0) {
    for (std::size_t s = 0; s < S; ++s) stats.busy[s] = busy_time[s] / now;
  }
  const int skip = static_cast<int>(std::floor(warmup * epochs));
  double sum_first = 0.0, sum_last = 0.0;
  for (int k = skip; k < epochs; ++k) {
    sum_first += first[idx(k)] - born[idx(k)];
    sum_last += last[idx(k)] - born[idx(k)];
  }
  stats.measured_epochs = epochs - skip;
  if (stats.saturated || stats.measured_epochs == 0) {
    stats.mean_response = std::numeric_limits<double>::quiet_NaN();
    stats.mean_response_max = std::numeric_limits<double>::quiet_NaN();
  } else {
    stats.mean_response = sum_first / stats.measured_epochs;
    stats.mean_response_max = sum_last / stats.measured_epochs;
  }
  return stats;
}

double energy_utility(double current, double min, double max) {
  if (!(min < max)) throw RangeError("energy bounds need min < max");
  if (current < min || current > max) {
    throw RangeError("energy " + std::to_string(current) + " J outside [" + std::to_string(min) +
                     ", " + std::to_string(max) + "]");
  }
  return 1.0 - (current - min) / (max - min);
}

}  // namespace evacnet
