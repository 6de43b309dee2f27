#include "evacnet/cli.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <mutex>
#include <nlohmann/json.hpp>
#include <set>
#include <sstream>
#include <thread>

#include "evacnet/errors.hpp"
#include "evacnet/plan.hpp"

namespace evacnet {

namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

void check_keys(const json& j, std::initializer_list<std::string_view> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

template <typename T>
T get(const json& j, const std::string& key, const std::string& where) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw ConfigError("'" + key + "' in " + where + " has the wrong type");
  }
}

double door_rate_of(const json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "pessimistic") return kPessimisticDoorRate;
    if (s == "optimistic") return kOptimisticDoorRate;
    throw ConfigError("door_rate preset '" + s + "' is neither pessimistic nor optimistic");
  }
  if (!j.is_number()) throw ConfigError("door_rate must be a number or a preset name");
  return j.get<double>();
}

Guidance guidance_of(const std::string& s) {
  if (s == "shortest" || s == "shortest_path") return Guidance::ShortestPath;
  if (s == "netflow") return Guidance::Netflow;
  throw ConfigError("unknown guidance '" + s + "'");
}

std::pair<Architecture, Resolution> qn_scenario_of(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos) throw ConfigError("qn scenario '" + s + "' is not <arch>-<res>");
  const std::string arch = s.substr(0, dash), res = s.substr(dash + 1);
  std::pair<Architecture, Resolution> out;
  if (arch == "centralized") {
    out.first = Architecture::Centralized;
  } else if (arch == "collaborative") {
    out.first = Architecture::Collaborative;
  } else {
    throw ConfigError("unknown architecture '" + arch + "'");
  }
  if (res == "HR") {
    out.second = Resolution::HR;
  } else if (res == "LR") {
    out.second = Resolution::LR;
  } else {
    throw ConfigError("unknown resolution '" + res + "'");
  }
  return out;
}

AbssRun abss_run_of(const json& j, const std::string& where) {
  check_keys(j, {"label", "guidance", "grouping", "double_door", "agents", "seeds", "time_cap"},
             where);
  AbssRun r;
  if (j.contains("label")) r.label = get<std::string>(j, "label", where);
  if (j.contains("guidance")) r.guidance = guidance_of(get<std::string>(j, "guidance", where));
  if (j.contains("grouping")) r.grouping = get<bool>(j, "grouping", where);
  if (j.contains("double_door")) r.double_door = get<bool>(j, "double_door", where);
  if (j.contains("agents")) r.agents = get<int>(j, "agents", where);
  if (j.contains("seeds")) r.seeds = get<int>(j, "seeds", where);
  if (j.contains("time_cap")) r.time_cap = get<double>(j, "time_cap", where);
  if (r.seeds < 1) throw ConfigError(where + ": seeds must be at least 1");
  if (r.agents < 0) throw ConfigError(where + ": agents must be non-negative");
  if (r.label.empty() || r.label.find_first_of("/\\") != std::string::npos) {
    throw ConfigError(where + ": label must be a plain file name");
  }
  return r;
}

std::string fixed(double v, int digits = 6) { return fmt::format("{:.{}f}", v, digits); }

std::string plain(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << text;
}

struct SummaryRow {
  std::string mode;
  std::string tau = "-";
  std::string seconds = "-";
  std::string worst_cpu = "-";
};

struct ModeOutcome {
  std::vector<SummaryRow> rows;
  int status = 0;
};

// Shared, read-only state of one scenario run.
struct Setup {
  BuildingPlan plan;
  double cell_size = 0.0;
  EvacuationProblem prob;
  double slot_seconds = 0.0;
};

Setup make_setup(const Scenario& sc, const RunOptions& opt) {
  Setup s;
  if (!fs::exists(sc.plan)) throw ConfigError("plan file '" + sc.plan.string() + "' not found");
  s.plan = load_plan_file(sc.plan.string());
  s.cell_size = select_cell_size(s.plan, sc.cell_size_candidates, sc.node_budget);
  const CellGrid grid = build_grid(s.plan, s.cell_size);
  s.prob.network = build_static_network(grid, sc.params);
  s.slot_seconds = s.prob.network.slot_seconds;
  switch (sc.occupancy.source) {
    case OccupancySpec::Source::Plan:
      s.prob.initial = plan_occupancy(s.plan, grid, s.prob.network);
      break;
    case OccupancySpec::Source::Uniform:
      s.prob.initial = spread_occupancy(grid, s.prob.network, sc.occupancy.total);
      break;
    case OccupancySpec::Source::Random:
      s.prob.initial = spread_occupancy(grid, s.prob.network, sc.occupancy.total,
                                        opt.seed.value_or(sc.occupancy.seed));
      break;
  }
  s.prob.risk = sc.risk;
  s.prob.congestion = sc.congestion;
  s.prob.horizon_cap = sc.horizon_cap;
  s.prob.validate();
  if (!sc.risk.empty()) validate_risk(s.prob.network, sc.risk);
  spdlog::info("plan '{}': cell size {} m, {} nodes, slot {} s, {} persons", s.plan.name,
               s.cell_size, s.prob.network.node_count, s.slot_seconds, s.prob.total());
  return s;
}

SummaryRow profile_row(const std::string& mode, const Profile& p) {
  return {mode, std::to_string(p.tau_star), plain(p.tau_star * p.slot_seconds), fixed(p.worst_cpu())};
}

std::string profile_text(const Profile& p, bool timing) {
  std::ostringstream os;
  write_profile_csv(os, p, timing);
  return os.str();
}

ModeOutcome run_profile(const Scenario& sc, const Setup& s, const fs::path& out, ProfileMode mode) {
  const std::string name = mode == ProfileMode::Ideal ? "ideal" : "shortest";
  const Profile p = evacuation_profile(s.prob, mode);
  write_file(out / (name + ".csv"), profile_text(p, sc.record_cpu));
  return {{profile_row(name, p)}, 0};
}

ModeOutcome run_decomposed(const Scenario& sc, const Setup& s, const fs::path& out, int chunk) {
  const std::string name = "decomposed_chunk" + std::to_string(chunk);
  const DecomposedResult r = time_decomposed_solve(s.prob, chunk);
  write_file(out / (name + ".csv"), profile_text(r.profile, sc.record_cpu));
  return {{profile_row(name, r.profile)}, 0};
}

ModeOutcome run_sweep(const Scenario& sc, const Setup& s, const fs::path& out, int jobs) {
  SweepSetup setup;
  setup.cell_size = s.cell_size;
  setup.params = sc.params;
  setup.initial = s.prob.initial;
  setup.risk = sc.risk;
  setup.congestion = sc.congestion;
  setup.horizon_cap = sc.horizon_cap;
  setup.jobs = jobs;
  const double t0 = thread_cpu_seconds();
  const auto points = exit_width_sweep(s.plan, sc.sweep_widths, setup);
  std::string text = "width_m,tau,seconds\n";
  ModeOutcome o;
  for (const SweepPoint& p : points) {
    text += plain(p.width_m) + "," + std::to_string(p.tau) + "," + plain(p.seconds) + "\n";
  }
  write_file(out / "sweep.csv", text);
  SummaryRow row{"sweep", "-", "-", fixed(thread_cpu_seconds() - t0)};
  if (!points.empty()) {
    row.tau = std::to_string(points.front().tau) + ".." + std::to_string(points.back().tau);
  }
  o.rows.push_back(row);
  return o;
}

ModeOutcome run_abss(const Scenario& sc, const Setup& s, const fs::path& out, const AbssRun& r,
                     std::uint64_t base_seed, int jobs) {
  const BuildingPlan plan = r.double_door ? double_door_variant(s.plan) : s.plan;
  SimConfig cfg;
  cfg.guidance = r.guidance;
  cfg.grouping = r.grouping;
  cfg.cell_size = s.cell_size;
  cfg.params = sc.params;
  cfg.time_cap = r.time_cap;
  auto world = make_world(plan, cfg);
  cfg.validate(world->slot_seconds);
  const int agents = r.agents > 0 ? r.agents : s.prob.total();

  std::vector<EvacuationTrace> traces(idx(r.seeds));
  std::vector<std::exception_ptr> errors(idx(r.seeds));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k = next++; k < r.seeds; k = next++) {
      try {
        SimConfig c = cfg;
        c.seed = base_seed + static_cast<std::uint64_t>(k);
        traces[idx(k)] = run(make_state(world, init_agents(*world, agents, c), c), c);
      } catch (...) {
        errors[idx(k)] = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 1; j < std::min(jobs, r.seeds); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }

  std::string trace = "seed,guidance,grouping,slot,evacuated\n";
  std::string summary = "seed,total_slots,total_seconds\n";
  double seconds = 0.0, slots = 0.0;
  for (const EvacuationTrace& t : traces) {
    for (std::size_t k = 0; k < t.evacuated.size(); ++k) {
      trace += fmt::format("{},{},{},{},{}\n", t.seed, to_string(t.guidance),
                           t.grouping ? "true" : "false", k + 1, t.evacuated[k]);
    }
    summary += fmt::format("{},{},{}\n", t.seed, t.total_slots, fixed(t.total_seconds, 3));
    seconds += t.total_seconds;
    slots += t.total_slots;
  }
  write_file(out / (r.label + "_trace.csv"), trace);
  write_file(out / (r.label + "_summary.csv"), summary);
  return {{{r.label, fixed(slots / r.seeds, 2), fixed(seconds / r.seeds, 2), "-"}}, 0};
}

ModeOutcome run_qn(const QnRun& q, const fs::path& out, std::uint64_t seed) {
  std::string text = "arch,resolution,mean_response_s,saturated,rho_controller\n";
  ModeOutcome o;
  for (const auto& [arch, res] : q.scenarios) {
    const QNModel m = build_qn(arch, res);
    const ResponseStats st = simulate_qn(m, q.epochs, seed);
    int ctl = m.station_index("Controller");
    if (ctl < 0) ctl = m.station_index("Controller1");
    const std::string mean = st.saturated ? "NA" : fixed(st.mean_response);
    text += fmt::format("{},{},{},{},{}\n", to_string(arch), to_string(res), mean,
                        st.saturated ? "true" : "false", fixed(st.rho[idx(ctl)]));
    o.rows.push_back({fmt::format("qn {}-{}", to_string(arch), to_string(res)), "-",
                      st.saturated ? "saturated" : fixed(st.mean_response, 4), "-"});
    if (st.saturated) {
      spdlog::warn("{}-{}: controller utilization {:.1f}, the system saturates", to_string(arch),
                   to_string(res), st.rho[idx(ctl)]);
      o.status = 2;
    }
  }
  write_file(out / "qn.csv", text);
  return o;
}

}  // namespace

bool Scenario::has_modes() const {
  return ideal || shortest || !decomposed_chunks.empty() || !sweep_widths.empty() ||
         !abss.empty() || qn.has_value();
}

Scenario parse_scenario(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  check_keys(doc, {"plan", "cell_size_candidates", "node_budget", "velocity", "door_rate",
                   "stair_rate", "density_cap", "congestion", "occupancy", "risk", "horizon_cap",
                   "record_cpu", "modes"},
             "config");
  Scenario sc;
  if (!doc.contains("plan")) throw ConfigError("config names no plan");
  sc.plan = get<std::string>(doc, "plan", "config");
  if (sc.plan.is_relative()) sc.plan = base_dir / sc.plan;
  if (doc.contains("cell_size_candidates")) {
    sc.cell_size_candidates = get<std::vector<double>>(doc, "cell_size_candidates", "config");
  }
  if (doc.contains("node_budget")) sc.node_budget = get<int>(doc, "node_budget", "config");
  if (doc.contains("velocity")) sc.params.velocity = get<double>(doc, "velocity", "config");
  if (doc.contains("door_rate")) sc.params.door_rate = door_rate_of(doc["door_rate"]);
  if (doc.contains("stair_rate")) sc.params.stair_rate = get<double>(doc, "stair_rate", "config");
  if (doc.contains("density_cap")) sc.params.density_cap = get<double>(doc, "density_cap", "config");
  if (doc.contains("horizon_cap")) sc.horizon_cap = get<int>(doc, "horizon_cap", "config");
  if (doc.contains("record_cpu")) sc.record_cpu = get<bool>(doc, "record_cpu", "config");

  if (doc.contains("congestion")) {
    const json& c = doc["congestion"];
    if (c.is_boolean()) {
      if (c.get<bool>()) sc.congestion = CongestionCurve{};
    } else {
      check_keys(c, {"b1", "b2", "m1", "m2"}, "congestion");
      CongestionCurve curve;
      if (c.contains("b1")) curve.b1 = get<double>(c, "b1", "congestion");
      if (c.contains("b2")) curve.b2 = get<double>(c, "b2", "congestion");
      if (c.contains("m1")) curve.m1 = get<double>(c, "m1", "congestion");
      if (c.contains("m2")) curve.m2 = get<double>(c, "m2", "congestion");
      curve.validate();
      sc.congestion = curve;
    }
  }

  if (doc.contains("occupancy")) {
    const json& o = doc["occupancy"];
    check_keys(o, {"total", "distribution", "seed"}, "occupancy");
    const std::string dist = o.contains("distribution")
                                 ? get<std::string>(o, "distribution", "occupancy")
                                 : (o.contains("total") ? "uniform" : "plan");
    if (dist == "plan") {
      sc.occupancy.source = OccupancySpec::Source::Plan;
    } else if (dist == "uniform") {
      sc.occupancy.source = OccupancySpec::Source::Uniform;
    } else if (dist == "random") {
      sc.occupancy.source = OccupancySpec::Source::Random;
    } else {
      throw ConfigError("occupancy distribution '" + dist + "' is not plan, uniform or random");
    }
    if (sc.occupancy.source != OccupancySpec::Source::Plan) {
      if (!o.contains("total")) throw ConfigError("occupancy '" + dist + "' needs a total");
      sc.occupancy.total = get<int>(o, "total", "occupancy");
      if (sc.occupancy.total < 0) throw ConfigError("occupancy total must be non-negative");
    }
    if (o.contains("seed")) sc.occupancy.seed = get<std::uint64_t>(o, "seed", "occupancy");
  }

  if (doc.contains("risk")) {
    const json& r = doc["risk"];
    check_keys(r, {"removals", "propagation"}, "risk");
    if (r.contains("removals")) {
      for (const json& item : r["removals"]) {
        check_keys(item, {"slot", "from", "to", "both_directions"}, "risk removal");
        RiskSchedule::Removal rm;
        rm.slot = get<int>(item, "slot", "risk removal");
        rm.from = get<int>(item, "from", "risk removal");
        rm.to = get<int>(item, "to", "risk removal");
        if (item.contains("both_directions")) {
          rm.both_directions = get<bool>(item, "both_directions", "risk removal");
        }
        sc.risk.static_removals.push_back(rm);
      }
    }
    if (r.contains("propagation")) {
      const json& p = r["propagation"];
      check_keys(p, {"seeds", "period"}, "risk propagation");
      RiskSchedule::Propagation prop;
      prop.seeds = get<std::vector<int>>(p, "seeds", "risk propagation");
      if (p.contains("period")) prop.period = get<int>(p, "period", "risk propagation");
      sc.risk.propagation = prop;
    }
  }

  if (!doc.contains("modes")) throw ConfigError("config requests no modes");
  const json& m = doc["modes"];
  check_keys(m, {"ideal", "shortest", "decomposed", "sweep", "abss", "qn"}, "modes");
  if (m.contains("ideal")) sc.ideal = get<bool>(m, "ideal", "modes");
  if (m.contains("shortest")) sc.shortest = get<bool>(m, "shortest", "modes");
  if (m.contains("decomposed")) {
    const json& d = m["decomposed"];
    check_keys(d, {"chunks"}, "modes.decomposed");
    sc.decomposed_chunks = get<std::vector<int>>(d, "chunks", "modes.decomposed");
    for (int c : sc.decomposed_chunks) {
      if (c < 1) throw ConfigError("decomposition chunks must be at least 1");
    }
  }
  if (m.contains("sweep")) {
    const json& s = m["sweep"];
    check_keys(s, {"widths"}, "modes.sweep");
    sc.sweep_widths = get<std::vector<double>>(s, "widths", "modes.sweep");
  }
  if (m.contains("abss")) {
    const json& a = m["abss"];
    if (a.is_array()) {
      for (std::size_t i = 0; i < a.size(); ++i) {
        sc.abss.push_back(abss_run_of(a[i], "modes.abss[" + std::to_string(i) + "]"));
      }
    } else {
      sc.abss.push_back(abss_run_of(a, "modes.abss"));
    }
    std::set<std::string> labels;
    for (const AbssRun& r : sc.abss) {
      if (!labels.insert(r.label).second) throw ConfigError("abss label '" + r.label + "' repeats");
    }
  }
  if (m.contains("qn")) {
    const json& q = m["qn"];
    check_keys(q, {"scenarios", "epochs"}, "modes.qn");
    QnRun run;
    std::vector<std::string> names{"centralized-HR", "centralized-LR", "collaborative-HR",
                                   "collaborative-LR"};
    if (q.contains("scenarios")) names = get<std::vector<std::string>>(q, "scenarios", "modes.qn");
    for (const auto& n : names) run.scenarios.push_back(qn_scenario_of(n));
    if (q.contains("epochs")) run.epochs = get<int>(q, "epochs", "modes.qn");
    if (run.epochs < 1) throw ConfigError("qn epochs must be at least 1");
    sc.qn = run;
  }
  if (!sc.has_modes()) throw ConfigError("config requests no modes");
  return sc;
}

Scenario load_scenario(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config '" + path.string() + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_scenario(buf.str(), path.parent_path());
}

int run_scenario(const Scenario& sc, const RunOptions& opt, std::ostream& summary) {
  fs::create_directories(opt.out_dir);
  const bool needs_network = sc.ideal || sc.shortest || !sc.decomposed_chunks.empty() ||
                             !sc.sweep_widths.empty() || !sc.abss.empty();
  Setup setup;
  if (needs_network) setup = make_setup(sc, opt);
  const std::uint64_t seed = opt.seed.value_or(sc.occupancy.seed);
  const int jobs = std::max(1, opt.jobs);

  std::vector<std::pair<std::string, std::function<ModeOutcome()>>> modes;
  if (sc.ideal) modes.emplace_back("ideal", [&] { return run_profile(sc, setup, opt.out_dir, ProfileMode::Ideal); });
  if (sc.shortest) {
    modes.emplace_back("shortest", [&] { return run_profile(sc, setup, opt.out_dir, ProfileMode::ShortestPath); });
  }
  for (int c : sc.decomposed_chunks) {
    modes.emplace_back("decomposed_chunk" + std::to_string(c),
                       [&, c] { return run_decomposed(sc, setup, opt.out_dir, c); });
  }
  if (!sc.sweep_widths.empty()) modes.emplace_back("sweep", [&] { return run_sweep(sc, setup, opt.out_dir, jobs); });
  for (const AbssRun& r : sc.abss) {
    modes.emplace_back(r.label, [&, r] { return run_abss(sc, setup, opt.out_dir, r, seed, jobs); });
  }
  if (sc.qn) modes.emplace_back("qn", [&] { return run_qn(*sc.qn, opt.out_dir, seed); });

  // Modes write disjoint files, so they may run side by side.
  std::vector<ModeOutcome> outcomes(modes.size());
  std::vector<std::exception_ptr> errors(modes.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next++; k < modes.size(); k = next++) {
      spdlog::info("mode {} started", modes[k].first);
      try {
        outcomes[k] = modes[k].second();
      } catch (...) {
        errors[k] = std::current_exception();
      }
      spdlog::info("mode {} finished", modes[k].first);
    }
  };
  std::vector<std::thread> pool;
  for (std::size_t j = 1; j < std::min<std::size_t>(idx(jobs), modes.size()); ++j) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  int status = 0;
  std::exception_ptr config_error;
  for (std::size_t k = 0; k < modes.size(); ++k) {
    if (!errors[k]) {
      status = std::max(status, outcomes[k].status);
      continue;
    }
    SummaryRow row{modes[k].first};
    try {
      std::rethrow_exception(errors[k]);
    } catch (const Unevacuable& e) {
      row.tau = "unevacuable";
      spdlog::error("{}: {}", modes[k].first, e.what());
      status = std::max(status, 2);
    } catch (const HorizonCapExceeded& e) {
      row.tau = "over cap";
      spdlog::error("{}: {}", modes[k].first, e.what());
      status = std::max(status, 2);
    } catch (const TimeCapExceeded& e) {
      row.tau = "over cap";
      spdlog::error("{}: {}", modes[k].first, e.what());
      status = std::max(status, 2);
    } catch (const NoRoute& e) {
      row.tau = "no route";
      spdlog::error("{}: {}", modes[k].first, e.what());
      status = std::max(status, 2);
    } catch (const Error&) {
      if (!config_error) config_error = errors[k];
      continue;
    }
    outcomes[k].rows = {row};
  }
  if (config_error) std::rethrow_exception(config_error);

  summary << fmt::format("{:<24} {:>12} {:>12} {:>14}\n", "mode", "tau*", "seconds", "worst_cpu_s");
  for (const auto& o : outcomes) {
    for (const auto& r : o.rows) {
      summary << fmt::format("{:<24} {:>12} {:>12} {:>14}\n", r.mode, r.tau, r.seconds, r.worst_cpu);
    }
  }
  return status;
}

void compare_profiles(const std::vector<fs::path>& inputs, std::ostream& out) {
  if (inputs.empty()) throw ConfigError("nothing to compare");
  std::vector<std::string> labels;
  std::vector<std::map<int, std::string>> series;
  std::optional<std::string> slot;
  std::optional<fs::path> slot_source;
  int last_tau = 0;
  for (const fs::path& p : inputs) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + p.string() + "'");
    std::string line;
    std::getline(in, line);
    if (line != "tau,evacuees,cpu_seconds,slot_seconds") {
      throw ConfigError("'" + p.string() + "' is not a profile CSV");
    }
    std::map<int, std::string> s;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<std::string> f;
      std::stringstream ls(line);
      for (std::string cell; std::getline(ls, cell, ',');) f.push_back(cell);
      if (f.size() != 4) throw ConfigError("malformed row in '" + p.string() + "': " + line);
      if (slot && *slot != f[3]) {
        throw SlotMismatch("'" + p.string() + "' has " + f[3] + " s slots but '" +
                           slot_source->string() + "' has " + *slot + " s");
      }
      slot = f[3];
      slot_source = p;
      int tau = 0;
      try {
        tau = std::stoi(f[0]);
      } catch (const std::exception&) {
        throw ConfigError("malformed tau in '" + p.string() + "': " + f[0]);
      }
      s[tau] = f[1];
      last_tau = std::max(last_tau, tau);
    }
    std::string label = p.stem().string();
    for (int k = 2; std::find(labels.begin(), labels.end(), label) != labels.end(); ++k) {
      label = p.stem().string() + "_" + std::to_string(k);
    }
    labels.push_back(label);
    series.push_back(std::move(s));
  }
  out << "tau";
  for (const auto& l : labels) out << ',' << l;
  out << '\n';
  std::vector<std::string> held(series.size(), "0");
  for (int tau = 1; tau <= last_tau; ++tau) {
    out << tau;
    for (std::size_t k = 0; k < series.size(); ++k) {
      const auto it = series[k].find(tau);
      if (it != series[k].end()) held[k] = it->second;
      out << ',' << held[k];
    }
    out << '\n';
  }
}

void describe_plan(const fs::path& path, std::ostream& out) {
  if (!fs::exists(path)) throw ConfigError("plan file '" + path.string() + "' not found");
  const BuildingPlan plan = load_plan_file(path.string());
  int exits = 0;
  for (const Door& d : plan.doors) exits += d.is_exit() ? 1 : 0;
  out << fmt::format("{}: valid, {} rooms, {} doors ({} exits), {} occupants\n", plan.name,
                     plan.rooms.size(), plan.doors.size(), exits, plan.total_occupants());
}

}  // namespace evacnet
