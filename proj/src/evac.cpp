#include "evacnet/evac.hpp"

#include <algorithm>
#include <cmath>
#include <ctime>
#include <deque>
#include <numeric>
#include <ostream>
#include <sstream>
#include <thread>

#include "evacnet/errors.hpp"

namespace evacnet {

namespace {

constexpr double kFlowEps = 1e-7;

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

std::string format_number(double v) {
  std::ostringstream os;
  os << v;
  return os.str();
}

std::vector<std::vector<int>> arcs_by_passage(const StaticNetwork& net) {
  std::vector<std::vector<int>> by(net.passages.size());
  for (std::size_t k = 0; k < net.arcs.size(); ++k) {
    by[idx(net.arcs[k].passage)].push_back(static_cast<int>(k));
  }
  return by;
}

std::vector<int> bfs_to_exit(const StaticNetwork& net, const std::vector<char>* live) {
  std::vector<std::vector<int>> into(idx(net.node_count));
  for (std::size_t k = 0; k < net.arcs.size(); ++k) {
    const Arc& a = net.arcs[k];
    if (a.capacity <= 0 || (live != nullptr && !(*live)[k])) continue;
    into[idx(a.to)].push_back(a.from);
  }
  std::vector<int> dist(idx(net.node_count), -1);
  std::deque<int> queue{kSafeNode};
  dist[0] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : into[idx(v)]) {
      if (dist[idx(u)] < 0) {
        dist[idx(u)] = dist[idx(v)] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

// Horizon beyond which more slots cannot help: once the risk schedule has
// settled the network is static, and every person who can still escape makes
// at least one hop per slot toward the exit until out.
long escape_bound(const EvacuationProblem& prob) {
  long settle = 0;
  for (const auto& r : prob.risk.static_removals) settle = std::max<long>(settle, r.slot);
  if (prob.risk.propagation) {
    settle = std::max<long>(settle, static_cast<long>(prob.risk.propagation->period) *
                                        prob.network.node_count);
  }
  return settle + 1 + static_cast<long>(prob.total()) * prob.network.node_count;
}

[[noreturn]] void throw_out_of_horizon(const EvacuationProblem& prob, long bound) {
  if (bound < prob.horizon_cap) {
    throw Unevacuable("the risk schedule traps some occupants: not everyone is out within " +
                      std::to_string(bound) + " slots, beyond which more time cannot help");
  }
  throw HorizonCapExceeded("not everyone is out within " + std::to_string(prob.horizon_cap) +
                           " slots");
}

}  // namespace

double thread_cpu_seconds() {
  timespec ts{};
  clock_gettime(CLOCK_THREAD_CPUTIME_ID, &ts);
  return static_cast<double>(ts.tv_sec) + static_cast<double>(ts.tv_nsec) * 1e-9;
}

// --- congestion curve ----------------------------------------------------------

void CongestionCurve::validate() const {
  if (!(0.0 < b1 && b1 < b2 && b2 < 1.0)) {
    throw ConfigError("congestion breakpoints must satisfy 0 < b1 < b2 < 1");
  }
  if (!(0.0 < m2 && m2 < m1 && m1 < 1.0)) {
    throw ConfigError("congestion multipliers must satisfy 1 > m1 > m2 > 0");
  }
}

std::optional<CellTiers> cell_tiers(const CongestionCurve& curve, int node_capacity) {
  if (node_capacity < 3 || node_capacity == kUnbounded) return std::nullopt;
  CellTiers t;
  t.n = node_capacity;
  t.n1 = static_cast<int>(std::floor(curve.b1 * node_capacity + 1e-9));
  t.n2 = static_cast<int>(std::floor(curve.b2 * node_capacity + 1e-9));
  if (!(0 < t.n1 && t.n1 < t.n2 && t.n2 < t.n)) return std::nullopt;
  // Flooring can break concavity on small cells; those keep a constant capacity.
  const TierSlopes s = tier_slopes(curve, t, 1.0);
  if (s.a1 > s.a2 + 1e-12 || s.a2 > s.a3 + 1e-12) return std::nullopt;
  return t;
}

TierSlopes tier_slopes(const CongestionCurve& curve, const CellTiers& t, double c) {
  TierSlopes s;
  s.c0 = c;
  s.c1 = curve.m1 * c;
  s.c2 = curve.m2 * c;
  s.a1 = (s.c0 - s.c1) / t.n1;
  s.a2 = (s.c1 - s.c2) / (t.n2 - t.n1);
  s.a3 = s.c2 / (t.n - t.n2);
  return s;
}

// --- problem -------------------------------------------------------------------

int EvacuationProblem::total() const { return std::accumulate(initial.begin(), initial.end(), 0); }

void EvacuationProblem::validate() const {
  if (static_cast<int>(initial.size()) != network.node_count) {
    throw ConfigError("initial occupancy has " + std::to_string(initial.size()) +
                      " entries for " + std::to_string(network.node_count) + " nodes");
  }
  if (!initial.empty() && initial[0] != 0) throw ConfigError("the safe place starts empty");
  for (int i = 1; i < network.node_count; ++i) {
    const int v = initial[idx(i)];
    if (v < 0 || v > network.node_capacity[idx(i)]) {
      throw ConfigError("initial occupancy of node " + std::to_string(i) +
                        " is outside [0, capacity]");
    }
  }
  if (horizon_cap < 1) throw ConfigError("horizon cap must be positive");
  if (congestion) congestion->validate();
  validate_risk(network, risk);
}

// --- model assembly ------------------------------------------------------------

MfpModel build_mfp(const EvacuationProblem& prob, int tau, int offset) {
  std::vector<double> init(prob.initial.begin(), prob.initial.end());
  return build_mfp(prob, init, tau, offset);
}

MfpModel build_mfp(const EvacuationProblem& prob, const std::vector<double>& initial, int tau,
                   int offset) {
  const StaticNetwork& net = prob.network;
  const TimeExpandedNetwork ten = time_expand(net, tau, prob.risk, offset);
  MfpModel m;
  m.horizon = tau;
  m.offset = offset;
  m.initial = initial;
  m.arc_head.reserve(net.arcs.size());
  for (const Arc& a : net.arcs) m.arc_head.push_back(a.to);
  const std::size_t V = idx(net.node_count);
  const std::size_t A = net.arcs.size();
  auto& lp = m.lp;

  m.x.assign(idx(tau), std::vector<int>(A, -1));
  for (int t = 0; t < tau; ++t) {
    for (std::size_t k = 0; k < A; ++k) {
      const Arc& a = net.arcs[k];
      if (!ten.live[idx(t)][k] || a.capacity <= 0) continue;
      const int v = lp.add_variable("x_" + std::to_string(a.from) + "_" + std::to_string(a.to) +
                                        "_" + std::to_string(t),
                                    0.0, a.capacity);
      m.x[idx(t)][k] = v;
      if (a.to == kSafeNode) lp.add_objective(v, 1.0);
    }
  }
  m.y.assign(idx(tau) + 1, std::vector<int>(V, -1));
  for (int t = 1; t <= tau; ++t) {
    for (std::size_t j = 1; j < V; ++j) {
      m.y[idx(t)][j] = lp.add_variable("y_" + std::to_string(j) + "_" + std::to_string(t), 0.0,
                                       net.node_capacity[j]);
    }
  }

  const auto in = net.in_arcs();
  const auto out = net.out_arcs();
  for (int t = 1; t <= tau; ++t) {
    for (std::size_t j = 1; j < V; ++j) {
      std::vector<lp::Term> terms{{m.y[idx(t)][j], 1.0}};
      double rhs = 0.0;
      if (t > 1) {
        terms.push_back({m.y[idx(t - 1)][j], -1.0});
      } else {
        rhs = initial[j];
      }
      for (int k : in[j]) {
        const int v = m.x[idx(t - 1)][idx(k)];
        if (v >= 0) terms.push_back({v, -1.0});
      }
      for (int k : out[j]) {
        const int v = m.x[idx(t - 1)][idx(k)];
        if (v >= 0) terms.push_back({v, 1.0});
      }
      lp.add_row(std::move(terms), lp::Relation::Equal, rhs,
                 "bal_" + std::to_string(j) + "_" + std::to_string(t));
    }
  }

  // Holdover arcs of the time-expanded network are non-negative: whoever
  // leaves j during (t, t+1] was in j at t. Without these rows the balance
  // alone would let persons cross several empty cells within one slot.
  for (int t = 0; t < tau; ++t) {
    for (std::size_t j = 1; j < V; ++j) {
      std::vector<lp::Term> terms;
      for (int k : out[j]) {
        const int v = m.x[idx(t)][idx(k)];
        if (v >= 0) terms.push_back({v, 1.0});
      }
      if (terms.empty()) continue;
      double rhs = 0.0;
      if (t > 0) {
        terms.push_back({m.y[idx(t)][j], -1.0});
      } else {
        rhs = initial[j];
      }
      lp.add_row(std::move(terms), lp::Relation::LessEqual, rhs,
                 "dep_" + std::to_string(j) + "_" + std::to_string(t));
    }
  }

  const auto by_passage = arcs_by_passage(net);
  for (int t = 0; t < tau; ++t) {
    for (std::size_t p = 0; p < by_passage.size(); ++p) {
      std::vector<lp::Term> terms;
      for (int k : by_passage[p]) {
        const int v = m.x[idx(t)][idx(k)];
        if (v >= 0) terms.push_back({v, 1.0});
      }
      if (terms.empty()) continue;
      lp.add_row(std::move(terms), lp::Relation::LessEqual, net.passages[p].capacity,
                 "cap_" + std::to_string(p) + "_" + std::to_string(t));
    }
  }
  return m;
}

void add_congestion(MfpModel& m, const EvacuationProblem& prob) {
  if (!prob.congestion) return;
  const CongestionCurve& curve = *prob.congestion;
  curve.validate();
  const StaticNetwork& net = prob.network;
  const std::size_t V = idx(net.node_count);
  const std::size_t A = net.arcs.size();
  auto& lp = m.lp;

  m.tiers.assign(V, std::nullopt);
  int constant_cells = 0;
  for (std::size_t j = 1; j < V; ++j) {
    m.tiers[j] = cell_tiers(curve, net.node_capacity[j]);
    if (!m.tiers[j]) ++constant_cells;
  }
  if (constant_cells > 0) {
    m.warnings.push_back(std::to_string(constant_cells) +
                         " cells are too small for three congestion tiers and keep constant "
                         "capacity");
  }
  m.arc_slopes.assign(A, std::nullopt);
  for (std::size_t k = 0; k < A; ++k) {
    const Arc& a = net.arcs[k];
    if (a.to == kSafeNode || !m.tiers[idx(a.to)]) continue;
    m.arc_slopes[k] = tier_slopes(curve, *m.tiers[idx(a.to)], a.capacity);
  }

  m.cell_split.assign(idx(m.horizon), std::vector<MfpModel::Split>(V));
  m.arc_split.assign(idx(m.horizon), std::vector<MfpModel::Split>(A));
  const auto in = net.in_arcs();
  for (int t = 0; t < m.horizon; ++t) {
    const std::string ts = std::to_string(t);
    for (std::size_t j = 1; j < V; ++j) {
      if (!m.tiers[j]) continue;
      bool gated = false;
      for (int k : in[j]) gated = gated || m.x[idx(t)][idx(k)] >= 0;
      if (!gated) continue;
      const CellTiers& tr = *m.tiers[j];
      const std::string js = std::to_string(j);
      MfpModel::Split s;
      s.a = lp.add_variable("u_" + js + "_" + ts, 0.0, tr.n1);
      s.b = lp.add_variable("v_" + js + "_" + ts, 0.0, tr.n2 - tr.n1);
      s.c = lp.add_variable("w_" + js + "_" + ts, 0.0, tr.n - tr.n2);
      std::vector<lp::Term> terms{{s.a, 1.0}, {s.b, 1.0}, {s.c, 1.0}};
      double rhs = 0.0;
      if (t == 0) {
        rhs = m.initial[j];
      } else {
        terms.push_back({m.y[idx(t)][j], -1.0});
      }
      lp.add_row(std::move(terms), lp::Relation::Equal, rhs, "occ_" + js + "_" + ts);
      m.cell_split[idx(t)][j] = s;

      for (int k : in[j]) {
        const int xv = m.x[idx(t)][idx(k)];
        if (xv < 0) continue;
        const TierSlopes& sl = *m.arc_slopes[idx(k)];
        const std::string ks = std::to_string(k) + "_" + ts;
        MfpModel::Split f;
        f.a = lp.add_variable("phi_" + ks, 0.0, lp::kInf);
        f.b = lp.add_variable("chi_" + ks, 0.0, lp::kInf);
        f.c = lp.add_variable("psi_" + ks, 0.0, lp::kInf);
        lp.add_row({{xv, 1.0}, {f.a, -1.0}, {f.b, -1.0}, {f.c, -1.0}}, lp::Relation::Equal, 0.0,
                   "split_" + ks);
        lp.add_row({{f.a, 1.0}, {s.a, sl.a1}}, lp::Relation::LessEqual, sl.c0, "t1_" + ks);
        lp.add_row({{f.b, 1.0}, {s.b, sl.a2}}, lp::Relation::LessEqual, sl.c1, "t2_" + ks);
        lp.add_row({{f.c, 1.0}, {s.c, sl.a3}}, lp::Relation::LessEqual, sl.c2, "t3_" + ks);
        m.arc_split[idx(t)][idx(k)] = f;
      }
    }
  }
}

void add_potential(MfpModel& m, const std::vector<int>& dist, double eps) {
  for (int t = 1; t <= m.horizon; ++t) {
    for (std::size_t j = 1; j < dist.size(); ++j) {
      const int v = m.y[idx(t)][j];
      if (v >= 0 && dist[j] > 0) m.lp.add_objective(v, -eps * dist[j]);
    }
  }
}

FlowSolution decode(const MfpModel& m, const EvacuationProblem& prob,
                    const std::vector<double>& values) {
  const StaticNetwork& net = prob.network;
  const std::size_t V = idx(net.node_count);
  const std::size_t A = net.arcs.size();
  FlowSolution s;
  s.horizon = m.horizon;
  s.offset = m.offset;
  s.x.assign(idx(m.horizon), std::vector<double>(A, 0.0));
  s.y.assign(idx(m.horizon) + 1, std::vector<double>(V, 0.0));
  auto value = [&](int v) {
    const double x = values[idx(v)];
    if (std::abs(x - std::round(x)) > kFlowEps) s.integral = false;
    return x;
  };
  for (std::size_t j = 1; j < V; ++j) s.y[0][j] = m.initial[j];
  s.profile.assign(idx(m.horizon) + 1, 0.0);
  for (int t = 0; t < m.horizon; ++t) {
    double exits = 0.0;
    for (std::size_t k = 0; k < A; ++k) {
      const int v = m.x[idx(t)][k];
      if (v < 0) continue;
      s.x[idx(t)][k] = value(v);
      if (net.arcs[k].to == kSafeNode) exits += s.x[idx(t)][k];
    }
    for (std::size_t j = 1; j < V; ++j) s.y[idx(t) + 1][j] = value(m.y[idx(t) + 1][j]);
    s.profile[idx(t) + 1] = s.profile[idx(t)] + exits;
    s.y[idx(t) + 1][0] = s.profile[idx(t) + 1];
  }
  s.objective = s.profile.back();
  return s;
}

int apply_exchange(const MfpModel& m, std::vector<double>& values) {
  int exchanges = 0;
  for (int t = 0; t < static_cast<int>(m.cell_split.size()); ++t) {
    const auto& cells = m.cell_split[idx(t)];
    for (std::size_t j = 0; j < cells.size(); ++j) {
      const MfpModel::Split& s = cells[j];
      if (s.a < 0) continue;
      const CellTiers& tr = *m.tiers[j];
      double& u = values[idx(s.a)];
      double& v = values[idx(s.b)];
      const double delta = std::min(tr.n1 - u, v);
      if (delta <= 0.0) continue;
      u += delta;
      v -= delta;
      ++exchanges;
      for (std::size_t k = 0; k < m.arc_head.size(); ++k) {
        if (m.arc_head[k] != static_cast<int>(j)) continue;
        const MfpModel::Split& f = m.arc_split[idx(t)][k];
        if (f.a < 0) continue;
        const TierSlopes& sl = *m.arc_slopes[k];
        double& phi = values[idx(f.a)];
        double& chi = values[idx(f.b)];
        const double cap = sl.c0 - sl.a1 * u;
        if (phi > cap) {
          chi += phi - cap;
          phi = cap;
        }
      }
    }
  }
  return exchanges;
}

// --- solving -------------------------------------------------------------------

namespace {

// The joint bound on two-way passages is not a network constraint, so the
// relaxation can stop at a vertex that splits a passage between both
// directions. Cancelling the opposing flows and closing the unused direction
// leaves a pure network program with the same optimum, whose vertices are
// integral.
void orient_passages(MfpModel& model, const StaticNetwork& net, const lp::SolverOptions& options,
                     lp::LPSolution& sol) {
  const auto by_passage = arcs_by_passage(net);
  for (const auto& slot : model.x) {
    for (const auto& arcs : by_passage) {
      if (arcs.size() != 2) continue;
      const int u = slot[idx(arcs[0])], v = slot[idx(arcs[1])];
      if (u < 0 || v < 0) continue;
      const double both = std::min(sol.values[idx(u)], sol.values[idx(v)]);
      sol.values[idx(u)] -= both;
      sol.values[idx(v)] -= both;
      model.lp.variables[idx(sol.values[idx(u)] > kFlowEps ? v : u)].upper = 0.0;
    }
  }
  lp::LPSolution oriented = lp::solve_lp(model.lp, options);
  if (oriented.status == lp::Status::Optimal && oriented.objective >= sol.objective - kFlowEps) {
    oriented.iterations += sol.iterations;
    sol = std::move(oriented);
  }
}

}  // namespace

OutflowResult max_outflow(const EvacuationProblem& prob, int tau,
                          const lp::SolverOptions& options) {
  prob.validate();
  if (tau < 0) throw ConfigError("horizon must be non-negative");
  const double start = thread_cpu_seconds();
  MfpModel model = build_mfp(prob, tau);
  add_congestion(model, prob);
  lp::LPSolution sol = lp::solve_lp(model.lp, options);
  if (sol.status != lp::Status::Optimal) {
    throw SolverError("max-flow program reported " + std::string(lp::to_string(sol.status)));
  }
  if (!sol.integral && !prob.congestion) orient_passages(model, prob.network, options, sol);
  OutflowResult r;
  r.solution = decode(model, prob, sol.values);
  r.solution.iterations = sol.iterations;
  r.solution.cpu_seconds = thread_cpu_seconds() - start;
  r.evacuees = std::min(prob.total(), static_cast<int>(std::floor(sol.objective + kFlowEps)));
  r.warnings = model.warnings;
  return r;
}

void check_evacuable(const EvacuationProblem& prob) {
  const StaticNetwork& net = prob.network;
  const int horizon = net.node_count + 1;
  const TimeExpandedNetwork ten = time_expand(net, horizon, prob.risk);
  const auto out = net.out_arcs();
  for (int src = 1; src < net.node_count; ++src) {
    if (prob.initial[idx(src)] == 0) continue;
    // Arcs only disappear over time, so the earliest arrival at a cell is
    // always the best moment to leave it.
    std::vector<int> arrive(idx(net.node_count), -1);
    std::deque<int> queue{src};
    arrive[idx(src)] = 0;
    while (!queue.empty() && arrive[0] < 0) {
      const int v = queue.front();
      queue.pop_front();
      const int t = arrive[idx(v)];
      if (t >= horizon) continue;
      for (int k : out[idx(v)]) {
        const Arc& a = net.arcs[idx(k)];
        if (a.capacity <= 0 || !ten.live[idx(t)][idx(k)] || arrive[idx(a.to)] >= 0) continue;
        arrive[idx(a.to)] = t + 1;
        queue.push_back(a.to);
      }
    }
    if (arrive[0] < 0) {
      throw Unevacuable("occupants of cell " + std::to_string(src) +
                        " cannot reach the safe place under the risk schedule");
    }
  }
}

MinTimeResult min_evac_time(const EvacuationProblem& prob, const lp::SolverOptions& options) {
  prob.validate();
  MinTimeResult res;
  const int n = prob.total();
  if (n == 0) {
    res.solution = max_outflow(prob, 0, options).solution;
    return res;
  }
  check_evacuable(prob);
  auto attempt = [&](int tau) {
    ++res.solves;
    return max_outflow(prob, tau, options);
  };

  const long bound = escape_bound(prob);
  const int limit = static_cast<int>(std::min<long>(prob.horizon_cap, bound));
  int lo = 0;
  int hi = 1;
  OutflowResult best = attempt(hi);
  while (best.evacuees < n) {
    if (hi >= limit) throw_out_of_horizon(prob, bound);
    lo = hi;
    hi = std::min(hi * 2, limit);
    best = attempt(hi);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    OutflowResult r = attempt(mid);
    if (r.evacuees >= n) {
      hi = mid;
      best = std::move(r);
    } else {
      lo = mid;
    }
  }
  res.tau = hi;
  res.solution = std::move(best.solution);
  return res;
}

int min_evac_time_linear(const EvacuationProblem& prob, const lp::SolverOptions& options) {
  prob.validate();
  const int n = prob.total();
  if (n == 0) return 0;
  check_evacuable(prob);
  const long bound = escape_bound(prob);
  const int limit = static_cast<int>(std::min<long>(prob.horizon_cap, bound));
  for (int tau = 1; tau <= limit; ++tau) {
    if (max_outflow(prob, tau, options).evacuees >= n) return tau;
  }
  throw_out_of_horizon(prob, bound);
}

std::vector<int> distance_to_exit(const StaticNetwork& net) { return bfs_to_exit(net, nullptr); }

std::vector<int> distance_to_exit(const StaticNetwork& net, const std::vector<char>& live) {
  return bfs_to_exit(net, &live);
}

StaticNetwork shortest_path_subgraph(const StaticNetwork& net) {
  const std::vector<int> dist = distance_to_exit(net);
  StaticNetwork sub = net;
  sub.arcs.clear();
  for (const Arc& a : net.arcs) {
    const int di = dist[idx(a.from)];
    const int dj = dist[idx(a.to)];
    if (di >= 0 && dj >= 0 && di == dj + 1) sub.arcs.push_back(a);
  }
  return sub;
}

double Profile::worst_cpu() const {
  double worst = 0.0;
  for (const auto& r : rows) worst = std::max(worst, r.cpu_seconds);
  return worst;
}

Profile evacuation_profile(const EvacuationProblem& prob, ProfileMode mode,
                           const lp::SolverOptions& options) {
  EvacuationProblem p = prob;
  if (mode == ProfileMode::ShortestPath) p.network = shortest_path_subgraph(prob.network);
  Profile profile;
  profile.slot_seconds = p.network.slot_seconds;
  profile.tau_star = min_evac_time(p, options).tau;
  for (int tau = 1; tau <= profile.tau_star; ++tau) {
    const OutflowResult r = max_outflow(p, tau, options);
    profile.rows.push_back({tau, r.evacuees, r.solution.cpu_seconds});
  }
  return profile;
}

std::vector<SweepPoint> exit_width_sweep(const BuildingPlan& plan, const std::vector<double>& widths,
                                         const SweepSetup& setup) {
  std::vector<SweepPoint> points(widths.size());
  auto run_one = [&](std::size_t i) {
    const double w = widths[i];
    if (!(w > 0.0)) throw ConfigError("sweep widths must be positive");
    BuildingPlan variant = plan;
    for (Door& d : variant.doors) {
      if (!d.is_exit()) continue;
      // Widen about the door's center so it stays on the same cell.
      const double wall = variant.door_wall(d).length();
      const double center = variant.door_offset(d) + d.width_m / 2.0;
      if (w > wall + 1e-9) {
        throw ConfigError("sweep width " + format_number(w) + " m exceeds the wall of exit " +
                          d.from + "-" + d.to);
      }
      d.position_m = std::clamp(center - w / 2.0, 0.0, std::max(0.0, wall - w));
      d.width_m = w;
    }
    validate_plan(variant);
    EvacuationProblem prob;
    prob.network = build_static_network(build_grid(variant, setup.cell_size), setup.params);
    prob.initial = setup.initial;
    prob.risk = setup.risk;
    prob.congestion = setup.congestion;
    prob.horizon_cap = setup.horizon_cap;
    const int tau = min_evac_time(prob).tau;
    points[i] = {w, tau, tau * prob.network.slot_seconds};
  };

  const std::size_t jobs = std::max<std::size_t>(1, std::min<std::size_t>(setup.jobs, widths.size()));
  if (jobs == 1) {
    for (std::size_t i = 0; i < widths.size(); ++i) run_one(i);
    return points;
  }
  std::vector<std::exception_ptr> errors(jobs);
  std::vector<std::thread> pool;
  for (std::size_t w = 0; w < jobs; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < widths.size(); i += jobs) run_one(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return points;
}

DecomposedResult time_decomposed_solve(const EvacuationProblem& prob, int chunk,
                                       const lp::SolverOptions& options) {
  if (chunk < 1) throw ConfigError("decomposition chunk must be at least one slot");
  prob.validate();
  check_evacuable(prob);
  const StaticNetwork& net = prob.network;
  const double n = prob.total();
  DecomposedResult res;
  res.profile.slot_seconds = net.slot_seconds;
  std::vector<double> state(prob.initial.begin(), prob.initial.end());
  double evacuated = 0.0;
  int slot = 0;

  while (n - evacuated > 1e-6) {
    if (slot >= prob.horizon_cap) {
      throw HorizonCapExceeded("decomposed solve exceeded " + std::to_string(prob.horizon_cap) +
                               " slots");
    }
    const double start = thread_cpu_seconds();
    const TimeExpandedNetwork now = time_expand(net, 1, prob.risk, slot);
    std::vector<int> dist = distance_to_exit(net, now.live[0]);
    const int far = *std::max_element(dist.begin(), dist.end()) + 1;
    for (int& d : dist) {
      if (d < 0) d = far;
    }
    MfpModel model = build_mfp(prob, state, chunk, slot);
    add_congestion(model, prob);
    const double eps = 1.0 / (static_cast<double>(chunk) * std::max(1.0, n) * far + 1.0);
    add_potential(model, dist, eps);
    const lp::LPSolution sol = lp::solve_lp(model.lp, options);
    ++res.solves;
    if (sol.status != lp::Status::Optimal) {
      throw SolverError("decomposed step reported " + std::string(lp::to_string(sol.status)));
    }
    const FlowSolution fs = decode(model, prob, sol.values);
    const double cpu = thread_cpu_seconds() - start;

    double moved = 0.0;
    for (const auto& xt : fs.x) {
      for (double v : xt) moved += v;
    }
    if (moved <= kFlowEps) {
      throw NonProgress("decomposed step at slot " + std::to_string(slot) + " moved nobody");
    }
    for (int t = 1; t <= chunk; ++t) {
      const double cum = evacuated + fs.profile[idx(t)];
      ++slot;
      res.profile.rows.push_back(
          {slot, static_cast<int>(std::floor(cum + 1e-6)), t == 1 ? cpu : 0.0});
      if (n - cum <= 1e-6) break;
    }
    evacuated += fs.profile.back();
    state = fs.y.back();
    state[0] = 0.0;
  }
  res.tau = slot;
  res.profile.tau_star = slot;
  return res;
}

void write_profile_csv(std::ostream& out, const Profile& profile, bool timing) {
  out << "tau,evacuees,cpu_seconds,slot_seconds\n";
  const std::string slot = format_number(profile.slot_seconds);
  for (const auto& r : profile.rows) {
    out << r.tau << ',' << r.evacuees << ',';
    if (timing) {
      std::ostringstream os;
      os.setf(std::ios::fixed);
      os.precision(6);
      os << r.cpu_seconds;
      out << os.str();
    } else {
      out << "NA";
    }
    out << ',' << slot << '\n';
  }
}

}  // namespace evacnet
