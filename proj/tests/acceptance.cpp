// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure.

#include <spdlog/spdlog.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "evacnet/abss.hpp"
#include "evacnet/cli.hpp"
#include "evacnet/errors.hpp"
#include "evacnet/evac.hpp"
#include "evacnet/qn.hpp"
#include "support/random_networks.hpp"

using namespace evacnet;
using evacnet::testing::random_problem;
namespace fs = std::filesystem;

namespace {

const fs::path kData = EVACNET_DATA_DIR;
const fs::path kSource = EVACNET_SOURCE_DIR;

struct Verdict {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct Network {
  BuildingPlan plan;
  EvacuationProblem prob;
};

Network load(const std::string& name) {
  Network n;
  n.plan = load_plan_file((kData / (name + ".json")).string());
  const CellGrid grid = build_grid(n.plan, 3.0);
  n.prob.network = build_static_network(grid, NetworkParams{});
  n.prob.initial = plan_occupancy(n.plan, grid, n.prob.network);
  return n;
}

double mean_seconds(const BuildingPlan& plan, int agents, Guidance g, bool grouping, int seeds) {
  double sum = 0.0;
  for (int s = 1; s <= seeds; ++s) {
    SimConfig cfg;
    cfg.guidance = g;
    cfg.grouping = grouping;
    cfg.seed = static_cast<std::uint64_t>(s);
    sum += run(plan, agents, cfg).total_seconds;
  }
  return sum / seeds;
}

std::string fmt2(double v) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(2);
  os << v;
  return os.str();
}

Verdict oracle_equivalence() {
  const auto t0 = std::chrono::steady_clock::now();
  std::mt19937_64 rng(101);
  int mismatches = 0;
  for (int k = 0; k < 200; ++k) {
    const EvacuationProblem p = random_problem(rng);
    const int tau = 1 + static_cast<int>(rng() % 4);
    const int lp_value = max_outflow(p, tau).evacuees;
    MfpModel m = build_mfp(p, tau);
    const lp::LPSolution ip = lp::solve_integer(m.lp, 200000);
    if (ip.status != lp::Status::Optimal || std::lround(ip.objective) != lp_value) ++mismatches;
  }
  const double secs = seconds_since(t0);
  return {mismatches == 0 && secs < 60.0,
          "200 instances, " + std::to_string(mismatches) + " mismatches, " + fmt2(secs) + " s"};
}

Verdict integrality() {
  std::mt19937_64 rng(202);
  int fractional = 0, split = 0;
  for (int k = 0; k < 100; ++k) {
    evacnet::testing::RandomSpec spec;
    spec.max_people = 12;
    const EvacuationProblem p = random_problem(rng, spec);
    const int tau = 1 + static_cast<int>(rng() % 5);
    if (!max_outflow(p, tau).solution.integral) ++fractional;
    if (!lp::solve_lp(build_mfp(p, tau).lp).integral) ++split;
  }
  return {fractional == 0, "100 instances, " + std::to_string(fractional) + " fractional; the raw relaxation split a two-way passage on " +
                               std::to_string(split)};
}

Verdict exit_rate() {
  const Network n = load("compact4exit");
  const Profile p = evacuation_profile(n.prob, ProfileMode::Ideal);
  bool steady = true;
  int prev = 0;
  for (const ProfileRow& r : p.rows) {
    steady = steady && r.evacuees - prev == 12;
    prev = r.evacuees;
  }
  return {steady && p.tau_star == 22 && n.prob.total() == 264 && p.slot_seconds == 2.5,
          "tau* " + std::to_string(p.tau_star) + " (" + fmt2(p.tau_star * p.slot_seconds) +
              " s), increments " + (steady ? "all 12" : "not all 12")};
}

Verdict baseline_dominance() {
  bool ok = true;
  std::string detail;
  for (const std::string name : {"compact4exit", "tworoute"}) {
    const Network n = load(name);
    const Profile ideal = evacuation_profile(n.prob, ProfileMode::Ideal);
    const Profile sp = evacuation_profile(n.prob, ProfileMode::ShortestPath);
    ok = ok && sp.tau_star >= ideal.tau_star;
    detail += name + " " + std::to_string(ideal.tau_star) + "/" + std::to_string(sp.tau_star) + "; ";
    if (name == "tworoute") {
      std::size_t prefix = 0;
      while (prefix < ideal.rows.size() && ideal.rows[prefix].evacuees == sp.rows[prefix].evacuees) {
        ++prefix;
      }
      bool diverged = false;
      for (std::size_t k = prefix; k < ideal.rows.size(); ++k) {
        diverged = diverged || sp.rows[k].evacuees < ideal.rows[k].evacuees;
      }
      ok = ok && sp.tau_star > ideal.tau_star && prefix >= 1 && diverged;
      detail += "shared prefix " + std::to_string(prefix) + " slots; ";
    }
  }
  std::mt19937_64 rng(404);
  int violations = 0;
  for (int k = 0; k < 50; ++k) {
    const EvacuationProblem p = random_problem(rng);
    if (min_evac_time(p).tau > min_evac_time([&] {
          EvacuationProblem q = p;
          q.network = shortest_path_subgraph(p.network);
          return q;
        }()).tau) {
      ++violations;
    }
  }
  ok = ok && violations == 0;
  detail += "50 random networks, " + std::to_string(violations) + " violations";
  return {ok, detail};
}

Verdict decomposition() {
  bool ok = true;
  std::string detail;
  for (const std::string name : {"compact4exit", "tworoute"}) {
    const Network n = load(name);
    const int tau = min_evac_time(n.prob).tau;
    detail += name + " " + std::to_string(tau) + " ->";
    for (int chunk : {1, 2, 4}) {
      const int d = time_decomposed_solve(n.prob, chunk).tau;
      ok = ok && d >= tau;
      detail += " " + std::to_string(d);
      if (name == "compact4exit" && chunk == 1) ok = ok && d > tau;
    }
    detail += "; ";
  }
  std::mt19937_64 rng(505);
  int violations = 0;
  for (int k = 0; k < 50; ++k) {
    const EvacuationProblem p = random_problem(rng);
    if (p.total() == 0) continue;
    const int tau = min_evac_time(p).tau;
    for (int chunk : {1, 2}) {
      if (time_decomposed_solve(p, chunk).tau < tau) ++violations;
    }
  }
  ok = ok && violations == 0;
  detail += "50 random networks, " + std::to_string(violations) + " violations";
  return {ok, detail};
}

Verdict exit_width_sweep_plateau() {
  bool ok = true;
  std::string detail;
  const std::vector<std::pair<std::string, std::vector<double>>> sweeps = {
      {"compact4exit", {0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0}},
      {"tworoute", {1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0, 4.5}}};
  for (const auto& [name, widths] : sweeps) {
    const Network n = load(name);
    SweepSetup setup;
    setup.initial = n.prob.initial;
    const auto t0 = std::chrono::steady_clock::now();
    const auto points = exit_width_sweep(n.plan, widths, setup);
    const double secs = seconds_since(t0);
    bool monotone = true;
    for (std::size_t k = 1; k < points.size(); ++k) monotone = monotone && points[k].tau <= points[k - 1].tau;
    // The plateau starts at the first width whose tau* no wider exit improves.
    std::size_t start = points.size() - 1;
    while (start > 0 && points[start - 1].tau == points.back().tau) --start;
    const bool plateau = start + 1 < points.size() && points.front().tau > points.back().tau;
    ok = ok && monotone && plateau && secs < 300.0;
    detail += name + ":";
    for (const auto& p : points) detail += " " + std::to_string(p.tau);
    detail += " plateau from " + fmt2(points[start].width_m) + " m, " + fmt2(secs) + " s; ";
  }
  return {ok, detail};
}

Verdict exchange_lemma() {
  std::mt19937_64 rng(707);
  evacnet::testing::RandomSpec spec;
  spec.max_cell = 12;
  spec.max_people = 20;
  int broken = 0, exchanged = 0;
  for (int k = 0; k < 100; ++k) {
    EvacuationProblem p = random_problem(rng, spec);
    p.congestion = CongestionCurve{};
    const int tau = 2 + static_cast<int>(rng() % 3);
    MfpModel plain = build_mfp(p, tau);
    add_congestion(plain, p);
    MfpModel m = plain;
    // A random bonus on second-tier occupancy samples unbalanced optima.
    std::uniform_real_distribution<double> bonus(0.0, 1e-3);
    for (const auto& slot : m.cell_split) {
      for (const auto& s : slot) {
        if (s.b >= 0) m.lp.add_objective(s.b, bonus(rng));
      }
    }
    const lp::LPSolution sol = lp::solve_lp(m.lp);
    if (sol.status != lp::Status::Optimal) {
      ++broken;
      continue;
    }
    auto objective = [&](const std::vector<double>& v) {
      double z = plain.lp.objective_constant;
      for (std::size_t i = 0; i < v.size(); ++i) z += plain.lp.objective[i] * v[i];
      return z;
    };
    std::vector<double> values = sol.values;
    const double before = objective(values);
    exchanged += apply_exchange(plain, values) > 0 ? 1 : 0;
    if (lp::max_violation(plain.lp, values) > 1e-7 || std::abs(objective(values) - before) > 1e-7) {
      ++broken;
    }
  }
  return {broken == 0 && exchanged > 0, "100 solutions, " + std::to_string(exchanged) +
                                            " transformed, " + std::to_string(broken) + " broken"};
}

Verdict binary_search() {
  std::mt19937_64 rng(808);
  int mismatches = 0;
  for (int k = 0; k < 50; ++k) {
    const EvacuationProblem p = random_problem(rng);
    if (min_evac_time(p).tau != min_evac_time_linear(p)) ++mismatches;
  }
  return {mismatches == 0, "50 instances, " + std::to_string(mismatches) + " mismatches"};
}

Verdict queueing() {
  bool ok = true;
  const ResponseStats hr = simulate_qn(build_qn(Architecture::Centralized, Resolution::HR), 200, 1);
  const double rho = hr.rho[3];
  ok = ok && hr.saturated && std::abs(rho - 88.2) < 0.1;
  double worst_gap = 0.0, cent_sum = 0.0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double clr =
        simulate_qn(build_qn(Architecture::Collaborative, Resolution::LR), 20000, seed).mean_response;
    const double cent =
        simulate_qn(build_qn(Architecture::Centralized, Resolution::LR), 20000, seed).mean_response;
    const double chr =
        simulate_qn(build_qn(Architecture::Collaborative, Resolution::HR), 20000, seed).mean_response;
    ok = ok && clr < cent && cent < chr;
    worst_gap = std::max(worst_gap, std::abs(cent - 1.5085) / 1.5085);
    cent_sum += cent;
  }
  ok = ok && worst_gap <= 0.35;
  const double mm1 = simulate_qn(single_station(0.2, 1.0, true), 100000, 1).mean_response;
  const double mm1_gap = std::abs(mm1 - 1.25) / 1.25;
  ok = ok && mm1_gap <= 0.05;
  return {ok, "centralized-HR rho " + fmt2(rho) + (hr.saturated ? " saturated" : " stable") +
                  "; centralized-LR mean " + fmt2(cent_sum / 5) + " s (worst gap " +
                  fmt2(100 * worst_gap) + "%); M/M/1 " + fmt2(mm1) + " s (" + fmt2(100 * mm1_gap) +
                  "% off)"};
}

Verdict agent_simulation() {
  bool ok = true;
  std::string detail;
  const BuildingPlan compact = load_plan_file((kData / "compact4exit.json").string());
  const BuildingPlan tworoute = load_plan_file((kData / "tworoute.json").string());
  auto batch = [&](const std::string& what, const std::function<double()>& f) {
    const auto t0 = std::chrono::steady_clock::now();
    const double v = f();
    const double secs = seconds_since(t0);
    ok = ok && secs < 600.0;
    detail += what + " " + fmt2(v) + " s [" + fmt2(secs) + " s wall]; ";
    return v;
  };
  const double free = batch("compact4exit alone", [&] {
    return mean_seconds(compact, 200, Guidance::ShortestPath, false, 20);
  });
  const double grouped = batch("grouped", [&] {
    return mean_seconds(compact, 200, Guidance::ShortestPath, true, 20);
  });
  ok = ok && grouped > free;
  const double shortest = batch("tworoute shortest", [&] {
    return mean_seconds(tworoute, 60, Guidance::ShortestPath, false, 20);
  });
  const double netflow = batch("netflow", [&] {
    return mean_seconds(tworoute, 60, Guidance::Netflow, false, 20);
  });
  ok = ok && netflow <= shortest;
  const double single = batch("compact4exit single doors", [&] {
    return mean_seconds(compact, 200, Guidance::Netflow, true, 20);
  });
  const double doubled = batch("double doors", [&] {
    return mean_seconds(double_door_variant(compact), 200, Guidance::Netflow, true, 20);
  });
  ok = ok && doubled < single;
  return {ok, detail};
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "evacnet_acceptance";
  fs::remove_all(root);
  const Scenario sc = load_scenario(kSource / "tests" / "determinism.json");
  for (const std::string dir : {"a", "b"}) {
    std::ostringstream summary;
    run_scenario(sc, {root / dir, 7, 2}, summary);
  }
  int files = 0, differing = 0;
  auto slurp = [](const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::stringstream s;
    s << in.rdbuf();
    return s.str();
  };
  for (const auto& entry : fs::directory_iterator(root / "a")) {
    ++files;
    if (slurp(entry.path()) != slurp(root / "b" / entry.path().filename())) ++differing;
  }
  std::ostringstream m1, m2;
  compare_profiles({root / "a" / "ideal.csv", root / "a" / "shortest.csv"}, m1);
  compare_profiles({root / "b" / "ideal.csv", root / "b" / "shortest.csv"}, m2);
  if (m1.str() != m2.str()) ++differing;
  return {differing == 0 && files >= 9,
          std::to_string(files) + " CSVs plus a merged profile, " + std::to_string(differing) +
              " differing"};
}

}  // namespace

// Optional arguments select criteria by number; none runs them all.
int main(int argc, char** argv) {
  spdlog::set_level(spdlog::level::warn);
  std::vector<std::size_t> selected;
  for (int i = 1; i < argc; ++i) selected.push_back(std::stoul(argv[i]));
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"oracle equivalence", oracle_equivalence},
      {"integrality", integrality},
      {"exit-rate reproduction", exit_rate},
      {"baseline dominance", baseline_dominance},
      {"time decomposition", decomposition},
      {"exit-width sweep", exit_width_sweep_plateau},
      {"congestion lemma", exchange_lemma},
      {"binary-search correctness", binary_search},
      {"queueing network", queueing},
      {"agent-based simulation", agent_simulation},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    if (!selected.empty() && std::find(selected.begin(), selected.end(), k + 1) == selected.end()) {
      continue;
    }
    Verdict v;
    try {
      v = criteria[k].second();
    } catch (const std::exception& e) {
      v = {false, std::string("error: ") + e.what()};
    }
    failures += v.pass ? 0 : 1;
    std::printf("%s %zu %s: %s\n", v.pass ? "PASS" : "FAIL", k + 1, criteria[k].first.c_str(),
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
