#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evacnet/grid.hpp"
#include "evacnet/lp.hpp"
#include "evacnet/plan.hpp"

namespace evacnet {

/// Three-tier piecewise-linear arc capacity as a function of the occupancy of
/// the destination cell. Breakpoints n' = floor(b1 n), n'' = floor(b2 n); tier
/// capacities c, m1 c, m2 c.
struct CongestionCurve {
  double b1 = 0.5;
  double b2 = 0.8;
  double m1 = 0.6;
  double m2 = 0.3;

  /// Throws ConfigError unless 0 < b1 < b2 < 1 and 1 > m1 > m2 > 0.
  void validate() const;
};

/// Tiers of one destination cell, or nullopt when the cell is too small to
/// host three distinct concave tiers (it then keeps a constant capacity).
struct CellTiers {
  int n1 = 0;  // n'
  int n2 = 0;  // n''
  int n = 0;
};
std::optional<CellTiers> cell_tiers(const CongestionCurve& curve, int node_capacity);

/// Slopes (a1, a2, a3) of an arc with base capacity `c` into a cell with
/// tiers `t`.
struct TierSlopes {
  double c0 = 0.0, c1 = 0.0, c2 = 0.0;  // c, c', c''
  double a1 = 0.0, a2 = 0.0, a3 = 0.0;
};
TierSlopes tier_slopes(const CongestionCurve& curve, const CellTiers& t, double c);

struct EvacuationProblem {
  StaticNetwork network;
  std::vector<int> initial;  // persons per node; initial[0] == 0
  RiskSchedule risk;
  std::optional<CongestionCurve> congestion;
  int horizon_cap = 10000;

  int total() const;
  /// Throws ConfigError when occupancies are negative, exceed node
  /// capacities, or are placed at the safe node.
  void validate() const;
};

/// Flows and occupancies of one horizon. x[t][arc] moves persons during
/// (t, t+1]; y[t][node] is the occupancy at t (y[t][0] counts evacuees).
struct FlowSolution {
  int horizon = 0;
  int offset = 0;
  std::vector<std::vector<double>> x;
  std::vector<std::vector<double>> y;
  std::vector<double> profile;  // cumulative evacuees, t = 0 .. horizon
  double objective = 0.0;
  bool integral = true;
  double cpu_seconds = 0.0;
  long iterations = 0;
};

/// LP of the max-flow problem with the variable maps needed to decode it.
struct MfpModel {
  struct Split {
    int a = -1, b = -1, c = -1;  // (u, v, w) for cells, (phi, chi, psi) for arcs
  };

  lp::LPInstance lp;
  int horizon = 0;
  int offset = 0;
  std::vector<double> initial;
  std::vector<std::vector<int>> x;  // [t][arc], -1 when the arc is not live
  std::vector<std::vector<int>> y;  // [t][node], t = 0 .. horizon; -1 for constants
  // Congestion (empty when not added).
  std::vector<std::vector<Split>> cell_split;  // [t][node], t = 0 .. horizon-1
  std::vector<std::vector<Split>> arc_split;   // [t][arc]
  std::vector<std::optional<CellTiers>> tiers;  // per node
  std::vector<int> arc_head;                    // destination node per arc
  std::vector<std::optional<TierSlopes>> arc_slopes;
  std::vector<std::string> warnings;
};

/// Conservation rows for every cell and slot, departure rows (persons leaving
/// a cell during a slot were in it at the slot's start), joint passage rows
/// x_ij + x_ji <= c_ij per live passage and slot, occupancy bounds, and the
/// objective "persons at the safe place at the horizon".
MfpModel build_mfp(const EvacuationProblem& prob, int tau, int offset = 0);
/// Same, starting from a (possibly fractional) occupancy state.
MfpModel build_mfp(const EvacuationProblem& prob, const std::vector<double>& initial, int tau,
                   int offset);

/// Splits gating occupancies and flows into the three congestion tiers and
/// adds the tier rows. The joint passage rows stay as an outer cap.
void add_congestion(MfpModel& model, const EvacuationProblem& prob);

/// Adds the decomposition tie-breaker: -eps * sum over slots and cells of
/// dist(i) * y_i^t. `dist` is indexed by node.
void add_potential(MfpModel& model, const std::vector<int>& dist, double eps);

/// Decodes an LP point into flows, occupancies and the evacuee profile.
FlowSolution decode(const MfpModel& model, const EvacuationProblem& prob,
                    const std::vector<double>& values);

/// Applies the tier-exchange transformation: wherever u < n' and v > 0 the
/// occupancy shifts from v to u, and any flow pushed over its first-tier cap
/// moves to the second tier. Returns the number of exchanges performed.
int apply_exchange(const MfpModel& model, std::vector<double>& values);

struct OutflowResult {
  int evacuees = 0;  // floor of the LP objective
  FlowSolution solution;
  std::vector<std::string> warnings;
};

/// Solves the (congested, when configured) MFP for horizon `tau`.
OutflowResult max_outflow(const EvacuationProblem& prob, int tau,
                          const lp::SolverOptions& options = {});

/// Throws Unevacuable when some occupied cell cannot reach the safe place
/// through live arcs of positive capacity.
void check_evacuable(const EvacuationProblem& prob);

struct MinTimeResult {
  int tau = 0;
  FlowSolution solution;
  int solves = 0;
};

/// Smallest horizon evacuating everyone: doubling from 1, then binary search.
MinTimeResult min_evac_time(const EvacuationProblem& prob,
                            const lp::SolverOptions& options = {});
/// Same answer by trying 0, 1, 2, ... in turn.
int min_evac_time_linear(const EvacuationProblem& prob, const lp::SolverOptions& options = {});

/// Hop distance of every node to the safe place over arcs of positive
/// capacity; -1 when unreachable.
std::vector<int> distance_to_exit(const StaticNetwork& net);
std::vector<int> distance_to_exit(const StaticNetwork& net, const std::vector<char>& live);

/// Keeps exactly the arcs (i, j) with dist(i) = dist(j) + 1.
StaticNetwork shortest_path_subgraph(const StaticNetwork& net);

enum class ProfileMode { Ideal, ShortestPath };

struct ProfileRow {
  int tau = 0;
  int evacuees = 0;
  double cpu_seconds = 0.0;
};

struct Profile {
  int tau_star = 0;
  double slot_seconds = 0.0;
  std::vector<ProfileRow> rows;  // tau = 1 .. tau_star
  double worst_cpu() const;
};

/// Maximum evacuees for every horizon 1 .. tau*, on the full network or on
/// its shortest-path subgraph.
Profile evacuation_profile(const EvacuationProblem& prob, ProfileMode mode,
                           const lp::SolverOptions& options = {});

/// Re-solves min_evac_time with every exit door set to each width.
struct SweepPoint {
  double width_m = 0.0;
  int tau = 0;
  double seconds = 0.0;
};
struct SweepSetup {
  double cell_size = 3.0;
  NetworkParams params;
  std::vector<int> initial;
  RiskSchedule risk;
  std::optional<CongestionCurve> congestion;
  int horizon_cap = 10000;
  int jobs = 1;
};
std::vector<SweepPoint> exit_width_sweep(const BuildingPlan& plan, const std::vector<double>& widths,
                                         const SweepSetup& setup);

/// Rolling-horizon solve: each step maximizes exits over the next `chunk`
/// slots from the current state, commits the chunk's flows and advances.
/// profile.rows[k] holds the cumulative evacuees after k+1 slots. Throws
/// NonProgress when a step moves nobody.
struct DecomposedResult {
  int tau = 0;
  Profile profile;
  int solves = 0;
};
DecomposedResult time_decomposed_solve(const EvacuationProblem& prob, int chunk,
                                       const lp::SolverOptions& options = {});

/// Writes `tau,evacuees,cpu_seconds,slot_seconds`. CPU seconds are written as
/// NA unless `timing` is set, so that outputs stay reproducible.
void write_profile_csv(std::ostream& out, const Profile& profile, bool timing);

/// Seconds of CPU time consumed by the calling thread.
double thread_cpu_seconds();

}  // namespace evacnet
