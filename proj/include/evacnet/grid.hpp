#pragma once

#include <cstdint>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "evacnet/plan.hpp"

namespace evacnet {

/// Node id of the safe place in every network.
inline constexpr int kSafeNode = 0;
/// Capacity sentinel for the safe place.
inline constexpr int kUnbounded = std::numeric_limits<int>::max();

// --- cell-size selection -----------------------------------------------------

/// Number of whole cells of edge `a` fitting along `length`.
int cells_along(double length, double a);

/// Area of room p x q left uncovered by a tiling with a x a cells.
double room_error(double p, double q, double a);

/// Largest room error of the plan under cell size `a`.
double max_room_error(const BuildingPlan& plan, double a);

/// Total number of (non-dummy) cells of the plan under cell size `a`.
int total_cells(const BuildingPlan& plan, double a);

/// Among candidates whose tiling stays within `max_nodes` cells, the one with
/// the smallest largest room error; ties go to the larger size. Throws
/// NoFeasibleSize when every candidate exceeds the budget.
double select_cell_size(const BuildingPlan& plan, std::span<const double> candidates,
                        int max_nodes);

/// Cell crossing time at free-flow velocity, rounded to hundredths of a second.
double slot_duration(double cell_size, double velocity);

/// Persons crossing a passage of `width` in one slot: floor(width * rate * slot).
int door_slot_capacity(double width, double rate, double slot);

// --- cellular approximation --------------------------------------------------

enum class PassageKind { Open, Door, Stair };

struct Cell {
  int id = 0;    // network node id, >= 1
  int room = 0;  // index into BuildingPlan::rooms
  int ix = 0;    // column within the room tiling
  int iy = 0;    // row within the room tiling
  bool dummy = false;
  double cx = 0.0;  // center, building coordinates
  double cy = 0.0;
};

/// Passage between two cells (or from a cell to the safe place, `b == 0`).
/// `door` indexes BuildingPlan::doors for door passages, -1 otherwise.
struct Adjacency {
  int a = 0;
  int b = 0;
  double width_m = 0.0;
  PassageKind kind = PassageKind::Open;
  int door = -1;
};

struct CellGrid {
  double cell_size = 0.0;
  std::vector<Cell> cells;  // cells[k].id == k + 1
  std::vector<Adjacency> adjacency;
  std::vector<std::vector<int>> room_cells;  // non-dummy cell ids per room, row-major
  std::vector<int> room_nx, room_ny;
  std::vector<int> dummy_of;  // indexed by node id; -1 when the cell has no dummy

  int node_count() const { return static_cast<int>(cells.size()) + 1; }
  const Cell& cell(int id) const { return cells.at(static_cast<std::size_t>(id - 1)); }
  /// Covered cell of `room` nearest to the point (x, y).
  int cell_at(int room, double x, double y) const;
};

/// Tiles every room with floor(p/a) x floor(q/a) cells anchored at its
/// south-west corner, links 4-neighbours inside rooms and door-connected cell
/// pairs, and doubles stair cells with a dummy node so that walking along a
/// staircase takes two slots per cell. Throws DisconnectedPlan when some cell
/// cannot reach EXIT.
CellGrid build_grid(const BuildingPlan& plan, double a);

// --- static network ----------------------------------------------------------

struct NetworkParams {
  double velocity = 1.2;      // m/s, flat free-flow
  double door_rate = 1.2;     // persons/m/s, doors and open passages
  double stair_rate = 1.0;    // persons/m/s, staircases
  double density_cap = 1.25;  // persons/m^2
};

struct Arc {
  int from = 0;
  int to = 0;
  int capacity = 0;  // persons per slot
  int passage = 0;   // index into StaticNetwork::passages
};

/// Undirected passage shared by the arcs i->j and j->i; exits have one arc.
struct Passage {
  int a = 0;
  int b = 0;
  int capacity = 0;
  PassageKind kind = PassageKind::Open;
};

struct StaticNetwork {
  int node_count = 0;
  std::vector<int> node_capacity;  // [0] == kUnbounded
  std::vector<Arc> arcs;
  std::vector<Passage> passages;
  double slot_seconds = 0.0;
  double cell_size = 0.0;
  std::vector<int> node_room;  // room index per node, -1 for the safe place
  std::vector<bool> dummy;
  std::vector<std::string> warnings;

  std::vector<std::vector<int>> out_arcs() const;
  std::vector<std::vector<int>> in_arcs() const;
  /// Index of the arc from -> to, or -1.
  int find_arc(int from, int to) const;
  /// Sum of capacities of arcs entering the safe place.
  int exit_capacity() const;
};

StaticNetwork build_static_network(const CellGrid& grid, const NetworkParams& params);

/// Assembles a network from explicit parts, filling passages from the arcs
/// (arcs i->j and j->i share one passage). Used by generators and tests.
StaticNetwork make_network(int node_count, std::vector<int> node_capacity,
                           const std::vector<Arc>& arcs, double slot_seconds = 1.0);

// --- initial occupancy -----------------------------------------------------

/// Persons per node from the plan's occupancy block: each room's count spread
/// evenly over its cells, remainder to the lowest cell ids. Throws
/// ConfigError when a room holds more than its cells admit.
std::vector<int> plan_occupancy(const BuildingPlan& plan, const CellGrid& grid,
                                const StaticNetwork& net);

/// `total` persons spread evenly over every cell of the building (remainder
/// to the lowest ids), or, with a seed, placed one by one in uniformly drawn
/// cells that still have room.
std::vector<int> spread_occupancy(const CellGrid& grid, const StaticNetwork& net, int total,
                                  std::optional<std::uint64_t> seed = std::nullopt);

// --- time expansion ----------------------------------------------------------

struct RiskSchedule {
  struct Removal {
    int slot = 0;
    int from = 0;
    int to = 0;
    bool both_directions = true;
  };
  struct Propagation {
    std::vector<int> seeds;
    int period = 1;  // slots between spreading steps
  };

  std::vector<Removal> static_removals;
  std::optional<Propagation> propagation;

  bool empty() const { return static_removals.empty() && !propagation; }
};

struct TimeExpandedNetwork {
  int horizon = 0;   // tau
  int offset = 0;    // absolute slot of local slot 0
  std::vector<std::vector<char>> live;  // live[t][arc], t = 0 .. tau-1

  std::size_t transition_count() const;
  std::vector<int> live_arcs(int t) const;
};

/// Expands `net` over slots offset .. offset+tau-1. Arc set A^t drops static
/// removals with slot <= t and every arc touching a cell reached by the risk
/// propagation by slot t.
TimeExpandedNetwork time_expand(const StaticNetwork& net, int tau, const RiskSchedule& risk,
                                int offset = 0);

/// Throws ConfigError when the schedule references nodes outside the network.
void validate_risk(const StaticNetwork& net, const RiskSchedule& risk);

}  // namespace evacnet
