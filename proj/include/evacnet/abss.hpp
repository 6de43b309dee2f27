#pragma once

#include <algorithm>
#include <cstdint>
#include <memory>
#include <optional>
#include <string_view>
#include <vector>

#include "evacnet/evac.hpp"
#include "evacnet/grid.hpp"
#include "evacnet/plan.hpp"

namespace evacnet {

enum class Guidance { ShortestPath, Netflow };
std::string_view to_string(Guidance g);

enum class AgentState { Idle, Moving, Evacuated };

struct Agent {
  int id = 0;
  double x = 0.0;
  double y = 0.0;
  double speed = 1.0;  // m/s
  int group = -1;
  double radius = 0.2;
  AgentState state = AgentState::Idle;
  std::vector<int> route;  // cells still to visit, ending with the safe place

  int room = 0;
  int cell = 0;
  int door = -1;             // door whose opening the agent stands on, or -1
  long door_arrival = -1;    // tick of arrival at that door
  double exit_time = -1.0;   // seconds
  int exit_slot = -1;
  int stuck = 0;  // consecutive ticks without a move
};

struct Group {
  std::vector<int> members;
  double cohesion_radius = 2.0;
};

struct SimConfig {
  Guidance guidance = Guidance::ShortestPath;
  bool grouping = false;
  double tick = 0.1;  // s
  std::uint64_t seed = 1;
  double wall_margin = 0.1;  // m
  double radius = 0.2;       // personal radius, m
  double min_speed = 0.7;
  double max_speed = 1.2;
  int min_group = 3;
  int max_group = 7;
  double cohesion_radius = 2.0;
  double cell_size = 3.0;
  NetworkParams params;  // door_rate drives per-door throughput
  double time_cap = 3600.0;  // s

  /// Throws ConfigError for inconsistent settings, including a tick longer
  /// than a tenth of `slot_seconds`.
  void validate(double slot_seconds) const;
};

/// Static part of a simulation: geometry, cell grid and routing graph with
/// stair twins folded into their cells.
struct SimWorld {
  struct Edge {
    int from = 0;
    int to = 0;
    std::vector<int> doors;  // plan door indices; empty for open floor
  };
  struct Opening {
    int door = 0;
    bool vertical = false;  // wall at x == line, otherwise y == line
    double line = 0.0;
    double lo = 0.0, hi = 0.0;  // usable span along the wall
    double normal = 1.0;        // direction into the room along the wall's axis
  };

  BuildingPlan plan;
  CellGrid grid;
  StaticNetwork net;
  std::vector<int> base;                    // network node -> routing cell
  std::vector<Edge> edges;
  std::vector<std::vector<int>> out;        // edges leaving each cell
  std::vector<int> dist;                    // hops to the safe place, -1 if cut off
  std::vector<int> next_hop;                // shortest-path successor
  std::vector<std::vector<Opening>> openings;  // per room
  std::vector<std::pair<int, int>> door_rooms;  // room indices, -1 for EXIT
  std::vector<int> door_budget;                 // crossings per slot
  double slot_seconds = 0.0;
  double margin = 0.1;

  int edge_between(int from, int to) const;  // -1 when absent
};

std::shared_ptr<const SimWorld> make_world(const BuildingPlan& plan, const SimConfig& cfg);

struct Population {
  std::vector<Agent> agents;
  std::vector<Group> groups;
};

/// Seeded placement without overlaps, off the walls and within cell
/// capacities; speeds uniform in the configured range; random groups when
/// grouping is on. Throws Overcrowded when `n` agents cannot be placed.
Population init_agents(const SimWorld& world, int n, const SimConfig& cfg);
Population init_agents(const BuildingPlan& plan, int n, const SimConfig& cfg);

/// Recommended flows of an optimal evacuation plan, with the crossings the
/// agents have made so far.
struct FlowGuide {
  std::vector<std::vector<double>> recommended;  // [slot][edge]
  std::vector<std::vector<int>> used;            // [slot][edge]
  std::vector<double> recommended_total;         // [edge]
  std::vector<int> used_total;                   // [edge]
  int slot = 0;    // current slot, relative to the plan
  int origin = 0;  // simulation slot at which the plan starts

  void record(int edge, int slot);
  double remaining_now(int edge) const;
  double remaining_total(int edge) const;
};

/// Flows of a minimum-time plan for the agents' current cells.
FlowGuide make_flow_guide(const SimWorld& world, const std::vector<Agent>& agents);

/// Cells from the agent's cell to the safe place. Netflow guidance takes, at
/// each cell, the edge with the largest remaining recommended flow in the
/// current slot, then over the rest of the plan, and falls back to the
/// shortest path; ties go to the lower cell id. Throws NoRoute when the
/// agent's cell cannot reach the safe place.
std::vector<int> plan_route(const Agent& agent, Guidance guidance, const SimWorld& world,
                            const FlowGuide* guide);

/// Uniform bucket grid over the building for neighbour queries.
class AgentIndex {
 public:
  AgentIndex() = default;
  explicit AgentIndex(const BuildingPlan& plan);

  void insert(int id, double x, double y);
  void erase(int id, double x, double y);
  void move(int id, double x0, double y0, double x1, double y1);
  /// Calls f(id) for every agent in the buckets around (x, y).
  template <typename F>
  void around(double x, double y, F&& f) const {
    const int bx = bucket_x(x), by = bucket_y(y);
    for (int j = std::max(0, by - 1); j <= std::min(ny_ - 1, by + 1); ++j) {
      for (int i = std::max(0, bx - 1); i <= std::min(nx_ - 1, bx + 1); ++i) {
        for (int id : buckets_[static_cast<std::size_t>(j * nx_ + i)]) f(id);
      }
    }
  }

 private:
  int bucket_x(double x) const;
  int bucket_y(double y) const;

  double min_x_ = 0.0, min_y_ = 0.0;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> buckets_{1};
};

struct SimState {
  std::shared_ptr<const SimWorld> world;
  AgentIndex index;
  std::vector<Agent> agents;
  std::vector<Group> groups;
  std::optional<FlowGuide> guide;
  long ticks = 0;
  int slot = -1;
  std::vector<int> budget;     // per door, this slot
  std::vector<int> occupancy;  // per routing cell
  std::vector<int> crossings;  // per door, this slot
  int evacuated = 0;

  double time(const SimConfig& cfg) const { return static_cast<double>(ticks) * cfg.tick; }
  bool done() const { return evacuated == static_cast<int>(agents.size()); }
};

SimState make_state(std::shared_ptr<const SimWorld> world, Population population,
                    const SimConfig& cfg);

/// Advances the simulation by one tick.
void step(SimState& state, const SimConfig& cfg);

struct EvacuationTrace {
  std::uint64_t seed = 0;
  Guidance guidance = Guidance::ShortestPath;
  bool grouping = false;
  double slot_seconds = 0.0;
  std::vector<int> evacuated;  // cumulative, per slot
  std::vector<double> exit_times;
  int total_slots = 0;
  double total_seconds = 0.0;
};

/// Runs until everyone is out. Throws TimeCapExceeded past cfg.time_cap.
EvacuationTrace run(const BuildingPlan& plan, int n, const SimConfig& cfg);
EvacuationTrace run(SimState state, const SimConfig& cfg);

/// Copy of the plan where each internal door gets a twin of the same width on
/// the same wall, `gap` metres past it (or before it when there is no room
/// after). Exits are unchanged. Throws WallTooShort.
BuildingPlan double_door_variant(const BuildingPlan& plan, double gap = 0.2);

}  // namespace evacnet
