#include "evacnet/grid.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <random>

#include "evacnet/errors.hpp"

namespace evacnet {

namespace {

constexpr double kEps = 1e-9;

double mod_cells(double length, double a) {
  return length - cells_along(length, a) * a;
}

bool stair_axis_is_x(const Room& r) { return r.width_m >= r.depth_m; }

}  // namespace

int cells_along(double length, double a) {
  return static_cast<int>(std::floor(length / a + kEps));
}

double room_error(double p, double q, double a) {
  const double pm = std::max(0.0, mod_cells(p, a));
  const double qm = std::max(0.0, mod_cells(q, a));
  return q * pm + p * qm - pm * qm;
}

double max_room_error(const BuildingPlan& plan, double a) {
  double worst = 0.0;
  for (const auto& r : plan.rooms) worst = std::max(worst, room_error(r.width_m, r.depth_m, a));
  return worst;
}

int total_cells(const BuildingPlan& plan, double a) {
  int total = 0;
  for (const auto& r : plan.rooms) total += cells_along(r.width_m, a) * cells_along(r.depth_m, a);
  return total;
}

double select_cell_size(const BuildingPlan& plan, std::span<const double> candidates,
                        int max_nodes) {
  if (candidates.empty()) throw ConfigError("no cell-size candidates given");
  std::optional<double> best;
  double best_err = 0.0;
  for (double a : candidates) {
    if (!(a > 0.0)) throw ConfigError("cell-size candidates must be positive");
    if (total_cells(plan, a) > max_nodes) continue;
    const double err = max_room_error(plan, a);
    if (!best || err < best_err - kEps || (std::abs(err - best_err) <= kEps && a > *best)) {
      best = a;
      best_err = err;
    }
  }
  if (!best) throw NoFeasibleSize("every cell-size candidate exceeds the node budget");
  return *best;
}

double slot_duration(double cell_size, double velocity) {
  return std::round(cell_size / velocity * 100.0) / 100.0;
}

int door_slot_capacity(double width, double rate, double slot) {
  return static_cast<int>(std::floor(width * rate * slot + kEps));
}

int CellGrid::cell_at(int room, double x, double y) const {
  const auto& ids = room_cells.at(static_cast<std::size_t>(room));
  const Cell& first = cell(ids.front());
  // South-west corner of the tiling.
  const double x0 = first.cx - cell_size / 2.0;
  const double y0 = first.cy - cell_size / 2.0;
  const int nx = room_nx[static_cast<std::size_t>(room)];
  const int ny = room_ny[static_cast<std::size_t>(room)];
  const int ix = std::clamp(static_cast<int>(std::floor((x - x0) / cell_size)), 0, nx - 1);
  const int iy = std::clamp(static_cast<int>(std::floor((y - y0) / cell_size)), 0, ny - 1);
  return ids[static_cast<std::size_t>(iy * nx + ix)];
}

CellGrid build_grid(const BuildingPlan& plan, double a) {
  if (!(a > 0.0)) throw ConfigError("cell size must be positive");
  CellGrid grid;
  grid.cell_size = a;
  grid.dummy_of.push_back(-1);  // safe place

  const std::size_t nrooms = plan.rooms.size();
  grid.room_cells.resize(nrooms);
  grid.room_nx.resize(nrooms);
  grid.room_ny.resize(nrooms);

  for (std::size_t k = 0; k < nrooms; ++k) {
    const Room& r = plan.rooms[k];
    const int nx = cells_along(r.width_m, a);
    const int ny = cells_along(r.depth_m, a);
    if (nx == 0 || ny == 0) {
      throw ConfigError("cell size " + std::to_string(a) + " exceeds an edge of room '" + r.id +
                        "'");
    }
    grid.room_nx[k] = nx;
    grid.room_ny[k] = ny;
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        Cell c;
        c.id = static_cast<int>(grid.cells.size()) + 1;
        c.room = static_cast<int>(k);
        c.ix = ix;
        c.iy = iy;
        c.cx = r.x_m + (ix + 0.5) * a;
        c.cy = r.y_m + (iy + 0.5) * a;
        grid.cells.push_back(c);
        grid.room_cells[k].push_back(c.id);
        grid.dummy_of.push_back(-1);
      }
    }
  }

  // Stair cells get a dummy twin; the twin carries the "high" end of the cell
  // along the staircase axis, so walking the axis costs two slots per cell.
  for (std::size_t k = 0; k < nrooms; ++k) {
    if (plan.rooms[k].kind != RoomKind::Stair) continue;
    for (int id : grid.room_cells[k]) {
      Cell d = grid.cell(id);
      d.id = static_cast<int>(grid.cells.size()) + 1;
      d.dummy = true;
      grid.cells.push_back(d);
      grid.dummy_of.push_back(-1);
      grid.dummy_of[static_cast<std::size_t>(id)] = d.id;
      grid.adjacency.push_back({id, d.id, a, PassageKind::Stair, -1});
    }
  }

  auto high_end = [&](int id) {
    const int d = grid.dummy_of[static_cast<std::size_t>(id)];
    return d > 0 ? d : id;
  };

  for (std::size_t k = 0; k < nrooms; ++k) {
    const Room& r = plan.rooms[k];
    const bool stair = r.kind == RoomKind::Stair;
    const bool axis_x = stair_axis_is_x(r);
    const PassageKind kind = stair ? PassageKind::Stair : PassageKind::Open;
    const int nx = grid.room_nx[k];
    const int ny = grid.room_ny[k];
    const auto& ids = grid.room_cells[k];
    for (int iy = 0; iy < ny; ++iy) {
      for (int ix = 0; ix < nx; ++ix) {
        const int here = ids[static_cast<std::size_t>(iy * nx + ix)];
        if (ix + 1 < nx) {
          const int east = ids[static_cast<std::size_t>(iy * nx + ix + 1)];
          grid.adjacency.push_back({stair && axis_x ? high_end(here) : here, east, a, kind, -1});
        }
        if (iy + 1 < ny) {
          const int north = ids[static_cast<std::size_t>((iy + 1) * nx + ix)];
          grid.adjacency.push_back({stair && !axis_x ? high_end(here) : here, north, a, kind, -1});
        }
      }
    }
  }

  // Door endpoint: the covered cell of the room nearest to the door's center;
  // for stair cells, the dummy twin when the door sits on the high-axis wall.
  auto door_endpoint = [&](int room, const Segment& opening) {
    const double mx = (opening.x0 + opening.x1) / 2.0;
    const double my = (opening.y0 + opening.y1) / 2.0;
    const int id = grid.cell_at(room, mx, my);
    const Room& r = plan.rooms[static_cast<std::size_t>(room)];
    if (r.kind != RoomKind::Stair) return id;
    const Cell& c = grid.cell(id);
    const bool wall_vertical = std::abs(opening.x0 - opening.x1) < kEps;
    if (stair_axis_is_x(r) && wall_vertical && mx > c.cx) return high_end(id);
    if (!stair_axis_is_x(r) && !wall_vertical && my > c.cy) return high_end(id);
    return id;
  };

  for (std::size_t di = 0; di < plan.doors.size(); ++di) {
    const Door& door = plan.doors[di];
    const Segment opening = plan.door_opening(door);
    if (door.is_exit()) {
      const int room = plan.room_index(door.exit_room());
      const bool stair = plan.rooms[static_cast<std::size_t>(room)].kind == RoomKind::Stair;
      grid.adjacency.push_back({door_endpoint(room, opening), kSafeNode, door.width_m,
                                stair ? PassageKind::Stair : PassageKind::Door,
                                static_cast<int>(di)});
    } else {
      const int ra = plan.room_index(door.from);
      const int rb = plan.room_index(door.to);
      const bool stair = plan.rooms[static_cast<std::size_t>(ra)].kind == RoomKind::Stair ||
                         plan.rooms[static_cast<std::size_t>(rb)].kind == RoomKind::Stair;
      grid.adjacency.push_back({door_endpoint(ra, opening), door_endpoint(rb, opening),
                                door.width_m, stair ? PassageKind::Stair : PassageKind::Door,
                                static_cast<int>(di)});
    }
  }

  // Every cell must reach the safe place; exits are one-way, other passages
  // two-way, so search backwards from node 0.
  const int n = grid.node_count();
  std::vector<std::vector<int>> into(static_cast<std::size_t>(n));
  for (const auto& adj : grid.adjacency) {
    into[static_cast<std::size_t>(adj.b)].push_back(adj.a);
    if (adj.b != kSafeNode) into[static_cast<std::size_t>(adj.a)].push_back(adj.b);
  }
  std::vector<bool> seen(static_cast<std::size_t>(n), false);
  std::deque<int> queue{kSafeNode};
  seen[0] = true;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : into[static_cast<std::size_t>(v)]) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = true;
        queue.push_back(u);
      }
    }
  }
  for (int v = 1; v < n; ++v) {
    if (!seen[static_cast<std::size_t>(v)]) {
      const Cell& c = grid.cell(v);
      throw DisconnectedPlan("cell " + std::to_string(v) + " of room '" +
                             plan.rooms[static_cast<std::size_t>(c.room)].id +
                             "' has no path to EXIT");
    }
  }
  return grid;
}

std::vector<std::vector<int>> StaticNetwork::out_arcs() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(node_count));
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    out[static_cast<std::size_t>(arcs[k].from)].push_back(static_cast<int>(k));
  }
  return out;
}

std::vector<std::vector<int>> StaticNetwork::in_arcs() const {
  std::vector<std::vector<int>> in(static_cast<std::size_t>(node_count));
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    in[static_cast<std::size_t>(arcs[k].to)].push_back(static_cast<int>(k));
  }
  return in;
}

int StaticNetwork::find_arc(int from, int to) const {
  for (std::size_t k = 0; k < arcs.size(); ++k) {
    if (arcs[k].from == from && arcs[k].to == to) return static_cast<int>(k);
  }
  return -1;
}

int StaticNetwork::exit_capacity() const {
  int total = 0;
  for (const auto& arc : arcs) {
    if (arc.to == kSafeNode) total += arc.capacity;
  }
  return total;
}

StaticNetwork build_static_network(const CellGrid& grid, const NetworkParams& params) {
  StaticNetwork net;
  const double a = grid.cell_size;
  net.cell_size = a;
  net.slot_seconds = slot_duration(a, params.velocity);
  net.node_count = grid.node_count();
  net.node_capacity.assign(static_cast<std::size_t>(net.node_count), 0);
  net.node_room.assign(static_cast<std::size_t>(net.node_count), -1);
  net.dummy.assign(static_cast<std::size_t>(net.node_count), false);
  net.node_capacity[0] = kUnbounded;
  const int cell_cap = static_cast<int>(std::floor(a * a * params.density_cap + kEps));
  for (const Cell& c : grid.cells) {
    net.node_capacity[static_cast<std::size_t>(c.id)] = cell_cap;
    net.node_room[static_cast<std::size_t>(c.id)] = c.room;
    net.dummy[static_cast<std::size_t>(c.id)] = c.dummy;
  }

  // Parallel doors between the same cell pair merge into one passage whose
  // capacity is the sum of the per-door capacities.
  std::map<std::pair<int, int>, int> passage_of;
  for (const auto& adj : grid.adjacency) {
    const double rate = adj.kind == PassageKind::Stair ? params.stair_rate : params.door_rate;
    const int cap = door_slot_capacity(adj.width_m, rate, net.slot_seconds);
    if (cap == 0) {
      net.warnings.push_back("passage " + std::to_string(adj.a) + "-" + std::to_string(adj.b) +
                             " floors to zero persons per slot");
    }
    const std::pair<int, int> key = adj.b == kSafeNode
                                        ? std::make_pair(adj.a, kSafeNode)
                                        : std::make_pair(std::min(adj.a, adj.b), std::max(adj.a, adj.b));
    auto it = passage_of.find(key);
    if (it != passage_of.end()) {
      Passage& p = net.passages[static_cast<std::size_t>(it->second)];
      p.capacity += cap;
      if (adj.kind == PassageKind::Door) p.kind = PassageKind::Door;
      continue;
    }
    passage_of.emplace(key, static_cast<int>(net.passages.size()));
    net.passages.push_back({adj.a, adj.b, cap, adj.kind});
  }
  for (std::size_t p = 0; p < net.passages.size(); ++p) {
    const Passage& pas = net.passages[p];
    net.arcs.push_back({pas.a, pas.b, pas.capacity, static_cast<int>(p)});
    if (pas.b != kSafeNode) net.arcs.push_back({pas.b, pas.a, pas.capacity, static_cast<int>(p)});
  }
  return net;
}

StaticNetwork make_network(int node_count, std::vector<int> node_capacity,
                           const std::vector<Arc>& arcs, double slot_seconds) {
  StaticNetwork net;
  net.node_count = node_count;
  net.node_capacity = std::move(node_capacity);
  net.node_capacity[0] = kUnbounded;
  net.slot_seconds = slot_seconds;
  net.cell_size = slot_seconds;
  net.node_room.assign(static_cast<std::size_t>(node_count), -1);
  net.dummy.assign(static_cast<std::size_t>(node_count), false);
  std::map<std::pair<int, int>, int> passage_of;
  for (Arc arc : arcs) {
    const auto key = std::minmax(arc.from, arc.to);
    auto it = passage_of.find(key);
    if (it == passage_of.end()) {
      it = passage_of.emplace(key, static_cast<int>(net.passages.size())).first;
      net.passages.push_back({arc.from, arc.to, arc.capacity, PassageKind::Open});
    }
    arc.passage = it->second;
    arc.capacity = net.passages[static_cast<std::size_t>(it->second)].capacity;
    net.arcs.push_back(arc);
  }
  return net;
}

std::size_t TimeExpandedNetwork::transition_count() const {
  std::size_t total = 0;
  for (const auto& slot : live) total += static_cast<std::size_t>(std::count(slot.begin(), slot.end(), 1));
  return total;
}

std::vector<int> TimeExpandedNetwork::live_arcs(int t) const {
  std::vector<int> out;
  const auto& slot = live.at(static_cast<std::size_t>(t));
  for (std::size_t k = 0; k < slot.size(); ++k) {
    if (slot[k]) out.push_back(static_cast<int>(k));
  }
  return out;
}

void validate_risk(const StaticNetwork& net, const RiskSchedule& risk) {
  auto valid_node = [&](int v) { return v >= 0 && v < net.node_count; };
  for (const auto& r : risk.static_removals) {
    if (r.slot < 0) throw ConfigError("risk removal with negative slot");
    if (!valid_node(r.from) || !valid_node(r.to)) {
      throw ConfigError("risk removal references an unknown node");
    }
  }
  if (risk.propagation) {
    if (risk.propagation->period < 1) throw ConfigError("risk spread period must be >= 1");
    for (int s : risk.propagation->seeds) {
      if (s <= 0 || s >= net.node_count) throw ConfigError("risk seed is not a cell");
    }
  }
}

TimeExpandedNetwork time_expand(const StaticNetwork& net, int tau, const RiskSchedule& risk,
                                int offset) {
  if (tau < 0) throw ConfigError("horizon must be non-negative");
  validate_risk(net, risk);
  TimeExpandedNetwork ten;
  ten.horizon = tau;
  ten.offset = offset;
  ten.live.assign(static_cast<std::size_t>(tau), std::vector<char>(net.arcs.size(), 1));
  if (risk.empty()) return ten;

  // Hop distance of every cell from the seed set (undirected, safe place
  // excluded); cell v is risky from slot dist(v) * period onwards.
  std::vector<int> risky_from(static_cast<std::size_t>(net.node_count), -1);
  if (risk.propagation) {
    std::vector<std::vector<int>> nbr(static_cast<std::size_t>(net.node_count));
    for (const auto& arc : net.arcs) {
      if (arc.from == kSafeNode || arc.to == kSafeNode) continue;
      nbr[static_cast<std::size_t>(arc.from)].push_back(arc.to);
    }
    std::deque<int> queue;
    for (int s : risk.propagation->seeds) {
      if (risky_from[static_cast<std::size_t>(s)] < 0) {
        risky_from[static_cast<std::size_t>(s)] = 0;
        queue.push_back(s);
      }
    }
    while (!queue.empty()) {
      const int v = queue.front();
      queue.pop_front();
      for (int u : nbr[static_cast<std::size_t>(v)]) {
        if (risky_from[static_cast<std::size_t>(u)] < 0) {
          risky_from[static_cast<std::size_t>(u)] =
              risky_from[static_cast<std::size_t>(v)] + risk.propagation->period;
          queue.push_back(u);
        }
      }
    }
  }

  for (int t = 0; t < tau; ++t) {
    const int abs_t = t + offset;
    auto& slot = ten.live[static_cast<std::size_t>(t)];
    for (std::size_t k = 0; k < net.arcs.size(); ++k) {
      const Arc& arc = net.arcs[k];
      for (const auto& r : risk.static_removals) {
        if (r.slot > abs_t) continue;
        const bool same = arc.from == r.from && arc.to == r.to;
        const bool reverse = r.both_directions && arc.from == r.to && arc.to == r.from;
        if (same || reverse) slot[k] = 0;
      }
      for (int end : {arc.from, arc.to}) {
        const int rf = risky_from[static_cast<std::size_t>(end)];
        if (rf >= 0 && rf <= abs_t) slot[k] = 0;
      }
    }
  }
  return ten;
}

std::vector<int> plan_occupancy(const BuildingPlan& plan, const CellGrid& grid,
                                const StaticNetwork& net) {
  std::vector<int> initial(static_cast<std::size_t>(net.node_count), 0);
  for (std::size_t r = 0; r < plan.rooms.size(); ++r) {
    const int people = plan.occupants_of(plan.rooms[r].id);
    const auto& ids = grid.room_cells[r];
    if (people == 0) continue;
    if (ids.empty()) {
      throw ConfigError("room '" + plan.rooms[r].id + "' has occupants but no cells");
    }
    const int n = static_cast<int>(ids.size());
    for (int k = 0; k < n; ++k) {
      const int share = people / n + (k < people % n ? 1 : 0);
      const int id = ids[static_cast<std::size_t>(k)];
      if (share > net.node_capacity[static_cast<std::size_t>(id)]) {
        throw ConfigError("room '" + plan.rooms[r].id + "' holds " + std::to_string(people) +
                          " persons, more than its cells admit");
      }
      initial[static_cast<std::size_t>(id)] = share;
    }
  }
  return initial;
}

std::vector<int> spread_occupancy(const CellGrid& grid, const StaticNetwork& net, int total,
                                  std::optional<std::uint64_t> seed) {
  if (total < 0) throw ConfigError("occupancy total must be non-negative");
  std::vector<int> cells;
  for (const auto& ids : grid.room_cells) cells.insert(cells.end(), ids.begin(), ids.end());
  std::sort(cells.begin(), cells.end());
  long room = 0;
  for (int id : cells) room += net.node_capacity[static_cast<std::size_t>(id)];
  if (total > room) {
    throw ConfigError(std::to_string(total) + " persons exceed the building capacity of " +
                      std::to_string(room));
  }
  std::vector<int> initial(static_cast<std::size_t>(net.node_count), 0);
  if (cells.empty()) return initial;
  if (seed) {
    std::mt19937_64 rng(*seed);
    std::vector<int> open = cells;
    for (int p = 0; p < total; ++p) {
      std::uniform_int_distribution<std::size_t> pick(0, open.size() - 1);
      const std::size_t k = pick(rng);
      const int id = open[k];
      if (++initial[static_cast<std::size_t>(id)] == net.node_capacity[static_cast<std::size_t>(id)]) {
        open.erase(open.begin() + static_cast<std::ptrdiff_t>(k));
      }
    }
    return initial;
  }
  // Even rounds over the cells that still have room.
  int left = total;
  while (left > 0) {
    std::vector<int> open;
    for (int id : cells) {
      if (initial[static_cast<std::size_t>(id)] < net.node_capacity[static_cast<std::size_t>(id)]) {
        open.push_back(id);
      }
    }
    const int n = static_cast<int>(open.size());
    const int round = left / n;
    for (int k = 0; k < n && left > 0; ++k) {
      const int id = open[static_cast<std::size_t>(k)];
      const int room_left = net.node_capacity[static_cast<std::size_t>(id)] - initial[static_cast<std::size_t>(id)];
      const int add = std::min(room_left, std::max(round, 1));
      initial[static_cast<std::size_t>(id)] += add;
      left -= add;
    }
  }
  return initial;
}

}  // namespace evacnet
