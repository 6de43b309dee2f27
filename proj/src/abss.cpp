#include "evacnet/abss.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numbers>
#include <numeric>
#include <random>
#include <tuple>
#include <limits>

#include "evacnet/errors.hpp"

namespace evacnet {

namespace {

constexpr double kEps = 1e-9;
constexpr double kLanding = 0.05;  // extra clearance past the margin after a crossing
constexpr double kBucket = 0.5;    // spatial hash cell, >= separation
constexpr int kPatience = 5;
constexpr double kDoorway = 1.0;  // m kept clear by waiting group members       // blocked ticks before wider sidesteps

std::size_t idx(int v) { return static_cast<std::size_t>(v); }

struct Point {
  double x = 0.0, y = 0.0;
};

double dist2(double ax, double ay, double bx, double by) {
  return (ax - bx) * (ax - bx) + (ay - by) * (ay - by);
}

// Door opening the point stands on, or -1.
int door_line_at(const SimWorld& w, int room, double x, double y) {
  for (const auto& o : w.openings[idx(room)]) {
    const double across = o.vertical ? x : y;
    const double along = o.vertical ? y : x;
    if (std::abs(across - o.line) < kEps && along >= o.lo - kEps && along <= o.hi + kEps) {
      return o.door;
    }
  }
  return -1;
}

// Nearest allowed point: the room shrunk by the wall margin, or the strip in
// front of a door opening where the margin does not apply.
Point clamp_to_room(const SimWorld& w, int room, double x, double y) {
  const Room& r = w.plan.rooms[idx(room)];
  Point best{std::clamp(x, r.x_m + w.margin, r.x_m + r.width_m - w.margin),
             std::clamp(y, r.y_m + w.margin, r.y_m + r.depth_m - w.margin)};
  double best_d = dist2(x, y, best.x, best.y);
  for (const auto& o : w.openings[idx(room)]) {
    const double a0 = std::min(o.line, o.line + o.normal * w.margin);
    const double a1 = std::max(o.line, o.line + o.normal * w.margin);
    const Point p = o.vertical ? Point{std::clamp(x, a0, a1), std::clamp(y, o.lo, o.hi)}
                               : Point{std::clamp(x, o.lo, o.hi), std::clamp(y, a0, a1)};
    const double d = dist2(x, y, p.x, p.y);
    if (d < best_d) {
      best = p;
      best_d = d;
    }
  }
  return best;
}

// Whether the point lies within `reach` of a door opening of the room.
bool near_opening(const SimWorld& w, int room, double x, double y, double reach) {
  for (const auto& o : w.openings[idx(room)]) {
    const double along = std::clamp(o.vertical ? y : x, o.lo, o.hi);
    const Point p = o.vertical ? Point{o.line, along} : Point{along, o.line};
    if (dist2(x, y, p.x, p.y) <= reach * reach) return true;
  }
  return false;
}

bool connects(const SimWorld& w, int door, int ra, int rb) {
  if (door < 0) return false;
  const auto& [a, b] = w.door_rooms[idx(door)];
  return (a == ra && b == rb) || (a == rb && b == ra);
}

// Agents in different rooms are apart by a wall unless one stands in a door
// between the rooms.
bool visible(const SimWorld& w, int room_a, int door_a, int room_b, int door_b) {
  return room_a == room_b || connects(w, door_a, room_a, room_b) ||
         connects(w, door_b, room_a, room_b);
}

}  // namespace

AgentIndex::AgentIndex(const BuildingPlan& plan) {
  min_x_ = min_y_ = std::numeric_limits<double>::max();
  double max_x = std::numeric_limits<double>::lowest(), max_y = max_x;
  for (const Room& r : plan.rooms) {
    min_x_ = std::min(min_x_, r.x_m);
    min_y_ = std::min(min_y_, r.y_m);
    max_x = std::max(max_x, r.x_m + r.width_m);
    max_y = std::max(max_y, r.y_m + r.depth_m);
  }
  nx_ = static_cast<int>(std::ceil((max_x - min_x_) / kBucket)) + 1;
  ny_ = static_cast<int>(std::ceil((max_y - min_y_) / kBucket)) + 1;
  buckets_.assign(idx(nx_ * ny_), {});
}

int AgentIndex::bucket_x(double x) const {
  return std::clamp(static_cast<int>(std::floor((x - min_x_) / kBucket)), 0, nx_ - 1);
}
int AgentIndex::bucket_y(double y) const {
  return std::clamp(static_cast<int>(std::floor((y - min_y_) / kBucket)), 0, ny_ - 1);
}

void AgentIndex::insert(int id, double x, double y) {
  buckets_[idx(bucket_y(y) * nx_ + bucket_x(x))].push_back(id);
}

void AgentIndex::erase(int id, double x, double y) {
  auto& b = buckets_[idx(bucket_y(y) * nx_ + bucket_x(x))];
  b.erase(std::find(b.begin(), b.end(), id));
}

void AgentIndex::move(int id, double x0, double y0, double x1, double y1) {
  if (bucket_x(x0) == bucket_x(x1) && bucket_y(y0) == bucket_y(y1)) return;
  erase(id, x0, y0);
  insert(id, x1, y1);
}

std::string_view to_string(Guidance g) {
  return g == Guidance::Netflow ? "netflow" : "shortest_path";
}

void SimConfig::validate(double slot_seconds) const {
  if (!(tick > 0.0)) throw ConfigError("tick must be positive");
  if (tick > slot_seconds / 10.0 + kEps) {
    throw ConfigError("tick must not exceed a tenth of the slot duration");
  }
  if (!(min_speed > 0.0) || min_speed > max_speed) throw ConfigError("invalid speed range");
  if (!(radius > 0.0) || wall_margin < 0.0) throw ConfigError("invalid radius or wall margin");
  if (min_group < 1 || min_group > max_group) throw ConfigError("invalid group size range");
  if (!(cohesion_radius > 0.0)) throw ConfigError("cohesion radius must be positive");
  if (!(time_cap > 0.0)) throw ConfigError("time cap must be positive");
}

int SimWorld::edge_between(int from, int to) const {
  for (int e : out[idx(from)]) {
    if (edges[idx(e)].to == to) return e;
  }
  return -1;
}

std::shared_ptr<const SimWorld> make_world(const BuildingPlan& plan, const SimConfig& cfg) {
  auto w = std::make_shared<SimWorld>();
  w->plan = plan;
  w->margin = cfg.wall_margin;
  w->grid = build_grid(plan, cfg.cell_size);
  w->net = build_static_network(w->grid, cfg.params);
  w->slot_seconds = w->net.slot_seconds;
  cfg.validate(w->slot_seconds);

  const int V = w->net.node_count;
  w->base.resize(idx(V));
  std::iota(w->base.begin(), w->base.end(), 0);
  for (int id = 1; id < V; ++id) {
    const int d = w->grid.dummy_of[idx(id)];
    if (d >= 0) w->base[idx(d)] = id;
  }

  w->out.assign(idx(V), {});
  std::map<std::pair<int, int>, int> by_pair;
  auto add_edge = [&](int a, int b, int door) {
    auto [it, fresh] = by_pair.try_emplace({a, b}, static_cast<int>(w->edges.size()));
    if (fresh) {
      w->edges.push_back({a, b, {}});
      w->out[idx(a)].push_back(it->second);
    }
    auto& doors = w->edges[idx(it->second)].doors;
    if (door >= 0 && std::find(doors.begin(), doors.end(), door) == doors.end()) {
      doors.push_back(door);
    }
  };
  for (const Adjacency& adj : w->grid.adjacency) {
    const int a = w->base[idx(adj.a)];
    const int b = w->base[idx(adj.b)];
    if (a == b) continue;
    add_edge(a, b, adj.door);
    if (b != kSafeNode) add_edge(b, a, adj.door);
  }
  for (auto& list : w->out) {
    std::sort(list.begin(), list.end(),
              [&](int x, int y) { return w->edges[idx(x)].to < w->edges[idx(y)].to; });
  }

  // Hop distances over the folded graph; stair twins never appear as cells.
  w->dist.assign(idx(V), -1);
  std::vector<std::vector<int>> in(idx(V));
  for (const auto& e : w->edges) in[idx(e.to)].push_back(e.from);
  std::deque<int> queue{kSafeNode};
  w->dist[0] = 0;
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : in[idx(v)]) {
      if (w->dist[idx(u)] < 0) {
        w->dist[idx(u)] = w->dist[idx(v)] + 1;
        queue.push_back(u);
      }
    }
  }
  w->next_hop.assign(idx(V), -1);
  for (int c = 1; c < V; ++c) {
    if (w->dist[idx(c)] <= 0) continue;
    for (int e : w->out[idx(c)]) {
      const int to = w->edges[idx(e)].to;
      if (w->dist[idx(to)] == w->dist[idx(c)] - 1) {
        w->next_hop[idx(c)] = to;
        break;  // out lists are sorted by destination id
      }
    }
  }

  w->openings.assign(plan.rooms.size(), {});
  for (std::size_t d = 0; d < plan.doors.size(); ++d) {
    const Door& door = plan.doors[d];
    const Segment s = plan.door_opening(door);
    const bool vertical = std::abs(s.x0 - s.x1) < kEps;
    const double line = vertical ? s.x0 : s.y0;
    double lo = (vertical ? std::min(s.y0, s.y1) : std::min(s.x0, s.x1)) + w->margin;
    double hi = (vertical ? std::max(s.y0, s.y1) : std::max(s.x0, s.x1)) - w->margin;
    if (lo > hi) lo = hi = (lo + hi) / 2.0;
    int ra = -1, rb = -1;
    if (door.is_exit()) {
      ra = plan.room_index(door.exit_room());
    } else {
      ra = plan.room_index(door.from);
      rb = plan.room_index(door.to);
    }
    w->door_rooms.emplace_back(ra, rb);
    bool stair = false;
    for (int r : {ra, rb}) {
      if (r < 0) continue;
      const Room& room = plan.rooms[idx(r)];
      stair = stair || room.kind == RoomKind::Stair;
      const double start = vertical ? room.x_m : room.y_m;
      w->openings[idx(r)].push_back(
          {static_cast<int>(d), vertical, line, lo, hi, std::abs(start - line) < kEps ? 1.0 : -1.0});
    }
    const double rate = stair ? cfg.params.stair_rate : cfg.params.door_rate;
    w->door_budget.push_back(door_slot_capacity(door.width_m, rate, w->slot_seconds));
  }
  return w;
}

Population init_agents(const SimWorld& world, int n, const SimConfig& cfg) {
  if (n < 0) throw ConfigError("agent count must be non-negative");
  Population pop;
  std::mt19937_64 rng(cfg.seed);
  const auto& rooms = world.plan.rooms;
  std::vector<double> weights;
  for (const Room& r : rooms) {
    weights.push_back(std::max(0.0, r.width_m - 2 * world.margin) *
                      std::max(0.0, r.depth_m - 2 * world.margin));
  }
  if (n > 0 && std::accumulate(weights.begin(), weights.end(), 0.0) <= 0.0) {
    throw Overcrowded("no room has space for agents");
  }
  std::discrete_distribution<int> pick_room(weights.begin(), weights.end());
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::uniform_real_distribution<double> speed(cfg.min_speed, cfg.max_speed);
  std::vector<int> occupancy(idx(world.net.node_count), 0);
  AgentIndex hash(world.plan);
  const double sep2 = 4 * cfg.radius * cfg.radius;
  constexpr int kAttempts = 20000;

  for (int id = 0; id < n; ++id) {
    bool placed = false;
    for (int attempt = 0; attempt < kAttempts && !placed; ++attempt) {
      const int r = pick_room(rng);
      const Room& room = rooms[idx(r)];
      const double x = room.x_m + world.margin + unit(rng) * (room.width_m - 2 * world.margin);
      const double y = room.y_m + world.margin + unit(rng) * (room.depth_m - 2 * world.margin);
      const int cell = world.grid.cell_at(r, x, y);
      if (occupancy[idx(cell)] >= world.net.node_capacity[idx(cell)]) continue;
      bool clear = true;
      hash.around(x, y, [&](int other) {
        const Agent& o = pop.agents[idx(other)];
        if (o.room == r && dist2(x, y, o.x, o.y) < sep2) clear = false;
      });
      if (!clear) continue;
      Agent a;
      a.id = id;
      a.x = x;
      a.y = y;
      a.room = r;
      a.cell = cell;
      a.radius = cfg.radius;
      pop.agents.push_back(a);
      hash.insert(id, x, y);
      ++occupancy[idx(cell)];
      placed = true;
    }
    if (!placed) {
      throw Overcrowded("could not place agent " + std::to_string(id + 1) + " of " +
                        std::to_string(n));
    }
  }
  // Speeds are drawn after placement so that they do not shift positions.
  for (Agent& a : pop.agents) a.speed = speed(rng);

  if (cfg.grouping && n > 0) {
    // Each group starts from a random free agent and takes its nearest free
    // neighbours, same room first, so that groups begin together and only
    // the last group can fall short of the minimum size.
    std::vector<int> order(idx(n));
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::uniform_int_distribution<int> size(cfg.min_group, cfg.max_group);
    std::vector<char> taken(idx(n), 0);
    for (int leader : order) {
      if (taken[idx(leader)]) continue;
      const Agent& l = pop.agents[idx(leader)];
      std::vector<std::tuple<bool, double, int>> near;
      for (const Agent& a : pop.agents) {
        if (taken[idx(a.id)]) continue;
        near.emplace_back(a.room != l.room, dist2(a.x, a.y, l.x, l.y), a.id);
      }
      std::sort(near.begin(), near.end());
      const std::size_t k = std::min<std::size_t>(idx(size(rng)), near.size());
      if (k < 2) break;  // a lone remainder walks on its own
      Group g;
      g.cohesion_radius = cfg.cohesion_radius;
      for (std::size_t i = 0; i < k; ++i) {
        const int m = std::get<2>(near[i]);
        g.members.push_back(m);
        taken[idx(m)] = 1;
      }
      std::sort(g.members.begin(), g.members.end());
      for (int m : g.members) pop.agents[idx(m)].group = static_cast<int>(pop.groups.size());
      pop.groups.push_back(std::move(g));
    }
  }
  return pop;
}

Population init_agents(const BuildingPlan& plan, int n, const SimConfig& cfg) {
  return init_agents(*make_world(plan, cfg), n, cfg);
}

// --- guidance ----------------------------------------------------------------

void FlowGuide::record(int edge, int at_slot) {
  ++used_total[idx(edge)];
  if (at_slot >= 0 && at_slot < static_cast<int>(used.size())) ++used[idx(at_slot)][idx(edge)];
}

double FlowGuide::remaining_now(int edge) const {
  if (slot < 0 || slot >= static_cast<int>(recommended.size())) return 0.0;
  return recommended[idx(slot)][idx(edge)] - used[idx(slot)][idx(edge)];
}

double FlowGuide::remaining_total(int edge) const {
  return recommended_total[idx(edge)] - used_total[idx(edge)];
}

FlowGuide make_flow_guide(const SimWorld& world, const std::vector<Agent>& agents) {
  EvacuationProblem prob;
  prob.network = world.net;
  prob.initial.assign(idx(world.net.node_count), 0);
  for (const Agent& a : agents) {
    if (a.state != AgentState::Evacuated) ++prob.initial[idx(a.cell)];
  }
  FlowGuide guide;
  guide.recommended_total.assign(world.edges.size(), 0.0);
  guide.used_total.assign(world.edges.size(), 0);
  if (prob.total() == 0) return guide;

  const int tau = min_evac_time(prob).tau;
  // Re-solve at the optimal horizon with a small pull towards the exits so
  // that the recommended flows carry no idle detours.
  MfpModel model = build_mfp(prob, tau);
  const auto dist = distance_to_exit(world.net);
  const int far = std::max(1, *std::max_element(dist.begin(), dist.end()));
  const double eps = 1.0 / (static_cast<double>(tau) * prob.total() * far + 1.0);
  add_potential(model, dist, eps);
  // Swaps and cycles leave occupancies unchanged, so the potential alone does
  // not rule them out; a movement cost below one hop's gain does.
  for (const auto& row : model.x) {
    for (int v : row) {
      if (v >= 0) model.lp.add_objective(v, -eps / 10);
    }
  }
  const lp::LPSolution sol = lp::solve_lp(model.lp);
  if (sol.status != lp::Status::Optimal) throw SolverError("guidance plan did not solve");
  const FlowSolution flows = decode(model, prob, sol.values);

  guide.recommended.assign(idx(tau), std::vector<double>(world.edges.size(), 0.0));
  guide.used.assign(idx(tau), std::vector<int>(world.edges.size(), 0));
  for (int t = 0; t < tau; ++t) {
    for (std::size_t k = 0; k < world.net.arcs.size(); ++k) {
      const Arc& arc = world.net.arcs[k];
      const int e = world.edge_between(world.base[idx(arc.from)], world.base[idx(arc.to)]);
      if (e < 0) continue;
      const double v = flows.x[idx(t)][k];
      guide.recommended[idx(t)][idx(e)] += v;
      guide.recommended_total[idx(e)] += v;
    }
  }
  return guide;
}

std::vector<int> plan_route(const Agent& agent, Guidance guidance, const SimWorld& world,
                            const FlowGuide* guide) {
  int at = agent.cell;
  if (world.dist[idx(at)] < 0) {
    throw NoRoute("agent " + std::to_string(agent.id) + " in cell " + std::to_string(at) +
                  " has no way out");
  }
  std::vector<int> route;
  std::vector<char> seen(idx(world.net.node_count), 0);
  seen[idx(at)] = 1;
  bool shortest = guidance == Guidance::ShortestPath || guide == nullptr;
  while (at != kSafeNode) {
    int next = -1;
    if (!shortest) {
      for (auto remaining : {&FlowGuide::remaining_now, &FlowGuide::remaining_total}) {
        double best = 1e-9;
        for (int e : world.out[idx(at)]) {
          const int to = world.edges[idx(e)].to;
          const double r = (guide->*remaining)(e);
          if (r > best && world.dist[idx(to)] >= 0) {
            best = r;
            next = to;
          }
        }
        if (next >= 0) break;
      }
      // Only the first hop may use this slot's flows; later hops lie in
      // later slots, so they go by the rest of the plan.
      if (next >= 0 && seen[idx(next)]) next = -1;
      if (next < 0) shortest = true;
    }
    if (next < 0) next = world.next_hop[idx(at)];
    route.push_back(next);
    seen[idx(next)] = 1;
    at = next;
  }
  return route;
}

// --- simulation --------------------------------------------------------------

SimState make_state(std::shared_ptr<const SimWorld> world, Population population,
                    const SimConfig& cfg) {
  SimState s;
  s.world = std::move(world);
  s.agents = std::move(population.agents);
  s.groups = std::move(population.groups);
  s.occupancy.assign(idx(s.world->net.node_count), 0);
  s.budget.assign(s.world->plan.doors.size(), 0);
  s.crossings.assign(s.world->plan.doors.size(), 0);
  s.index = AgentIndex(s.world->plan);
  for (Agent& a : s.agents) {
    a.radius = cfg.radius;
    if (a.state == AgentState::Evacuated) {
      ++s.evacuated;
      continue;
    }
    ++s.occupancy[idx(a.cell)];
    s.index.insert(a.id, a.x, a.y);
  }
  if (cfg.guidance == Guidance::Netflow) s.guide = make_flow_guide(*s.world, s.agents);
  return s;
}

namespace {

void reroute(SimState& s, Agent& a, const SimConfig& cfg) {
  a.route = plan_route(a, cfg.guidance, *s.world, s.guide ? &*s.guide : nullptr);
}

// Target of the agent's next hop: the next cell's center on open floor, or
// the nearest usable point of the nearest door opening.
Point hop_target(const SimWorld& w, const Agent& a, int& door) {
  door = -1;
  const int next = a.route.front();
  const int e = w.edge_between(a.cell, next);
  if (e >= 0 && !w.edges[idx(e)].doors.empty()) {
    double best = std::numeric_limits<double>::max();
    Point target;
    for (int d : w.edges[idx(e)].doors) {
      for (const auto& o : w.openings[idx(a.room)]) {
        if (o.door != d) continue;
        const double along = std::clamp(o.vertical ? a.y : a.x, o.lo, o.hi);
        const Point p = o.vertical ? Point{o.line, along} : Point{along, o.line};
        const double d2 = dist2(a.x, a.y, p.x, p.y);
        if (d2 < best) {
          best = d2;
          target = p;
          door = d;
        }
      }
    }
    if (door >= 0) return target;
  }
  const Cell& c = w.grid.cell(next);
  return {c.cx, c.cy};
}

bool blocked(const SimState& s, const Agent& a, double x, double y, int room,
             int line_door, double sep) {
  bool hit = false;
  s.index.around(x, y, [&](int other) {
    if (hit || other == a.id) return;
    const Agent& o = s.agents[idx(other)];
    if (dist2(x, y, o.x, o.y) >= sep * sep - kEps) return;
    if (visible(*s.world, room, line_door, o.room, o.door)) hit = true;
  });
  return hit;
}

void start_slot(SimState& s, const SimConfig& cfg) {
  const SimWorld& w = *s.world;
  s.budget = w.door_budget;
  std::fill(s.crossings.begin(), s.crossings.end(), 0);
  if (s.guide) {
    // Agents lag behind the plan; once it runs out, plan afresh from where
    // they stand instead of chasing its leftovers.
    if (s.slot - s.guide->origin >= static_cast<int>(s.guide->recommended.size())) {
      s.guide = make_flow_guide(w, s.agents);
      s.guide->origin = s.slot;
    }
    s.guide->slot = s.slot - s.guide->origin;
  }
  for (Agent& a : s.agents) {
    if (a.state != AgentState::Evacuated) reroute(s, a, cfg);
  }
}

}  // namespace

void step(SimState& s, const SimConfig& cfg) {
  const SimWorld& w = *s.world;
  const double now = s.time(cfg);
  const int slot = static_cast<int>(std::floor(now / w.slot_seconds + kEps));
  if (slot != s.slot) {
    s.slot = slot;
    start_slot(s, cfg);
  }
  const double sep = 2 * cfg.radius;

  // Group state is frozen at the start of the tick.
  std::vector<double> group_speed(s.groups.size(), 0.0);
  std::vector<Point> centroid(s.groups.size());
  std::vector<int> group_far(s.groups.size(), -1);
  std::vector<int> alive(s.groups.size(), 0);
  for (std::size_t g = 0; g < s.groups.size(); ++g) {
    double slowest = std::numeric_limits<double>::max();
    for (int m : s.groups[g].members) {
      const Agent& a = s.agents[idx(m)];
      if (a.state == AgentState::Evacuated) continue;
      ++alive[g];
      slowest = std::min(slowest, a.speed);
      centroid[g].x += a.x;
      centroid[g].y += a.y;
      group_far[g] = std::max(group_far[g], w.dist[idx(a.cell)]);
    }
    // A blocked straggler releases the others rather than holding them in its way.
    for (int m : s.groups[g].members) {
      const Agent& a = s.agents[idx(m)];
      if (a.state != AgentState::Evacuated && w.dist[idx(a.cell)] == group_far[g] &&
          a.stuck >= kPatience) {
        group_far[g] = -1;
      }
    }
    if (alive[g] > 0) {
      centroid[g].x /= alive[g];
      centroid[g].y /= alive[g];
      group_speed[g] = slowest;
    }
  }
  auto waits = [&](const Agent& a) {
    if (a.group < 0 || alive[idx(a.group)] < 2) return false;
    const Group& g = s.groups[idx(a.group)];
    const Point c = centroid[idx(a.group)];
    const bool apart = dist2(a.x, a.y, c.x, c.y) > g.cohesion_radius * g.cohesion_radius;
    // Only members ahead of the stragglers stop, and never in a doorway where
    // they would hold the stragglers up.
    return apart && w.dist[idx(a.cell)] < group_far[idx(a.group)] &&
           !near_opening(w, a.room, a.x, a.y, kDoorway);
  };
  std::vector<char> waiting(s.agents.size(), 0);

  // Agents nearer the exit move first so that the front of a crowd clears
  // space for those behind.
  std::vector<std::pair<double, int>> order;
  for (Agent& a : s.agents) {
    if (a.state == AgentState::Evacuated) continue;
    if (a.route.empty()) reroute(s, a, cfg);
    int door = -1;
    const Point target = hop_target(w, a, door);
    order.emplace_back(w.dist[idx(a.cell)] * 1e6 + std::hypot(target.x - a.x, target.y - a.y),
                       a.id);
  }
  std::sort(order.begin(), order.end());

  for (const auto& [key, id] : order) {
    Agent& a = s.agents[idx(id)];
    if (waits(a)) {
      waiting[idx(a.id)] = 1;
      continue;
    }
    int door = -1;
    const Point target = hop_target(w, a, door);
    if (a.door >= 0 && a.door != door) {
      a.door = -1;
      a.door_arrival = -1;
    }
    const double dx = target.x - a.x, dy = target.y - a.y;
    const double d = std::hypot(dx, dy);
    if (door >= 0 && d < kEps) {
      if (a.door_arrival < 0) {
        a.door = door;
        a.door_arrival = s.ticks;
      }
      continue;
    }
    double v = a.group >= 0 ? group_speed[idx(a.group)] : a.speed;
    if (w.plan.rooms[idx(a.room)].kind == RoomKind::Stair) v /= 2.0;
    const double len = std::min(v * cfg.tick, d);
    const double heading = std::atan2(dy, dx);
    constexpr double pi = std::numbers::pi;
    static const double kTurns[] = {0.0,    pi / 6,      -pi / 6,      pi / 3,      -pi / 3,
                                    pi / 2, -pi / 2,     2 * pi / 3,   -2 * pi / 3, 5 * pi / 6,
                                    -5 * pi / 6};
    // A blocked agent widens its search to sidesteps and short retreats.
    const std::size_t turns = a.stuck < kPatience ? 7 : std::size(kTurns);
    bool moved = false;
    for (std::size_t c = 0; c < 2 * turns && !moved; ++c) {
      const double turn = kTurns[c % turns];
      const double l = c < turns ? len : len / 2;
      Point p;
      if (turn == 0.0 && l >= d - kEps) {
        p = target;
      } else {
        p = clamp_to_room(w, a.room, a.x + l * std::cos(heading + turn),
                          a.y + l * std::sin(heading + turn));
      }
      if (std::abs(p.x - a.x) < kEps && std::abs(p.y - a.y) < kEps) continue;
      const int line = door_line_at(w, a.room, p.x, p.y);
      if (blocked(s, a, p.x, p.y, a.room, line, sep)) continue;
      const int cell = w.grid.cell_at(a.room, p.x, p.y);
      if (cell != a.cell && s.occupancy[idx(cell)] >= w.net.node_capacity[idx(cell)]) continue;
      s.index.move(a.id, a.x, a.y, p.x, p.y);
      a.x = p.x;
      a.y = p.y;
      a.state = AgentState::Moving;
      a.door = line;
      if (cell != a.cell) {
        --s.occupancy[idx(a.cell)];
        ++s.occupancy[idx(cell)];
        const int e = w.edge_between(a.cell, cell);
        if (s.guide && e >= 0) s.guide->record(e, s.guide->slot);
        a.cell = cell;
        if (!a.route.empty() && a.route.front() == cell) {
          a.route.erase(a.route.begin());
        } else {
          reroute(s, a, cfg);
        }
      }
      if (door >= 0 && std::abs(p.x - target.x) < kEps && std::abs(p.y - target.y) < kEps) {
        a.door = door;
        a.door_arrival = s.ticks;
      } else if (a.door != door) {
        a.door_arrival = -1;
      }
      moved = true;
    }
    a.stuck = moved ? 0 : a.stuck + 1;
  }

  // Door crossings, first come first served, within the slot's budget.
  const double end = now + cfg.tick;
  for (std::size_t d = 0; d < w.plan.doors.size(); ++d) {
    std::vector<int> queue;
    for (const Agent& a : s.agents) {
      if (a.state != AgentState::Evacuated && a.door == static_cast<int>(d) && a.door_arrival >= 0) {
        queue.push_back(a.id);
      }
    }
    std::sort(queue.begin(), queue.end(), [&](int x, int y) {
      const long ax = s.agents[idx(x)].door_arrival, ay = s.agents[idx(y)].door_arrival;
      return ax != ay ? ax < ay : x < y;
    });
    for (int id : queue) {
      if (s.budget[d] <= 0) break;
      if (waiting[idx(id)]) continue;
      Agent& a = s.agents[idx(id)];
      if (a.route.empty()) continue;
      const auto& [ra, rb] = w.door_rooms[d];
      const int to_room = a.room == ra ? rb : ra;
      const int from_cell = a.cell;
      const int next = a.route.front();
      if (to_room < 0) {
        s.index.erase(a.id, a.x, a.y);
        --s.occupancy[idx(a.cell)];
        a.state = AgentState::Evacuated;
        a.exit_time = end;
        a.exit_slot = s.slot;
        a.route.clear();
        a.door = -1;
        ++s.evacuated;
      } else {
        // Land just inside the next room, sliding along the opening if needed.
        const SimWorld::Opening* o = nullptr;
        for (const auto& cand : w.openings[idx(to_room)]) {
          if (cand.door == static_cast<int>(d)) o = &cand;
        }
        const double along0 = o->vertical ? a.y : a.x;
        const double depth = o->line + o->normal * (w.margin + kLanding);
        bool moved = false;
        for (int k = 0; k <= 40 && !moved; ++k) {
          const double shift = (k % 2 == 1 ? 1.0 : -1.0) * ((k + 1) / 2) * 0.1;
          const double along = along0 + shift;
          if (along < o->lo - kEps || along > o->hi + kEps) continue;
          const Point p = o->vertical ? Point{depth, along} : Point{along, depth};
          const int cell = w.grid.cell_at(to_room, p.x, p.y);
          if (s.occupancy[idx(cell)] >= w.net.node_capacity[idx(cell)]) continue;
          if (blocked(s, a, p.x, p.y, to_room, -1, sep)) continue;
          s.index.move(a.id, a.x, a.y, p.x, p.y);
          --s.occupancy[idx(a.cell)];
          ++s.occupancy[idx(cell)];
          a.x = p.x;
          a.y = p.y;
          a.room = to_room;
          a.cell = cell;
          a.door = -1;
          moved = true;
        }
        if (!moved) break;  // the head of the queue holds the others back
        if (!a.route.empty() && a.route.front() == a.cell) {
          a.route.erase(a.route.begin());
        } else {
          reroute(s, a, cfg);
        }
      }
      a.door_arrival = -1;
      if (s.guide) {
        const int e = w.edge_between(from_cell, next);
        if (e >= 0) s.guide->record(e, s.guide->slot);
      }
      --s.budget[d];
      ++s.crossings[d];
    }
  }
  ++s.ticks;
}

EvacuationTrace run(SimState state, const SimConfig& cfg) {
  EvacuationTrace trace;
  trace.seed = cfg.seed;
  trace.guidance = cfg.guidance;
  trace.grouping = cfg.grouping;
  trace.slot_seconds = state.world->slot_seconds;
  while (!state.done()) {
    if (state.time(cfg) > cfg.time_cap + kEps) {
      throw TimeCapExceeded(std::to_string(state.agents.size() - state.evacuated) +
                            " agents still inside after " + std::to_string(cfg.time_cap) + " s");
    }
    step(state, cfg);
  }
  for (const Agent& a : state.agents) {
    trace.exit_times.push_back(a.exit_time);
    trace.total_seconds = std::max(trace.total_seconds, a.exit_time);
    trace.total_slots = std::max(trace.total_slots, a.exit_slot + 1);
  }
  trace.evacuated.assign(idx(trace.total_slots), 0);
  for (const Agent& a : state.agents) ++trace.evacuated[idx(a.exit_slot)];
  std::partial_sum(trace.evacuated.begin(), trace.evacuated.end(), trace.evacuated.begin());
  return trace;
}

EvacuationTrace run(const BuildingPlan& plan, int n, const SimConfig& cfg) {
  auto world = make_world(plan, cfg);
  Population pop = init_agents(*world, n, cfg);
  return run(make_state(world, std::move(pop), cfg), cfg);
}

BuildingPlan double_door_variant(const BuildingPlan& plan, double gap) {
  validate_plan(plan);
  BuildingPlan variant = plan;
  variant.doors.clear();
  for (const Door& d : plan.doors) {
    if (d.is_exit()) {
      variant.doors.push_back(d);
      continue;
    }
    const double wall = plan.door_wall(d).length();
    const double off = plan.door_offset(d);
    Door first = d;
    first.position_m = off;
    Door twin = first;
    if (off + 2 * d.width_m + gap <= wall + kEps) {
      twin.position_m = off + d.width_m + gap;
    } else if (off - d.width_m - gap >= -kEps) {
      twin.position_m = std::max(0.0, off - d.width_m - gap);
    } else {
      throw WallTooShort("wall between '" + d.from + "' and '" + d.to + "' (" +
                         std::to_string(wall) + " m) has no room for a second door");
    }
    variant.doors.push_back(first);
    variant.doors.push_back(twin);
  }
  validate_plan(variant);
  return variant;
}

}  // namespace evacnet
