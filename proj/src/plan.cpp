#include "evacnet/plan.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "evacnet/errors.hpp"

namespace evacnet {

using nlohmann::json;

namespace {

constexpr double kGeomEps = 1e-9;

struct Rect {
  double x0, y0, x1, y1;
};

Rect rect_of(const Room& r) { return {r.x_m, r.y_m, r.x_m + r.width_m, r.y_m + r.depth_m}; }

bool near(double a, double b) { return std::abs(a - b) < 1e-7; }

std::optional<Segment> shared_boundary(const Room& a, const Room& b) {
  const Rect ra = rect_of(a);
  const Rect rb = rect_of(b);
  auto vertical = [](double x, double lo, double hi) -> std::optional<Segment> {
    if (hi - lo <= kGeomEps) return std::nullopt;
    return Segment{x, lo, x, hi};
  };
  auto horizontal = [](double y, double lo, double hi) -> std::optional<Segment> {
    if (hi - lo <= kGeomEps) return std::nullopt;
    return Segment{lo, y, hi, y};
  };
  const double ylo = std::max(ra.y0, rb.y0), yhi = std::min(ra.y1, rb.y1);
  const double xlo = std::max(ra.x0, rb.x0), xhi = std::min(ra.x1, rb.x1);
  if (near(ra.x1, rb.x0)) return vertical(ra.x1, ylo, yhi);
  if (near(rb.x1, ra.x0)) return vertical(ra.x0, ylo, yhi);
  if (near(ra.y1, rb.y0)) return horizontal(ra.y1, xlo, xhi);
  if (near(rb.y1, ra.y0)) return horizontal(ra.y0, xlo, xhi);
  return std::nullopt;
}

Segment room_wall(const Room& r, Side side) {
  const Rect rr = rect_of(r);
  switch (side) {
    case Side::South: return {rr.x0, rr.y0, rr.x1, rr.y0};
    case Side::North: return {rr.x0, rr.y1, rr.x1, rr.y1};
    case Side::West: return {rr.x0, rr.y0, rr.x0, rr.y1};
    case Side::East: return {rr.x1, rr.y0, rr.x1, rr.y1};
  }
  return {};
}

bool overlaps(const Room& a, const Room& b) {
  const Rect ra = rect_of(a);
  const Rect rb = rect_of(b);
  const double w = std::min(ra.x1, rb.x1) - std::max(ra.x0, rb.x0);
  const double h = std::min(ra.y1, rb.y1) - std::max(ra.y0, rb.y0);
  return w > 1e-7 && h > 1e-7;
}

RoomKind parse_kind(const std::string& s) {
  if (s == "flat") return RoomKind::Flat;
  if (s == "stair") return RoomKind::Stair;
  throw ParseError("unknown room kind '" + s + "'");
}

Side parse_side(const std::string& s) {
  if (s == "south") return Side::South;
  if (s == "north") return Side::North;
  if (s == "west") return Side::West;
  if (s == "east") return Side::East;
  throw ParseError("unknown wall side '" + s + "'");
}

void check_keys(const json& obj, std::initializer_list<std::string_view> allowed,
                std::string_view where) {
  if (!obj.is_object()) throw ParseError(std::string(where) + " must be an object");
  for (const auto& item : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ParseError("unexpected key '" + item.key() + "' in " + std::string(where));
    }
  }
}

template <typename T>
T required(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) {
    throw ParseError("missing key '" + std::string(key) + "' in " + std::string(where));
  }
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception&) {
    throw ParseError("key '" + std::string(key) + "' in " + std::string(where) +
                     " has the wrong type");
  }
}

double number(const json& obj, const char* key, std::string_view where) {
  if (!obj.contains(key)) {
    throw ParseError("missing key '" + std::string(key) + "' in " + std::string(where));
  }
  const json& v = obj.at(key);
  if (!v.is_number()) {
    throw ParseError("key '" + std::string(key) + "' in " + std::string(where) +
                     " must be a number");
  }
  return v.get<double>();
}

BuildingPlan from_json(const json& doc) {
  check_keys(doc, {"name", "rooms", "doors", "occupancy"}, "plan");
  BuildingPlan plan;
  plan.name = doc.contains("name") ? required<std::string>(doc, "name", "plan") : "";

  if (!doc.contains("rooms") || !doc["rooms"].is_array()) {
    throw ParseError("plan needs a 'rooms' array");
  }
  for (const auto& jr : doc["rooms"]) {
    check_keys(jr, {"id", "width_m", "depth_m", "kind", "x_m", "y_m"}, "room");
    Room r;
    r.id = required<std::string>(jr, "id", "room");
    r.width_m = number(jr, "width_m", "room");
    r.depth_m = number(jr, "depth_m", "room");
    r.kind = jr.contains("kind") ? parse_kind(required<std::string>(jr, "kind", "room"))
                                 : RoomKind::Flat;
    if (jr.contains("x_m")) r.x_m = number(jr, "x_m", "room");
    if (jr.contains("y_m")) r.y_m = number(jr, "y_m", "room");
    plan.rooms.push_back(std::move(r));
  }

  if (doc.contains("doors")) {
    if (!doc["doors"].is_array()) throw ParseError("'doors' must be an array");
    for (const auto& jd : doc["doors"]) {
      check_keys(jd, {"from", "to", "width_m", "position_m", "side"}, "door");
      Door d;
      d.from = required<std::string>(jd, "from", "door");
      d.to = required<std::string>(jd, "to", "door");
      d.width_m = number(jd, "width_m", "door");
      if (jd.contains("position_m")) d.position_m = number(jd, "position_m", "door");
      if (jd.contains("side")) d.side = parse_side(required<std::string>(jd, "side", "door"));
      plan.doors.push_back(std::move(d));
    }
  }

  if (doc.contains("occupancy")) {
    const json& jo = doc["occupancy"];
    if (!jo.is_object()) throw ParseError("'occupancy' must be an object");
    for (const auto& item : jo.items()) {
      if (!item.value().is_number_integer()) {
        throw ParseError("occupancy for '" + item.key() + "' must be an integer");
      }
      const int count = item.value().get<int>();
      if (item.key() == "uniform") {
        plan.occupancy.uniform = count;
      } else {
        plan.occupancy.per_room[item.key()] = count;
      }
    }
    if (plan.occupancy.uniform && !plan.occupancy.per_room.empty()) {
      throw ParseError("occupancy mixes 'uniform' with per-room counts");
    }
  }
  return plan;
}

}  // namespace

double Segment::length() const { return std::hypot(x1 - x0, y1 - y0); }

const Room* BuildingPlan::find_room(std::string_view id) const {
  for (const auto& r : rooms) {
    if (r.id == id) return &r;
  }
  return nullptr;
}

int BuildingPlan::room_index(std::string_view id) const {
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    if (rooms[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

int BuildingPlan::occupants_of(std::string_view id) const {
  if (occupancy.uniform) return *occupancy.uniform;
  auto it = occupancy.per_room.find(std::string(id));
  return it == occupancy.per_room.end() ? 0 : it->second;
}

int BuildingPlan::total_occupants() const {
  int total = 0;
  for (const auto& r : rooms) total += occupants_of(r.id);
  return total;
}

Segment BuildingPlan::door_wall(const Door& door) const {
  if (door.is_exit()) {
    const Room* r = find_room(door.exit_room());
    if (r == nullptr) throw ValidationError("door references unknown room '" + door.exit_room() + "'");
    return room_wall(*r, door.side);
  }
  const Room* a = find_room(door.from);
  const Room* b = find_room(door.to);
  if (a == nullptr) throw ValidationError("door references unknown room '" + door.from + "'");
  if (b == nullptr) throw ValidationError("door references unknown room '" + door.to + "'");
  auto seg = shared_boundary(*a, *b);
  if (!seg) {
    throw ValidationError("rooms '" + door.from + "' and '" + door.to + "' share no wall");
  }
  return *seg;
}

double BuildingPlan::door_offset(const Door& door) const {
  if (door.position_m) return *door.position_m;
  return (door_wall(door).length() - door.width_m) / 2.0;
}

Segment BuildingPlan::door_opening(const Door& door) const {
  const Segment wall = door_wall(door);
  const double len = wall.length();
  const double ux = (wall.x1 - wall.x0) / len;
  const double uy = (wall.y1 - wall.y0) / len;
  const double off = door_offset(door);
  return {wall.x0 + ux * off, wall.y0 + uy * off, wall.x0 + ux * (off + door.width_m),
          wall.y0 + uy * (off + door.width_m)};
}

void validate_plan(const BuildingPlan& plan) {
  if (plan.rooms.empty()) throw ValidationError("plan has no rooms");

  std::set<std::string> ids;
  for (const auto& r : plan.rooms) {
    if (r.id.empty()) throw ValidationError("room with empty id");
    if (r.id == kExit) throw ValidationError("room id 'EXIT' is reserved");
    if (!ids.insert(r.id).second) throw ValidationError("duplicate room id '" + r.id + "'");
    if (!(r.width_m > 0.0) || !(r.depth_m > 0.0) || !std::isfinite(r.width_m) ||
        !std::isfinite(r.depth_m)) {
      throw ValidationError("room '" + r.id + "' has a non-positive dimension");
    }
    if (!std::isfinite(r.x_m) || !std::isfinite(r.y_m)) {
      throw ValidationError("room '" + r.id + "' has a non-finite origin");
    }
  }
  for (std::size_t i = 0; i < plan.rooms.size(); ++i) {
    for (std::size_t j = i + 1; j < plan.rooms.size(); ++j) {
      if (overlaps(plan.rooms[i], plan.rooms[j])) {
        throw ValidationError("rooms '" + plan.rooms[i].id + "' and '" + plan.rooms[j].id +
                              "' overlap");
      }
    }
  }

  bool has_exit = false;
  for (const auto& d : plan.doors) {
    if (d.from == d.to) throw ValidationError("door endpoints must be distinct");
    for (const auto* end : {&d.from, &d.to}) {
      if (*end != kExit && !ids.count(*end)) {
        throw ValidationError("door references unknown room '" + *end + "'");
      }
    }
    if (!(d.width_m > 0.0) || !std::isfinite(d.width_m)) {
      throw ValidationError("door " + d.from + "-" + d.to + " has a non-positive width");
    }
    if (d.position_m && !(*d.position_m >= 0.0)) {
      throw ValidationError("door " + d.from + "-" + d.to + " has a negative position");
    }
    const double wall = plan.door_wall(d).length();
    const double off = plan.door_offset(d);
    if (off < -1e-9 || off + d.width_m > wall + 1e-9) {
      throw ValidationError("door " + d.from + "-" + d.to + " does not fit on its wall");
    }
    has_exit = has_exit || d.is_exit();
  }
  if (!has_exit) throw ValidationError("plan has no door to EXIT");

  for (const auto& [room, count] : plan.occupancy.per_room) {
    if (!ids.count(room)) throw ValidationError("occupancy names unknown room '" + room + "'");
    if (count < 0) throw ValidationError("negative occupancy for room '" + room + "'");
  }
  if (plan.occupancy.uniform && *plan.occupancy.uniform < 0) {
    throw ValidationError("negative uniform occupancy");
  }
}

BuildingPlan load_plan(std::istream& source) {
  json doc;
  try {
    doc = json::parse(source);
  } catch (const json::exception& e) {
    throw ParseError(std::string("malformed plan document: ") + e.what());
  }
  BuildingPlan plan = from_json(doc);
  validate_plan(plan);
  return plan;
}

BuildingPlan load_plan_string(std::string_view text) {
  std::istringstream in{std::string(text)};
  return load_plan(in);
}

BuildingPlan load_plan_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open plan file '" + path + "'");
  return load_plan(in);
}

std::string save_plan(const BuildingPlan& plan) {
  json doc;
  doc["name"] = plan.name;
  doc["rooms"] = json::array();
  for (const auto& r : plan.rooms) {
    doc["rooms"].push_back({{"id", r.id},
                            {"width_m", r.width_m},
                            {"depth_m", r.depth_m},
                            {"kind", to_string(r.kind)},
                            {"x_m", r.x_m},
                            {"y_m", r.y_m}});
  }
  doc["doors"] = json::array();
  for (const auto& d : plan.doors) {
    json jd = {{"from", d.from}, {"to", d.to}, {"width_m", d.width_m}};
    if (d.position_m) jd["position_m"] = *d.position_m;
    if (d.is_exit()) jd["side"] = to_string(d.side);
    doc["doors"].push_back(std::move(jd));
  }
  json occ = json::object();
  if (plan.occupancy.uniform) {
    occ["uniform"] = *plan.occupancy.uniform;
  } else {
    for (const auto& [room, count] : plan.occupancy.per_room) occ[room] = count;
  }
  doc["occupancy"] = std::move(occ);
  return doc.dump(2) + "\n";
}

std::string_view to_string(RoomKind kind) {
  return kind == RoomKind::Stair ? "stair" : "flat";
}

std::string_view to_string(Side side) {
  switch (side) {
    case Side::South: return "south";
    case Side::North: return "north";
    case Side::West: return "west";
    case Side::East: return "east";
  }
  return "south";
}

}  // namespace evacnet
