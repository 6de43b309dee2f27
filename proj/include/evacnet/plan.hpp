#pragma once

#include <istream>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace evacnet {

/// Distinguished door endpoint denoting the safe place (node 0 of the network).
inline constexpr std::string_view kExit = "EXIT";

enum class RoomKind { Flat, Stair };

/// Wall of a room, in a frame where x grows east and y grows north.
enum class Side { South, North, West, East };

/// Axis-aligned rectangular room. `width_m` runs along x, `depth_m` along y,
/// and (x_m, y_m) is the south-west corner in building coordinates.
struct Room {
  std::string id;
  double width_m = 0.0;
  double depth_m = 0.0;
  RoomKind kind = RoomKind::Flat;
  double x_m = 0.0;
  double y_m = 0.0;

  bool operator==(const Room&) const = default;
};

/// A door between two rooms, or between a room and EXIT.
///
/// `position_m` is the offset of the door's leading edge from the start of the
/// wall segment it sits on (the shared boundary for internal doors, the named
/// wall of the room for exits), measured from the west/south end. When absent
/// the door is centered. `side` is only meaningful for exit doors.
struct Door {
  std::string from;
  std::string to;
  double width_m = 0.0;
  std::optional<double> position_m;
  Side side = Side::South;

  bool is_exit() const { return from == kExit || to == kExit; }
  /// The room endpoint of an exit door.
  const std::string& exit_room() const { return from == kExit ? to : from; }

  bool operator==(const Door&) const = default;
};

/// Default occupants: either the same count in every room or explicit
/// per-room counts.
struct Occupancy {
  std::optional<int> uniform;
  std::map<std::string, int> per_room;

  bool operator==(const Occupancy&) const = default;
};

/// A straight wall segment in building coordinates.
struct Segment {
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double length() const;
};

struct BuildingPlan {
  std::string name;
  std::vector<Room> rooms;
  std::vector<Door> doors;
  Occupancy occupancy;

  const Room* find_room(std::string_view id) const;
  int room_index(std::string_view id) const;  // -1 when absent

  /// Persons initially in room `id` according to the occupancy block.
  int occupants_of(std::string_view id) const;
  int total_occupants() const;

  /// The wall segment a door may occupy: the shared boundary for an internal
  /// door, the named wall for an exit. Throws ValidationError if the rooms do
  /// not touch.
  Segment door_wall(const Door& door) const;
  /// Offset of the door's leading edge along door_wall(), resolving the
  /// centered default.
  double door_offset(const Door& door) const;
  /// Opening of the door in building coordinates.
  Segment door_opening(const Door& door) const;

  bool operator==(const BuildingPlan&) const = default;
};

/// Checks every plan invariant; throws ValidationError naming the first
/// violation.
void validate_plan(const BuildingPlan& plan);

/// Parses and validates a plan document. Throws ParseError for malformed
/// documents and ValidationError for invariant violations.
BuildingPlan load_plan(std::istream& source);
BuildingPlan load_plan_string(std::string_view text);
BuildingPlan load_plan_file(const std::string& path);

/// Canonical serialization: sorted keys, two-space indentation, trailing
/// newline. Deterministic for a given plan.
std::string save_plan(const BuildingPlan& plan);

std::string_view to_string(RoomKind kind);
std::string_view to_string(Side side);

}  // namespace evacnet
