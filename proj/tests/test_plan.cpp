#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "evacnet/errors.hpp"
#include "evacnet/plan.hpp"

using namespace evacnet;

namespace {

const char* kSingleRoom = R"({
  "name": "single",
  "rooms": [{"id": "A", "width_m": 3, "depth_m": 3, "kind": "flat"}],
  "doors": [{"from": "A", "to": "EXIT", "width_m": 1}],
  "occupancy": {"uniform": 4}
})";

// Chain of rooms along x with random sizes, one exit on the first room.
BuildingPlan random_plan(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> rooms(1, 5);
  std::uniform_real_distribution<double> size(2.0, 9.0);
  std::uniform_int_distribution<int> occ(0, 30);
  BuildingPlan plan;
  plan.name = "generated";
  const int n = rooms(rng);
  double x = 0.0;
  for (int k = 0; k < n; ++k) {
    Room r;
    r.id = "R" + std::to_string(k);
    r.width_m = std::round(size(rng) * 4) / 4;
    r.depth_m = std::round(size(rng) * 4) / 4;
    r.kind = rng() % 4 == 0 ? RoomKind::Stair : RoomKind::Flat;
    r.x_m = x;
    x += r.width_m;
    plan.rooms.push_back(r);
    plan.occupancy.per_room[r.id] = occ(rng);
    if (k > 0) {
      Door d{plan.rooms[static_cast<std::size_t>(k - 1)].id, r.id, 1.0};
      if (rng() % 2) d.position_m = 0.5;
      plan.doors.push_back(d);
    }
  }
  Door exit{"R0", std::string(kExit), 1.0};
  exit.side = static_cast<Side>(rng() % 4);
  plan.doors.push_back(exit);
  return plan;
}

}  // namespace

TEST_CASE("minimal plan loads") {
  const auto plan = load_plan_string(kSingleRoom);
  CHECK(plan.rooms.size() == 1);
  CHECK(plan.doors.front().is_exit());
  CHECK(plan.total_occupants() == 4);
}

TEST_CASE("zero rooms is a validation error") {
  CHECK_THROWS_AS(load_plan_string(R"({"rooms": [], "doors": []})"), ValidationError);
}

TEST_CASE("dangling door reference is a validation error") {
  CHECK_THROWS_AS(load_plan_string(R"({
    "rooms": [{"id": "A", "width_m": 3, "depth_m": 3}],
    "doors": [{"from": "A", "to": "EXIT", "width_m": 1}, {"from": "A", "to": "Z", "width_m": 1}]
  })"), ValidationError);
}

TEST_CASE("structural errors") {
  CHECK_THROWS_AS(load_plan_string("{ not json"), ParseError);
  CHECK_THROWS_AS(load_plan_string(R"({"rooms": [{"id": "A", "width_m": "3", "depth_m": 3}]})"),
                  ParseError);
  CHECK_THROWS_AS(load_plan_string(R"({"rooms": [{"id": "A", "width_m": 3, "depth_m": 3, "color": 1}]})"),
                  ParseError);
  CHECK_THROWS_AS(load_plan_string(R"({
    "rooms": [{"id": "A", "width_m": 0, "depth_m": 3}],
    "doors": [{"from": "A", "to": "EXIT", "width_m": 1}]})"), ValidationError);
  CHECK_THROWS_AS(load_plan_string(R"({
    "rooms": [{"id": "A", "width_m": 3, "depth_m": 3}],
    "doors": []})"), ValidationError);
  CHECK_THROWS_AS(load_plan_string(R"({
    "rooms": [{"id": "A", "width_m": 3, "depth_m": 3}],
    "doors": [{"from": "A", "to": "EXIT", "width_m": 4}]})"), ValidationError);
}

TEST_CASE("internal doors need a shared wall") {
  CHECK_THROWS_AS(load_plan_string(R"({
    "rooms": [{"id": "A", "width_m": 3, "depth_m": 3},
              {"id": "B", "width_m": 3, "depth_m": 3, "x_m": 5}],
    "doors": [{"from": "A", "to": "EXIT", "width_m": 1}, {"from": "A", "to": "B", "width_m": 1}]
  })"), ValidationError);
}

TEST_CASE("saving is deterministic and round-trips") {
  const auto plan = load_plan_string(kSingleRoom);
  const auto a = save_plan(plan);
  CHECK(a == save_plan(plan));
  CHECK(load_plan_string(a) == plan);
  CHECK(a.find("\"id\": \"A\"") != std::string::npos);
  CHECK(a.back() == '\n');
}

TEST_CASE("generated plans round-trip through the canonical form") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 100; ++trial) {
    const auto plan = random_plan(rng);
    validate_plan(plan);
    const auto text = save_plan(plan);
    const auto back = load_plan_string(text);
    CHECK(back == plan);
    CHECK(save_plan(back) == text);
  }
}

TEST_CASE("centered door opening on a shared wall") {
  const auto plan = load_plan_string(R"({
    "rooms": [{"id": "A", "width_m": 6, "depth_m": 4},
              {"id": "B", "width_m": 3, "depth_m": 4, "x_m": 6}],
    "doors": [{"from": "A", "to": "B", "width_m": 1}, {"from": "B", "to": "EXIT", "width_m": 1, "side": "east"}]
  })");
  const auto op = plan.door_opening(plan.doors[0]);
  CHECK(op.x0 == doctest::Approx(6));
  CHECK(op.y0 == doctest::Approx(1.5));
  CHECK(op.y1 == doctest::Approx(2.5));
  const auto ex = plan.door_opening(plan.doors[1]);
  CHECK(ex.x0 == doctest::Approx(9));
}
