#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "evacnet/errors.hpp"
#include "evacnet/qn.hpp"

using namespace evacnet;

namespace {

std::size_t at(int i) { return static_cast<std::size_t>(i); }

double controller_rho(const QNModel& m, const ResponseStats& s) {
  const int c = m.station_index(m.arch == Architecture::Centralized ? "Controller" : "Controller1");
  return s.rho[at(c)];
}

}  // namespace

TEST_CASE("station list follows the six layers") {
  const QNModel cent = build_qn(Architecture::Centralized, Resolution::LR);
  std::vector<std::string> names;
  for (const Station& s : cent.stations) names.push_back(s.name);
  CHECK(names == std::vector<std::string>{"Sampling", "CCTVs", "PL2IL", "Controller", "IL2AL",
                                          "Dashboards", "Alarms", "EvacuationSigns", "Done"});
  const QNModel collab = build_qn(Architecture::Collaborative, Resolution::HR);
  CHECK(collab.station_index("Controller1") == 3);
  CHECK(collab.station_index("Controller2") == 4);
  CHECK(collab.stations.size() == 10);
}

TEST_CASE("service means come from the matching column") {
  const QNModel cent_lr = build_qn(Architecture::Centralized, Resolution::LR);
  const Station& ctl = cent_lr.stations[at(cent_lr.station_index("Controller"))];
  CHECK(ctl.service.at("CriticalPlan-LR") == doctest::Approx(1.1668182));
  CHECK(ctl.service.count("CriticalPlan-HR") == 0);
  CHECK(cent_lr.period == 2.5);

  const QNModel collab_hr = build_qn(Architecture::Collaborative, Resolution::HR);
  const Station& c2 = collab_hr.stations[at(collab_hr.station_index("Controller2"))];
  CHECK(c2.service.at("CriticalPlan-HR") == doctest::Approx(2.0164557));
  CHECK(c2.service.at("CriticalAnalyze") == doctest::Approx(0.005735));
  CHECK(collab_hr.period == 1.25);
}

TEST_CASE("analytic utilization") {
  SUBCASE("centralized HR saturates the controller") {
    const QNModel m = build_qn(Architecture::Centralized, Resolution::HR);
    const auto rho = utilization(m);
    const double demand = 0.0045067 + 0.00676 + 110.1791139 + 0.0045067;
    CHECK(rho[at(m.station_index("Controller"))] == doctest::Approx(demand / 1.25));
    CHECK(rho[at(m.station_index("Controller"))] == doctest::Approx(88.2).epsilon(0.001));
  }
  SUBCASE("centralized LR is stable") {
    const QNModel m = build_qn(Architecture::Centralized, Resolution::LR);
    const double demand = 0.0045067 + 0.00676 + 1.1668182 + 0.0045067;
    CHECK(utilization(m)[at(m.station_index("Controller"))] == doctest::Approx(demand / 2.5));
    CHECK(demand / 2.5 == doctest::Approx(0.473).epsilon(0.001));
  }
  SUBCASE("collaborative controllers each see every other epoch") {
    const QNModel m = build_qn(Architecture::Collaborative, Resolution::HR);
    const auto rho = utilization(m);
    const double demand = 0.0045067 + 0.005735 + 2.0164557 + 0.0045067;
    CHECK(rho[at(m.station_index("Controller1"))] == doctest::Approx(demand / 2.5));
    CHECK(rho[at(m.station_index("Controller2"))] == doctest::Approx(demand / 2.5));
  }
  SUBCASE("zero service, zero load") {
    QNModel m = build_qn(Architecture::Centralized, Resolution::LR);
    for (Station& s : m.stations) {
      for (auto& [cls, mean] : s.service) mean = 0.0;
    }
    for (double r : utilization(m)) CHECK(r == 0.0);
    const ResponseStats s = simulate_qn(m, 100, 1);
    CHECK(s.mean_response == 0.0);
    CHECK(s.mean_response_max == 0.0);
  }
}

TEST_CASE("M/M/1 against the closed form") {
  const QNModel m = single_station(0.2, 1.0, true);
  const ResponseStats s = simulate_qn(m, 100000, 5);
  CHECK(s.mean_response == doctest::Approx(1.0 / (1.0 - 0.2)).epsilon(0.05));
  CHECK(s.busy[1] == doctest::Approx(0.2).epsilon(0.02));
}

TEST_CASE("saturation is reported, not raised") {
  const QNModel m = build_qn(Architecture::Centralized, Resolution::HR);
  const ResponseStats s = simulate_qn(m, 200, 1);
  CHECK(s.saturated);
  CHECK(std::isnan(s.mean_response));
}

TEST_CASE("simulated busy fraction matches utilization") {
  for (auto [arch, res] : {std::pair{Architecture::Centralized, Resolution::LR},
                           std::pair{Architecture::Collaborative, Resolution::LR}}) {
    const QNModel m = build_qn(arch, res);
    const ResponseStats s = simulate_qn(m, 100000, 2);
    CHECK_FALSE(s.saturated);
    for (std::size_t i = 0; i < m.stations.size(); ++i) {
      if (m.stations[i].kind != StationKind::Queue) continue;
      CHECK(s.busy[i] == doctest::Approx(s.rho[i]).epsilon(0.02));
    }
  }
}

TEST_CASE("response ordering over five seeds") {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const double collab_lr =
        simulate_qn(build_qn(Architecture::Collaborative, Resolution::LR), 20000, seed).mean_response;
    const double cent_lr =
        simulate_qn(build_qn(Architecture::Centralized, Resolution::LR), 20000, seed).mean_response;
    const double collab_hr =
        simulate_qn(build_qn(Architecture::Collaborative, Resolution::HR), 20000, seed).mean_response;
    CHECK(collab_lr < cent_lr);
    CHECK(cent_lr < collab_hr);
  }
}

TEST_CASE("every epoch actuates each kind once") {
  const QNModel m = build_qn(Architecture::Collaborative, Resolution::LR);
  const ResponseStats s = simulate_qn(m, 5000, 3);
  CHECK(s.completions.size() == 3);
  for (const auto& [cls, n] : s.completions) CHECK(n == 5000);
  CHECK(s.measured_epochs == 4500);
  CHECK(s.mean_response_max >= s.mean_response);
}

TEST_CASE("determinism and warm-up") {
  const QNModel m = build_qn(Architecture::Centralized, Resolution::LR);
  const ResponseStats a = simulate_qn(m, 20000, 9);
  const ResponseStats b = simulate_qn(m, 20000, 9);
  CHECK(a.mean_response == b.mean_response);
  CHECK(a.busy == b.busy);
  const ResponseStats longer = simulate_qn(m, 100000, 9, 0.2);
  const ResponseStats usual = simulate_qn(m, 100000, 9, 0.1);
  CHECK(std::abs(longer.mean_response - usual.mean_response) < 0.01 * usual.mean_response);
  CHECK(controller_rho(m, usual) == doctest::Approx(0.473).epsilon(0.001));
  CHECK_THROWS_AS(simulate_qn(m, 0, 1), ConfigError);
}

TEST_CASE("energy utility") {
  CHECK(energy_utility(10.0, 10.0, 30.0) == 1.0);
  CHECK(energy_utility(30.0, 10.0, 30.0) == 0.0);
  CHECK(energy_utility(20.0, 10.0, 30.0) == doctest::Approx(0.5));
  CHECK_THROWS_AS(energy_utility(31.0, 10.0, 30.0), RangeError);
  CHECK_THROWS_AS(energy_utility(9.0, 10.0, 30.0), RangeError);
  CHECK_THROWS_AS(energy_utility(10.0, 10.0, 10.0), RangeError);
}
