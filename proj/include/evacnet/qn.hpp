#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace evacnet {

enum class Architecture { Centralized, Collaborative };
enum class Resolution { HR, LR };
std::string_view to_string(Architecture a);
std::string_view to_string(Resolution r);

enum class StationKind {
  Source,  // emits one job per sampling epoch
  Queue,   // FIFO, single server
  Delay,   // infinite server: every job is served at once
  Sink,
};

struct Hop {
  int station = 0;
  std::string cls;
};

/// Where a job of one class goes after service. Several hops fork the job;
/// with `alternate` set the hops are instead taken in turn by epoch number.
struct Routing {
  std::vector<Hop> next;
  bool alternate = false;
};

struct Station {
  std::string name;
  StationKind kind = StationKind::Queue;
  std::map<std::string, double> service;  // class -> exponential mean, s
  std::map<std::string, Routing> routes;  // class -> successors
};

/// Open network fed by one job per period. A job whose class has a zero
/// service mean switches class on arrival without queueing.
struct QNModel {
  Architecture arch = Architecture::Centralized;
  Resolution res = Resolution::LR;
  double period = 2.5;   // s between sampling epochs
  bool poisson = false;  // exponential inter-arrival times instead of fixed
  std::vector<Station> stations;
  int source = 0;
  std::string source_class;

  int station_index(std::string_view name) const;  // -1 when absent
};

/// The monitoring loop Sampling -> CCTVs -> PL2IL -> controller(s) -> IL2AL
/// -> {Dashboards, Alarms, EvacuationSigns} -> Done. At the controller a job
/// passes Monitor, Analyze, Plan and Execute in turn, rejoining the queue
/// between tasks; Execute forks one actuation per actuator kind. IL2AL is a
/// delay station since its times are transmission and propagation delays.
QNModel build_qn(Architecture arch, Resolution res);

/// One FIFO station fed at `rate` jobs per second (Poisson when `poisson`).
QNModel single_station(double rate, double mean, bool poisson);

/// Offered load per station: the sum over classes of visits per epoch times
/// the service mean, over the period. For delay stations this is the mean
/// number of jobs in service.
std::vector<double> utilization(const QNModel& model);

struct ResponseStats {
  double mean_response = 0.0;      // sampling to first actuation, s
  double mean_response_max = 0.0;  // sampling to last actuation, s
  bool saturated = false;          // some queue has utilization >= 1
  std::vector<double> rho;         // analytic, per station
  std::vector<double> busy;        // simulated busy fraction, per station
  std::map<std::string, long> completions;  // jobs reaching a sink, per class
  int measured_epochs = 0;
};

/// Event-driven simulation of `epochs` sampling epochs; the first 10% are
/// discarded as warm-up. Saturated models report the flag and NaN means.
ResponseStats simulate_qn(const QNModel& model, int epochs, std::uint64_t seed,
                          double warmup = 0.1);

/// 1 - (current - min) / (max - min). Throws RangeError unless
/// min <= current <= max and min < max.
double energy_utility(double current, double min, double max);

}  // namespace evacnet
