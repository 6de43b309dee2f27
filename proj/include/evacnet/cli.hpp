#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "evacnet/abss.hpp"
#include "evacnet/evac.hpp"
#include "evacnet/grid.hpp"
#include "evacnet/qn.hpp"

namespace evacnet {

/// Door-rate presets, persons per metre per second.
inline constexpr double kPessimisticDoorRate = 1.03;
inline constexpr double kOptimisticDoorRate = 3.23;

struct OccupancySpec {
  enum class Source { Plan, Uniform, Random };
  Source source = Source::Plan;
  int total = 0;
  std::uint64_t seed = 1;
};

struct AbssRun {
  std::string label = "abss";  // file prefix: <label>_trace.csv, <label>_summary.csv
  Guidance guidance = Guidance::ShortestPath;
  bool grouping = false;
  bool double_door = false;
  int agents = 0;  // 0: the scenario's occupancy total
  int seeds = 20;
  double time_cap = 3600.0;
};

struct QnRun {
  std::vector<std::pair<Architecture, Resolution>> scenarios;
  int epochs = 20000;
};

struct Scenario {
  std::filesystem::path plan;
  std::vector<double> cell_size_candidates{3.0};
  int node_budget = 10000;
  NetworkParams params;
  std::optional<CongestionCurve> congestion;
  OccupancySpec occupancy;
  RiskSchedule risk;
  int horizon_cap = 10000;
  bool record_cpu = false;  // write CPU seconds instead of NA

  bool ideal = false;
  bool shortest = false;
  std::vector<int> decomposed_chunks;
  std::vector<double> sweep_widths;
  std::vector<AbssRun> abss;
  std::optional<QnRun> qn;

  bool has_modes() const;
};

/// Parses a scenario document; a relative plan path is taken from the
/// config's directory. Throws ConfigError naming the offending key or path.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(std::string_view text, const std::filesystem::path& base_dir);

struct RunOptions {
  std::filesystem::path out_dir;
  std::optional<std::uint64_t> seed;  // overrides occupancy and simulation seeds
  int jobs = 1;
};

/// Runs every requested mode, writes one CSV per mode into the output
/// directory and a summary table to `summary`. Returns 0, or 2 when some
/// mode hit an unevacuable or saturated outcome (the other modes still run).
int run_scenario(const Scenario& scenario, const RunOptions& options, std::ostream& summary);

/// Merges profile CSVs into `tau,<label>,...`; labels are file stems and a
/// finished series keeps its final count. Throws SlotMismatch when the slot
/// durations differ and ConfigError for unreadable inputs.
void compare_profiles(const std::vector<std::filesystem::path>& inputs, std::ostream& out);

/// Loads and checks a plan, printing a short description.
void describe_plan(const std::filesystem::path& path, std::ostream& out);

}  // namespace evacnet
