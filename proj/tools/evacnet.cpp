#include <CLI11.hpp>
#include <spdlog/cfg/helpers.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdlib>
#include <fstream>
#include <iostream>

#include "evacnet/cli.hpp"
#include "evacnet/errors.hpp"

namespace {

// Log lines go to stderr so that stdout carries only results.
void setup_logging() {
  auto logger = spdlog::stderr_color_mt("evacnet");
  spdlog::set_default_logger(logger);
  spdlog::set_level(spdlog::level::warn);
  if (const char* level = std::getenv("EVACNET_LOG")) spdlog::cfg::helpers::load_levels(level);
}

}  // namespace

int main(int argc, char** argv) {
  setup_logging();
  CLI::App app{"Evacuation planning, simulation and architecture assessment"};
  app.require_subcommand(1);

  std::string config;
  std::string out_dir;
  std::uint64_t seed = 0;
  int jobs = 1;
  auto* run = app.add_subcommand("run", "Run the modes of a scenario config");
  run->add_option("config", config, "Scenario JSON")->required();
  run->add_option("--out", out_dir, "Output directory")->required();
  auto* seed_opt = run->add_option("--seed", seed, "Seed for occupancy and simulations");
  run->add_option("--jobs", jobs, "Modes or runs executed in parallel")->check(CLI::PositiveNumber);

  std::vector<std::string> inputs;
  std::string merged;
  auto* compare = app.add_subcommand("compare", "Merge profile CSVs into one chart table");
  compare->add_option("csv", inputs, "Profile CSVs")->required();
  compare->add_option("--out", merged, "Merged CSV")->required();

  std::string plan;
  auto* validate = app.add_subcommand("validate", "Check a building plan");
  validate->add_option("plan", plan, "Plan JSON")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      evacnet::RunOptions opt;
      opt.out_dir = out_dir;
      opt.jobs = jobs;
      if (*seed_opt) opt.seed = seed;
      return evacnet::run_scenario(evacnet::load_scenario(config), opt, std::cout);
    }
    if (*compare) {
      std::vector<std::filesystem::path> paths(inputs.begin(), inputs.end());
      std::ostringstream text;
      evacnet::compare_profiles(paths, text);
      std::ofstream out(merged, std::ios::binary);
      if (!out) throw evacnet::ConfigError("cannot write '" + merged + "'");
      out << text.str();
      return 0;
    }
    evacnet::describe_plan(plan, std::cout);
    return 0;
  } catch (const evacnet::Unevacuable& e) {
    spdlog::error("{}", e.what());
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
