#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "rmlab/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Random map dynamics lab: Lyapunov exponents, stationary measures and limit theorems"};
  app.require_subcommand(1);
  int workers = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  app.add_option("--workers", workers, "Worker threads (results do not depend on this)")->check(CLI::PositiveNumber);

  std::string config_path;
  std::string out_dir;
  auto* run = app.add_subcommand("run", "Run an experiment config");
  run->add_option("config", config_path, "Experiment config (JSON)")->required();
  run->add_option("--out", out_dir, "Directory for the report and CSV tables");
  run->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  std::string report_path;
  auto* replay = app.add_subcommand("replay", "Re-run a report's config and compare every numeric field");
  replay->add_option("report", report_path, "Report written by run")->required();
  replay->add_option("--workers", workers, "Worker threads")->check(CLI::PositiveNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  if (run->parsed()) {
    rmlab::RunOptions options;
    options.workers = workers;
    if (!out_dir.empty()) options.out_dir = out_dir;
    return rmlab::run_command(config_path, options, std::cout, std::cerr);
  }
  return rmlab::replay_command(report_path, workers, std::cout, std::cerr);
}
