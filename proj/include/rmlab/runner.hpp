#pragma once

// Declarative experiment runner: config -> validated plan -> report.

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "rmlab/config.hpp"

namespace rmlab {

inline constexpr const char* kLibraryVersion = "0.1.0";

struct CsvTable {
  std::string name;
  std::vector<std::string> header;
  std::vector<std::vector<double>> rows;
};

void write_csv(std::ostream& os, const CsvTable& table);

struct Verdict {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct RunReport {
  Json json;  // config echo, version, results, verdicts, runtime
  std::vector<Verdict> verdicts;
  std::vector<CsvTable> tables;
  bool all_pass() const;
};

struct RunOptions {
  int workers = 1;
  std::optional<std::string> out_dir;  // overrides output.dir of the config
};

/// Validates the whole config, then executes it.
RunReport run_config(const Json& config, const RunOptions& options = {});
Json read_config_file(const std::string& path);

/// Writes <dir>/<name>.json and one CSV per table; returns the report path.
std::string write_report(const RunReport& report, const std::string& dir);

/// `run` subcommand: exit code 0 (all verdicts pass), 2 (some fail), 1 (error).
int run_command(const std::string& config_path, const RunOptions& options, std::ostream& out, std::ostream& err);

struct ReplayResult {
  bool pass = false;
  std::string mismatch;  // field path of the first difference
  std::string detail;
};

/// First difference between two reports, ignoring the runtime block.
/// Numbers are compared bit for bit.
std::optional<std::string> first_difference(const Json& expected, const Json& actual, const std::string& path = "");

ReplayResult replay_check(const std::string& report_path, int workers = 1);

int replay_command(const std::string& report_path, int workers, std::ostream& out, std::ostream& err);

}  // namespace rmlab
