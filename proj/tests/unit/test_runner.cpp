#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "rmlab/runner.hpp"
#include "error_kind.hpp"

using namespace rmlab;
namespace fs = std::filesystem;

namespace {

const std::string kConfigs = RMLAB_CONFIG_DIR;

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("rmlab_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string write_json(const fs::path& path, const Json& j) {
  std::ofstream os(path);
  os << j.dump(2);
  return path.string();
}

int cli(const std::string& args) {
  const std::string cmd = std::string(RMLAB_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Json ifs_config() { return read_config_file(kConfigs + "/ifs_certificate.json"); }

std::string config_error(const Json& config) {
  try {
    run_config(config);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::ConfigInvalid);
    return e.what();
  }
  FAIL("expected ConfigInvalid");
  return {};
}

}  // namespace

TEST_CASE("run: certificate verdicts and exit codes") {
  const RunReport r = run_config(ifs_config());
  CHECK(r.all_pass());
  CHECK(r.json["results"]["worst_estimate"].get<double>() == doctest::Approx(-0.6931).epsilon(1e-4));
  CHECK(r.json["version"] == kLibraryVersion);
  CHECK(r.json["config"] == ifs_config());

  const fs::path dir = scratch_dir("run");
  CHECK(cli("run " + kConfigs + "/ifs_certificate.json --out " + dir.string()) == 0);
  CHECK(fs::exists(dir / "ifs-certificate.json"));
  CHECK(fs::exists(dir / "ifs-certificate.points.csv"));
  CHECK(cli("run " + kConfigs + "/rotations_certificate.json --out " + dir.string()) == 2);

  Json bad = ifs_config();
  bad["system"]["weights"] = {0.5, 0.4};
  CHECK(cli("run " + write_json(dir / "bad.json", bad)) == 1);
  CHECK(config_error(bad).find("at system.weights") != std::string::npos);
  CHECK(cli("run " + (dir / "missing.json").string()) == 1);
}

TEST_CASE("schema validation") {
  Json c = ifs_config();
  c["params"]["epsilon"] = 0.1;
  CHECK(config_error(c).find("params.epsilon") != std::string::npos);
  c = ifs_config();
  c["system"]["atoms"][1]["slope"] = 1;
  CHECK(config_error(c).find("system.atoms[1].slope") != std::string::npos);
  c = ifs_config();
  c["params"].erase("mc_samples");
  CHECK(config_error(c).find("params.mc_samples") != std::string::npos);
  c = ifs_config();
  c["params"]["n_steps"] = 1.5;
  CHECK(config_error(c).find("params.n_steps") != std::string::npos);
  c = ifs_config();
  c["experiment"] = "bogus";
  CHECK(config_error(c).find("experiment") != std::string::npos);
  c = ifs_config();
  c["system"]["atoms"][0]["a"] = 1.5;
  CHECK(config_error(c).find("system.atoms[0]") != std::string::npos);
}

TEST_CASE("expectations become verdicts") {
  Json c = ifs_config();
  c["expect"] = Json::array({{{"field", "worst_estimate"}, {"max", -1.0}}});
  const RunReport r = run_config(c);
  CHECK(!r.all_pass());
  CHECK(r.verdicts.back().name == "expect worst_estimate");
  c["expect"] = Json::array({{{"field", "no_such_field"}, {"max", 1.0}}});
  CHECK(config_error(c).find("expect[0].field") != std::string::npos);
}

TEST_CASE("replay") {
  const fs::path dir = scratch_dir("replay");
  RunOptions one;
  one.workers = 1;
  const std::string path = write_report(run_config(read_config_file(kConfigs + "/pair_spectrum.json"), one), dir.string());
  CHECK(replay_check(path, 1).pass);
  CHECK(replay_check(path, 8).pass);
  CHECK(cli("replay " + path + " --workers 8") == 0);

  Json edited;
  {
    std::ifstream in(path);
    edited = Json::parse(in);
  }
  const double x = edited["results"]["exponents"][0].get<double>();
  edited["results"]["exponents"][0] = std::nextafter(x, 1.0);
  const std::string bad = write_json(dir / "edited.json", edited);
  const ReplayResult r = replay_check(bad, 2);
  CHECK(!r.pass);
  CHECK(r.mismatch == "results.exponents[0]");
  CHECK(cli("replay " + bad) == 2);

  edited = Json::parse(std::ifstream(path));
  edited["runtime"]["wall_clock_seconds"] = 12345.0;
  CHECK(replay_check(write_json(dir / "timed.json", edited), 1).pass);

  std::ofstream(dir / "garbage.json") << "{ not json";
  CHECK(error_kind_of([&] { replay_check((dir / "garbage.json").string()); }) == ErrorKind::ReportUnreadable);
  CHECK(cli("replay " + (dir / "garbage.json").string()) == 1);
}

TEST_CASE("reports are independent of the worker count") {
  for (const char* name : {"two_attractor_koopman.json", "absorbing_kingman.json", "cat_sweep.json"}) {
    CAPTURE(name);
    const Json c = read_config_file(kConfigs + "/" + name);
    RunOptions a, b;
    a.workers = 1;
    b.workers = 8;
    const auto ra = run_config(c, a);
    const auto rb = run_config(c, b);
    CHECK(!first_difference(ra.json, rb.json).has_value());
    for (const auto& v : ra.verdicts) {
      CAPTURE(v.detail);
      CHECK_MESSAGE(v.pass, v.name);
    }
  }
}

TEST_CASE("write_csv") {
  std::ostringstream os;
  write_csv(os, {"t", {"a", "b"}, {{0.1, 1e-20}, {std::nan(""), -2.5}}});
  CHECK(os.str() == "a,b\n0.10000000000000001,9.9999999999999995e-21\n,-2.5\n");
}

TEST_CASE("first_difference") {
  const Json a = {{"x", 1.0}, {"runtime", {{"s", 1.0}}}, {"v", {1, 2}}};
  Json b = a;
  b["runtime"]["s"] = 2.0;
  CHECK(!first_difference(a, b).has_value());
  b["v"][1] = 3;
  CHECK(first_difference(a, b) == std::optional<std::string>("v[1]"));
  b = a;
  b["x"] = -0.0 + 1.0000000000000002;
  CHECK(first_difference(a, b) == std::optional<std::string>("x"));
}
