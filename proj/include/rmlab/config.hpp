#pragma once

// Strict reader for experiment configs. Every object is checked for unknown
// keys and every failure names the offending field path.

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "rmlab/kingman.hpp"
#include "rmlab/linear_cocycles.hpp"
#include "rmlab/random_systems.hpp"

namespace rmlab {

using Json = nlohmann::ordered_json;

[[noreturn]] void config_fail(const std::string& path, const std::string& message);

class Fields {
 public:
  Fields(const Json& j, std::string path);

  const std::string& path() const { return path_; }
  std::string at(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  bool has(const std::string& key) const { return j_->contains(key); }

  const Json& raw(const std::string& key);
  double number(const std::string& key);
  double positive(const std::string& key);
  std::int64_t integer(const std::string& key, std::int64_t lo, std::int64_t hi);
  std::uint64_t seed(const std::string& key);
  std::string string(const std::string& key);
  std::vector<double> numbers(const std::string& key);
  std::vector<int> integers(const std::string& key, int lo, int hi);
  Matrix matrix(const std::string& key);
  Fields object(const std::string& key);
  /// Throws on any key that was never read.
  void finish() const;

 private:
  const Json* j_;
  std::string path_;
  std::set<std::string> used_;
};

Matrix parse_matrix(const Json& j, const std::string& path);
Space parse_space(const Json& j, const std::string& path);
RandomMapSystem parse_system(const Json& j, const std::string& path);
/// Adds t * delta to the numeric fields of an explicit system definition.
Json shift_system(const Json& system, const Json& direction, double t, const std::string& path);
Cocycle parse_cocycle(const Json& j, const std::string& path);
SpacePoint parse_point(const Space& space, const Json& j, const std::string& path);

struct ChainConfig {
  FiniteMarkovOperator p;
  Eigen::VectorXd phi1;
};

ChainConfig parse_chain(const Json& j, const std::string& path);

}  // namespace rmlab
