#pragma once

// Empirical limit theorems for S_n = log ||A^n(w) x|| (linear cocycles) or
// S_n = log |(f^n_w)'(x)| (random maps): CLT, Berry-Esseen rate, large
// deviations and the strong law.

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rmlab/linear_cocycles.hpp"
#include "rmlab/random_systems.hpp"
#include "rmlab/stats.hpp"

namespace rmlab {

struct LambdaHat {
  double value = 0.0;
  double std_error = 0.0;
  std::string provenance;  // "furstenberg", "analytic", ...
};

// What S_n is computed from. Copies the system so samples can outlive it.
class SnSource {
 public:
  static SnSource from_cocycle(const Cocycle& cocycle, const Vector& x);
  static SnSource from_system(const RandomMapSystem& system, const SpacePoint& x);
  /// Sums of n independent +-1 steps (Berry-Esseen calibration).
  static SnSource rademacher();

  /// S_n along the word drawn from (seed, stream).
  double sample(int n, std::uint64_t seed, std::uint64_t stream) const;
  bool deterministic() const;
  std::string describe() const;

 private:
  std::shared_ptr<const Cocycle> cocycle_;
  std::shared_ptr<const RandomMapSystem> system_;
  Vector x_;
  SpacePoint point_;
};

struct SnSamples {
  std::vector<int> n_list;
  int trials = 0;
  std::uint64_t seed = 0;
  LambdaHat lambda_hat;
  std::vector<std::vector<double>> s;  // S_n per n, per trial
  std::vector<std::vector<double>> z;  // (S_n - n lambda_hat) / sqrt(n)
};

struct SnOptions {
  std::size_t min_trials = 1000;
  int workers = 1;
};

SnSamples collect_sn(const SnSource& source, const std::vector<int>& n_list, int trials, const LambdaHat& lambda_hat,
                     std::uint64_t seed, const SnOptions& options = {});

struct CltRow {
  int n = 0;
  double mean = 0.0;
  double mean_band = 0.0;   // 3 x (sampling stderr with lambda_hat's error folded in)
  bool centered = true;
  double variance = 0.0;
  double variance_stderr = 0.0;  // grouped jackknife
  double ks = 0.0;               // KS distance of Z_n / sigma to N(0, 1)
  bool degenerate = false;
};

struct CltReport {
  std::vector<CltRow> rows;
  bool variance_stable = true;  // last two n, within 4 x (sum of jackknife errors)
};

CltReport clt_test(const SnSamples& samples, double degenerate_below = 1e-6);

struct BerryEsseenFit {
  std::vector<int> n;
  std::vector<double> gap;  // sup_u |F_n(u) - Phi(u)| of Z_n / sigma_n
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
};

BerryEsseenFit berry_esseen_fit(const SnSamples& samples, double degenerate_below = 1e-6);

struct DeviationCell {
  int n = 0;
  double eps = 0.0;
  std::size_t count = 0;
  double p_hat = 0.0;
  bool usable = false;  // count >= min_count
};

struct DeviationRate {
  double eps = 0.0;
  std::optional<double> h_hat;
  double h_stderr = 0.0;
  bool strictly_decreasing = false;  // over usable n
  std::size_t usable_n = 0;
};

struct DeviationFit {
  std::vector<DeviationCell> cells;
  std::vector<DeviationRate> rates;
  std::vector<double> convexity;  // second differences of eps^2 h(eps) over consecutive fitted eps
  bool insufficient_tail_mass = false;
};

struct DeviationOptions {
  std::size_t min_count = 20;
  bool strict = false;  // throw InsufficientTailMass instead of flagging
  int workers = 1;
};

DeviationFit large_deviation_fit(const SnSource& source, const std::vector<double>& eps_list,
                                 const std::vector<int>& n_list, int trials, const LambdaHat& lambda_hat,
                                 std::uint64_t seed, const DeviationOptions& options = {});

/// Same fit on samples that were already collected.
DeviationFit large_deviation_fit(const SnSamples& samples, const std::vector<double>& eps_list,
                                 const DeviationOptions& options = {});

struct SllnResult {
  double fraction = 0.0;
  double sigma_hat = 0.0;
  double band = 0.0;
  int n = 0;
  int trials = 0;
};

SllnResult slln_check(const SnSource& source, int n_big, int trials, const LambdaHat& lambda_hat, std::uint64_t seed,
                      int workers = 1);

}  // namespace rmlab
