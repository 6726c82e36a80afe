#pragma once

// Annealed exponents of random maps, the mostly-contracting certificate,
// contraction-on-average search, and contraction/synchronization tests.

#include <cstdint>
#include <optional>
#include <vector>

#include "rmlab/random_systems.hpp"
#include "rmlab/stats.hpp"

namespace rmlab {

struct AnnealedOptions {
  /// Exact expectation over all words when (#atoms)^n is at most this many.
  std::size_t exact_word_limit = 4096;
  int workers = 1;
};

struct ExponentAtPoint {
  SpacePoint x;
  int n = 0;
  double estimate = 0.0;  // nats per step
  double std_error = 0.0;
  std::size_t mc_samples = 0;
  bool exact = false;     // expectation computed by word enumeration
};

/// (1/n) E log L f^n_w(x). Word s of the sample uses stream s, so every point
/// of a sweep sees the same words.
ExponentAtPoint annealed_exponent_at(const RandomMapSystem& system, const SpacePoint& x, int n, std::size_t mc_samples,
                                     std::uint64_t seed, const AnnealedOptions& options = {});

struct Certificate {
  bool pass = false;
  int n = 0;
  double margin = 0.0;
  SpacePoint worst_point;
  double worst_estimate = 0.0;
  double worst_std_error = 0.0;
  double eps = 0.0;
  std::size_t mc_samples = 0;
  std::uint64_t seed = 0;
  std::vector<ExponentAtPoint> points;
};

Certificate mostly_contracting_certificate(const RandomMapSystem& system, double eps, int n, std::size_t mc_samples,
                                           double margin, std::uint64_t seed, const AnnealedOptions& options = {});

struct ContractionOnAverageWitness {
  double alpha = 0.0;
  double q = 0.0;
  int n = 0;
  double r = 0.0;
  bool global = false;
  std::size_t pairs = 0;
  double max_ratio = 0.0;
};

struct ContractionSearchOptions {
  std::vector<double> alphas{1.0};
  int n_max = 1;
  double r = 1.0;
  double pair_grid_eps = 0.05;
  std::size_t mc_samples = 200;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// First (alpha, n) in lexicographic order whose pair-ratio bound
/// max(mean + 3 sigma) is below 1; nullopt when the budget is exhausted.
std::optional<ContractionOnAverageWitness> contraction_on_average_search(const RandomMapSystem& system,
                                                                         const ContractionSearchOptions& options);

struct ContractionFit {
  double q_hat = 0.0;
  double lambda_con = 0.0;  // median tail slope
  std::vector<double> slopes;
  std::vector<bool> success;
  double success_fraction = 0.0;
};

struct ContractionFitOptions {
  double delta0 = 0.05;
  int n_max = 60;
  int trials = 100;
  std::uint64_t seed = 1;
  /// Diameters below this are at floating resolution; the fit stops there.
  double diameter_floor = 1e-10;
  /// A trial counts as contracting when its slope is below -slope_tol.
  double slope_tol = 1e-6;
  int workers = 1;
};

ContractionFit exponential_contraction_fit(const RandomMapSystem& system, const SpacePoint& x,
                                           const ContractionFitOptions& options);

struct SynchronizationResult {
  double fraction = 0.0;
  std::size_t pairs = 0;
  std::size_t trials = 0;
};

SynchronizationResult synchronization_test(const RandomMapSystem& system, double pair_grid_eps, int n, int trials,
                                           double threshold, std::uint64_t seed, int workers = 1);

struct SystemExponent {
  double estimate = 0.0;
  double std_error = 0.0;
  SpacePoint argmax;
  int n = 0;
};

/// max over the eps-net of annealed_exponent_at: finite-n proxy for lambda(f).
SystemExponent lambda_of_system(const RandomMapSystem& system, int n, std::size_t mc_samples, double eps,
                                std::uint64_t seed, const AnnealedOptions& options = {});

/// Exponent of a stationary measure, int sum_t p_t log|f_t'(x)| dmu(x), from
/// the chain started at x0 (one-dimensional C^1 systems and projective ones).
Estimate stationary_exponent_estimate(const RandomMapSystem& system, const SpacePoint& x0, int burn_in, int samples,
                                      std::uint64_t seed, std::uint64_t stream = 0);

}  // namespace rmlab
