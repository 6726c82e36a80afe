#pragma once

// Locally constant GL(m) cocycles: renormalized products, exterior-square
// norms, the Lyapunov spectrum, the projective action and subspace restriction.

#include <cstdint>
#include <optional>
#include <vector>

#include "rmlab/random_systems.hpp"
#include "rmlab/stats.hpp"

namespace rmlab {

class Cocycle {
 public:
  Cocycle(std::vector<Matrix> matrices, std::vector<double> weights);

  int dimension() const { return dim_; }
  std::size_t size() const { return matrices_.size(); }
  const Matrix& matrix(std::size_t i) const { return matrices_[i]; }
  const Matrix& inverse(std::size_t i) const { return inverses_[i]; }
  double weight(std::size_t i) const { return weights_[i]; }
  std::span<const double> weights() const { return weights_; }
  const std::vector<Matrix>& matrices() const { return matrices_; }

  SymbolSampler sampler(std::uint64_t seed, std::uint64_t stream) const { return {weights_, seed, stream}; }
  /// E log|det A|.
  double mean_log_abs_det() const;

 private:
  int dim_ = 0;
  std::vector<Matrix> matrices_;
  std::vector<Matrix> inverses_;
  std::vector<double> weights_;
};

Word sample_word(const Cocycle& cocycle, std::size_t n, std::uint64_t seed, std::uint64_t stream);

/// A^n(w) = exp(log_scale) * normalized, with ||normalized||_2 = 1.
struct LogProduct {
  Matrix normalized;
  double log_scale = 0.0;
};

LogProduct log_product(const Cocycle& cocycle, const Word& word);

/// log ||A^n(w) x|| for a unit vector x.
double log_vector_growth(const Cocycle& cocycle, const Word& word, const Vector& x);

/// Product of the two largest singular values.
double exterior2_norm(const Matrix& M);

double spectral_norm(const Matrix& M);

struct SpectrumEstimate {
  std::vector<double> exponents;  // descending, nats per step
  std::vector<double> std_errors;
  int n = 0;
  int trials = 0;
};

/// QR-reorthogonalized products; batch-mean errors over ten time blocks per trial.
SpectrumEstimate lyapunov_spectrum(const Cocycle& cocycle, int n, int trials, std::uint64_t seed, int workers = 1);

RandomMapSystem projective_system(const Cocycle& cocycle);

/// Cocycle on an invariant subspace, in an orthonormalized basis of it.
Cocycle restrict_to(const Cocycle& cocycle, const std::vector<Vector>& basis);

/// D(A,B) = sum_k w_k ||A_k - B_k||; with plus_minus also adds ||A_k^-1 - B_k^-1||.
double cocycle_distance(const Cocycle& a, const Cocycle& b, bool plus_minus = false);

struct FurstenbergOptions {
  int burn_in = 1000;
  int samples = 100000;
  std::uint64_t seed = 1;
  std::optional<Vector> start;  // seeded random start when absent
  std::uint64_t stream = 0;
};

/// Top exponent from the projective Markov chain: averages
/// phi_A(x) = sum_t p_t log ||A_t x|| over the chain after burn-in.
Estimate furstenberg_estimate(const Cocycle& cocycle, const FurstenbergOptions& options);

/// Per-step integrand phi_A(x) for a unit vector x.
double furstenberg_integrand(const Cocycle& cocycle, const Vector& x);

}  // namespace rmlab
