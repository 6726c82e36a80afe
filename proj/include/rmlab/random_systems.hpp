#pragma once

// Random maps as finitely supported distributions over fiber maps, plus word
// sampling, iteration and local Lipschitz constants along words.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rmlab/rng.hpp"
#include "rmlab/spaces.hpp"

namespace rmlab {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline constexpr std::size_t kMaxAtoms = 64;

/// x -> a*x + b on an interval.
struct AffineInterval {
  double a = 1.0;
  double b = 0.0;
};

/// x -> x + rho + c/(2*pi*k) * sin(2*pi*k*x) mod 1.
struct CircleWave {
  double rho = 0.0;
  double c = 0.0;
  int k = 1;
};

/// Projective action x^ -> (M x)^.
struct ProjectiveOfMatrix {
  Matrix M;
};

/// Piecewise-linear interpolation through knots. On the circle the values are
/// a lift of a degree-one map: the segment after the last knot joins
/// (xs.back(), ys.back()) to (xs.front() + 1, ys.front() + 1).
struct UserTabulated {
  std::vector<double> xs;
  std::vector<double> ys;
};

using FiberFamily = std::variant<AffineInterval, CircleWave, ProjectiveOfMatrix, UserTabulated>;

class FiberMap {
 public:
  /// Validates the family against the space and checks that the map keeps a
  /// net of the space inside it.
  FiberMap(Space space, FiberFamily family);

  const Space& space() const { return space_; }
  const FiberFamily& family() const { return family_; }
  std::string tag() const;

  SpacePoint apply(const SpacePoint& x) const;
  /// Apply without the escape check or circle wrap (the raw lift).
  double apply_lift(double x) const;
  /// Analytic local Lipschitz constant Lg(x) = ||Dg(x)|| when available.
  std::optional<double> derivative_norm(const SpacePoint& x) const;
  /// Signed derivative for one-dimensional C^1 families (circle/interval).
  std::optional<double> derivative_1d(double x) const;
  bool has_derivative() const { return !std::holds_alternative<UserTabulated>(family_); }
  /// Global Lipschitz constant (a bound for projective maps).
  double lipschitz_bound() const { return lipschitz_; }

 private:
  double compute_lipschitz() const;

  Space space_;
  FiberFamily family_;
  double lipschitz_ = 0.0;
  Matrix inverse_;  // projective only
};

/// Global Lipschitz constant of a single fiber map.
double global_lipschitz(const FiberMap& fm);

struct Atom {
  FiberMap map;
  double weight;
};

/// Draws symbol k of a word from uniform k of a stream.
class SymbolSampler {
 public:
  SymbolSampler(std::span<const double> weights, std::uint64_t seed, std::uint64_t stream);
  std::uint32_t operator()(std::uint64_t k) const;

 private:
  std::vector<double> cumulative_;
  std::uint64_t seed_;
  std::uint64_t stream_;
};

class RandomMapSystem {
 public:
  RandomMapSystem(Space space, std::vector<Atom> atoms);

  const Space& space() const { return space_; }
  std::size_t size() const { return atoms_.size(); }
  const FiberMap& map(std::size_t i) const { return atoms_[i].map; }
  double weight(std::size_t i) const { return atoms_[i].weight; }
  std::span<const double> weights() const { return weights_; }
  const std::vector<Atom>& atoms() const { return atoms_; }
  bool has_derivatives() const;

  SymbolSampler sampler(std::uint64_t seed, std::uint64_t stream) const { return {weights_, seed, stream}; }

 private:
  Space space_;
  std::vector<Atom> atoms_;
  std::vector<double> weights_;
};

struct Word {
  std::vector<std::uint32_t> symbols;
  std::uint64_t seed = 0;
  std::uint64_t stream = 0;

  std::size_t size() const { return symbols.size(); }
};

/// Validates a weight vector (positive, sums to 1 within 1e-12, at most 64).
void validate_weights(std::span<const double> weights);

Word sample_word(std::span<const double> weights, std::size_t n, std::uint64_t seed, std::uint64_t stream);
Word sample_word(const RandomMapSystem& system, std::size_t n, std::uint64_t seed, std::uint64_t stream);

/// orbit[0] = x, orbit[k+1] = f_{word[k]}(orbit[k]).
std::vector<SpacePoint> iterate(const RandomMapSystem& system, const Word& word, const SpacePoint& x);

/// Escape-checked single step of atom `symbol`.
SpacePoint step(const RandomMapSystem& system, std::uint32_t symbol, const SpacePoint& x);

/// log of L f^n_w(x) as the sum of per-step analytic log norms.
double log_local_lipschitz_along(const RandomMapSystem& system, const Word& word, const SpacePoint& x);

struct FdOptions {
  double step = 1e-6;
};

struct FdEstimate {
  double value = 0.0;       // at step h
  double value_half = 0.0;  // at step h/2 (Richardson check)
  double step = 0.0;
};

/// Central finite-difference estimate of L f^n_w(x) for the composed map.
FdEstimate fd_local_lipschitz_along(const RandomMapSystem& system, const Word& word, const SpacePoint& x,
                                    const FdOptions& options = {});

/// L f^n_w(x): analytic chain product when every atom has a derivative,
/// otherwise (if allowed) the finite-difference estimate at step h.
double local_lipschitz_along(const RandomMapSystem& system, const Word& word, const SpacePoint& x,
                             bool allow_fd_fallback = false);

/// Projective differential norm of x^ -> (Mx)^ at the unit vector x.
double projective_derivative_norm(const Matrix& M, std::span<const double> x);

}  // namespace rmlab
