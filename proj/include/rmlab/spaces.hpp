#pragma once

// Compact metric spaces acted on by random maps: the unit-circumference
// circle, a closed interval, and real projective space P(R^m).

#include <array>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace rmlab {

inline constexpr int kMaxDim = 8;

enum class SpaceKind { Circle, Interval, Projective };

// Fixed-capacity coordinates. Circle and interval points use one coordinate;
// projective points hold a unit representative whose first nonzero entry is
// positive.
class SpacePoint {
 public:
  SpacePoint() = default;
  explicit SpacePoint(double x) : dim_(1) { c_[0] = x; }
  SpacePoint(std::initializer_list<double> xs);
  explicit SpacePoint(std::span<const double> xs);

  int dim() const { return dim_; }
  double operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  double& operator[](int i) { return c_[static_cast<std::size_t>(i)]; }
  double* data() { return c_.data(); }
  const double* data() const { return c_.data(); }
  std::span<const double> coords() const { return {c_.data(), static_cast<std::size_t>(dim_)}; }
  void set_dim(int d) { dim_ = d; }

  friend bool operator==(const SpacePoint& a, const SpacePoint& b) {
    if (a.dim_ != b.dim_) return false;
    for (int i = 0; i < a.dim_; ++i)
      if (a.c_[static_cast<std::size_t>(i)] != b.c_[static_cast<std::size_t>(i)]) return false;
    return true;
  }

 private:
  std::array<double, kMaxDim> c_{};
  int dim_ = 0;
};

class Space {
 public:
  static Space circle();
  static Space interval(double a, double b);
  static Space projective(int m);

  SpaceKind kind() const { return kind_; }
  /// Number of stored coordinates per point.
  int point_dim() const { return kind_ == SpaceKind::Projective ? m_ : 1; }
  /// Projective dimension parameter m (lines in R^m); 1 otherwise.
  int ambient_dim() const { return m_; }
  double lower() const { return a_; }
  double upper() const { return b_; }
  bool one_dimensional() const { return kind_ != SpaceKind::Projective || m_ == 2; }

  double distance(const SpacePoint& p, const SpacePoint& q) const;
  double diameter() const;

  /// Wraps circle points into [0,1) and normalizes projective representatives.
  SpacePoint canonicalize(SpacePoint p) const;
  SpacePoint point(double x) const;
  SpacePoint point(std::span<const double> xs) const;
  bool contains(const SpacePoint& p, double tol = 1e-9) const;

  /// Position on [0,1) (circle, Projective(2) via angle/pi) or [a,b]
  /// (interval). Only for one-dimensional spaces.
  double line_coordinate(const SpacePoint& p) const;
  SpacePoint from_line_coordinate(double t) const;
  /// Length of the coordinate range (1 for circle and Projective(2)).
  double line_length() const;
  /// Whether the line coordinate wraps around.
  bool periodic() const { return kind_ != SpaceKind::Interval; }

  std::string describe() const;

  friend bool operator==(const Space& x, const Space& y) {
    return x.kind_ == y.kind_ && x.a_ == y.a_ && x.b_ == y.b_ && x.m_ == y.m_;
  }

 private:
  Space(SpaceKind kind, double a, double b, int m) : kind_(kind), a_(a), b_(b), m_(m) {}
  void check_dim(const SpacePoint& p) const;

  SpaceKind kind_;
  double a_;
  double b_;
  int m_;
};

/// Signed shortest displacement from a to b on the unit circle, in [-1/2, 1/2).
double circle_delta(double a, double b);

struct NetOptions {
  std::size_t max_points = 100000;
  std::uint64_t seed = 0x5eed;
  std::size_t audit_points = 10000;
};

/// Finite eps-cover. One-dimensional spaces get uniform grids; Projective(m>=3)
/// gets a seeded greedy net followed by a random covering audit.
std::vector<SpacePoint> epsilon_net(const Space& space, double eps, const NetOptions& options = {});

/// Uniformly distributed random point (rotation-invariant for projective).
template <class Rng>
SpacePoint random_point(const Space& space, Rng& rng);

/// Largest distance from `probes` uniform random points to their nearest net
/// point; used to audit coverings.
double covering_radius_estimate(const Space& space, std::span<const SpacePoint> net, std::size_t probes,
                                std::uint64_t seed);

}  // namespace rmlab

#include "rmlab/detail/spaces_inl.hpp"
