#include "rmlab/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rmlab/errors.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

SpacePoint::SpacePoint(std::initializer_list<double> xs) : SpacePoint(std::span<const double>(xs.begin(), xs.size())) {}

SpacePoint::SpacePoint(std::span<const double> xs) {
  if (xs.size() > static_cast<std::size_t>(kMaxDim))
    fail(ErrorKind::DimensionMismatch, "point has more than 8 coordinates");
  std::copy(xs.begin(), xs.end(), c_.begin());
  dim_ = static_cast<int>(xs.size());
}

Space Space::circle() { return Space(SpaceKind::Circle, 0.0, 1.0, 1); }

Space Space::interval(double a, double b) {
  require(std::isfinite(a) && std::isfinite(b) && a <= b, "interval endpoints must satisfy a <= b");
  return Space(SpaceKind::Interval, a, b, 1);
}

Space Space::projective(int m) {
  require(m >= 2 && m <= kMaxDim, "projective dimension must be in [2, 8]");
  return Space(SpaceKind::Projective, 0.0, 1.0, m);
}

double circle_delta(double a, double b) {
  double d = std::fmod(b - a, 1.0);
  if (d >= 0.5) d -= 1.0;
  if (d < -0.5) d += 1.0;
  return d;
}

void Space::check_dim(const SpacePoint& p) const {
  if (p.dim() != point_dim())
    fail(ErrorKind::DimensionMismatch,
         "point has " + std::to_string(p.dim()) + " coordinates, space " + describe() + " needs " +
             std::to_string(point_dim()));
}

double Space::distance(const SpacePoint& p, const SpacePoint& q) const {
  check_dim(p);
  check_dim(q);
  switch (kind_) {
    case SpaceKind::Circle:
      return std::abs(circle_delta(p[0], q[0]));
    case SpaceKind::Interval:
      return std::abs(p[0] - q[0]);
    case SpaceKind::Projective: {
      // ||x ^ y|| through the Lagrange identity; accurate for nearby lines.
      double s = 0.0, nx = 0.0, ny = 0.0;
      for (int i = 0; i < m_; ++i) {
        nx += p[i] * p[i];
        ny += q[i] * q[i];
        for (int j = i + 1; j < m_; ++j) {
          const double w = p[i] * q[j] - p[j] * q[i];
          s += w * w;
        }
      }
      return std::min(1.0, std::sqrt(s / (nx * ny)));
    }
  }
  return 0.0;
}

double Space::diameter() const {
  switch (kind_) {
    case SpaceKind::Circle: return 0.5;
    case SpaceKind::Interval: return b_ - a_;
    case SpaceKind::Projective: return 1.0;
  }
  return 0.0;
}

SpacePoint Space::canonicalize(SpacePoint p) const {
  check_dim(p);
  switch (kind_) {
    case SpaceKind::Circle: {
      double x = p[0] - std::floor(p[0]);
      if (x >= 1.0) x = 0.0;
      p[0] = x;
      return p;
    }
    case SpaceKind::Interval:
      return p;
    case SpaceKind::Projective: {
      double n2 = 0.0;
      for (int i = 0; i < m_; ++i) n2 += p[i] * p[i];
      if (!(n2 > 0.0) || !std::isfinite(n2)) fail(ErrorKind::InvalidArgument, "projective point needs a nonzero finite vector");
      double inv = 1.0 / std::sqrt(n2);
      int lead = 0;
      while (lead < m_ && p[lead] == 0.0) ++lead;
      if (p[lead] < 0.0) inv = -inv;
      for (int i = 0; i < m_; ++i) p[i] *= inv;
      return p;
    }
  }
  return p;
}

SpacePoint Space::point(double x) const { return canonicalize(SpacePoint(x)); }

SpacePoint Space::point(std::span<const double> xs) const { return canonicalize(SpacePoint(xs)); }

bool Space::contains(const SpacePoint& p, double tol) const {
  if (p.dim() != point_dim()) return false;
  switch (kind_) {
    case SpaceKind::Circle: return std::isfinite(p[0]);
    case SpaceKind::Interval: return p[0] >= a_ - tol && p[0] <= b_ + tol;
    case SpaceKind::Projective: {
      double n2 = 0.0;
      for (int i = 0; i < m_; ++i) n2 += p[i] * p[i];
      return std::abs(std::sqrt(n2) - 1.0) <= 1e-12 + tol;
    }
  }
  return false;
}

double Space::line_coordinate(const SpacePoint& p) const {
  check_dim(p);
  switch (kind_) {
    case SpaceKind::Circle:
    case SpaceKind::Interval:
      return p[0];
    case SpaceKind::Projective: {
      if (m_ != 2) fail(ErrorKind::DimensionMismatch, "line coordinate needs a one-dimensional space");
      double t = std::atan2(p[1], p[0]) / std::numbers::pi;
      t -= std::floor(t);
      return t >= 1.0 ? 0.0 : t;
    }
  }
  return 0.0;
}

SpacePoint Space::from_line_coordinate(double t) const {
  switch (kind_) {
    case SpaceKind::Circle: return point(t);
    case SpaceKind::Interval: return SpacePoint(t);
    case SpaceKind::Projective: {
      if (m_ != 2) fail(ErrorKind::DimensionMismatch, "line coordinate needs a one-dimensional space");
      const double th = std::numbers::pi * t;
      const double xy[2] = {std::cos(th), std::sin(th)};
      return point(std::span<const double>(xy, 2));
    }
  }
  return {};
}

double Space::line_length() const { return kind_ == SpaceKind::Interval ? b_ - a_ : 1.0; }

std::string Space::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case SpaceKind::Circle: os << "Circle"; break;
    case SpaceKind::Interval: os << "Interval[" << a_ << "," << b_ << "]"; break;
    case SpaceKind::Projective: os << "Projective(" << m_ << ")"; break;
  }
  return os.str();
}

double covering_radius_estimate(const Space& space, std::span<const SpacePoint> net, std::size_t probes,
                                std::uint64_t seed) {
  CounterRng rng(seed, 0xC0FE);
  double worst = 0.0;
  for (std::size_t i = 0; i < probes; ++i) {
    const SpacePoint p = random_point(space, rng);
    double best = 2.0 * space.diameter() + 1.0;
    for (const auto& q : net) best = std::min(best, space.distance(p, q));
    worst = std::max(worst, best);
  }
  return worst;
}

std::vector<SpacePoint> epsilon_net(const Space& space, double eps, const NetOptions& options) {
  require(eps > 0.0 && std::isfinite(eps), "epsilon_net needs eps > 0");
  auto check_cap = [&](double count) {
    if (count > static_cast<double>(options.max_points))
      fail(ErrorKind::UnsupportedResolution,
           "net for " + space.describe() + " at eps=" + std::to_string(eps) + " exceeds " +
               std::to_string(options.max_points) + " points");
  };
  std::vector<SpacePoint> net;
  switch (space.kind()) {
    case SpaceKind::Circle: {
      const double count = std::ceil(1.0 / eps - 1e-12);
      check_cap(count);
      const auto n = static_cast<std::size_t>(count);
      for (std::size_t i = 0; i < n; ++i) net.emplace_back(static_cast<double>(i) / static_cast<double>(n));
      return net;
    }
    case SpaceKind::Interval: {
      const double len = space.upper() - space.lower();
      if (len == 0.0) return {SpacePoint(space.lower())};
      const double segments = std::ceil(len / eps - 1e-12);
      check_cap(segments + 1);
      const auto n = static_cast<std::size_t>(segments);
      for (std::size_t i = 0; i <= n; ++i)
        net.emplace_back(i == n ? space.upper() : space.lower() + len * static_cast<double>(i) / static_cast<double>(n));
      return net;
    }
    case SpaceKind::Projective: {
      if (space.ambient_dim() == 2) {
        // Angles spaced by asin(eps): the covering radius in |sin| is below eps.
        const double step = std::asin(std::min(eps, 1.0));
        const double count = std::ceil(std::numbers::pi / step - 1e-12);
        check_cap(count);
        const auto n = static_cast<std::size_t>(count);
        for (std::size_t i = 0; i < n; ++i)
          net.push_back(space.from_line_coordinate(static_cast<double>(i) / static_cast<double>(n)));
        return net;
      }
      // Greedy maximal eps-separated subset of a dense random sample, then
      // patch any audit point left uncovered.
      CounterRng rng(options.seed, 0x4E45);
      const std::size_t candidates = std::max<std::size_t>(20000, 40 * options.audit_points / 10);
      auto covered = [&](const SpacePoint& p) {
        for (const auto& q : net)
          if (space.distance(p, q) <= eps) return true;
        return false;
      };
      for (std::size_t i = 0; i < candidates; ++i) {
        const SpacePoint p = random_point(space, rng);
        if (!covered(p)) {
          net.push_back(p);
          check_cap(static_cast<double>(net.size()));
        }
      }
      for (int pass = 0; pass < 8; ++pass) {
        CounterRng audit(options.seed, 0xA0D1 + static_cast<std::uint64_t>(pass));
        bool clean = true;
        for (std::size_t i = 0; i < options.audit_points; ++i) {
          const SpacePoint p = random_point(space, audit);
          if (!covered(p)) {
            net.push_back(p);
            check_cap(static_cast<double>(net.size()));
            clean = false;
          }
        }
        if (clean) return net;
      }
      fail(ErrorKind::UnsupportedResolution, "projective net failed its covering audit");
    }
  }
  return net;
}

}  // namespace rmlab
