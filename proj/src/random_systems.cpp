#include "rmlab/random_systems.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rmlab/errors.hpp"

namespace rmlab {

namespace {

constexpr double kEscapeTol = 1e-9;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

// Segment of a tabulated map containing x, as (x0, y0, x1, y1).
std::array<double, 4> tabulated_segment(const UserTabulated& t, double x, bool periodic) {
  const auto& xs = t.xs;
  const auto& ys = t.ys;
  if (periodic) {
    if (x < xs.front()) return {xs.back() - 1.0, ys.back() - 1.0, xs.front(), ys.front()};
    if (x >= xs.back()) return {xs.back(), ys.back(), xs.front() + 1.0, ys.front() + 1.0};
  }
  auto it = std::upper_bound(xs.begin(), xs.end(), x);
  std::size_t hi = static_cast<std::size_t>(it - xs.begin());
  hi = std::clamp<std::size_t>(hi, 1, xs.size() - 1);
  return {xs[hi - 1], ys[hi - 1], xs[hi], ys[hi]};
}

double tabulated_eval(const UserTabulated& t, double x, bool periodic) {
  const auto [x0, y0, x1, y1] = tabulated_segment(t, x, periodic);
  return y0 + (y1 - y0) * (x - x0) / (x1 - x0);
}

double spectral_norm(const Matrix& M) {
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

}  // namespace

double projective_derivative_norm(const Matrix& M, std::span<const double> x) {
  const auto m = M.rows();
  Eigen::Map<const Vector> xv(x.data(), m);
  if (m == 2) {
    const double n0 = M(0, 0) * x[0] + M(0, 1) * x[1];
    const double n1 = M(1, 0) * x[0] + M(1, 1) * x[1];
    const double det = M(0, 0) * M(1, 1) - M(0, 1) * M(1, 0);
    return std::abs(det) / (n0 * n0 + n1 * n1);
  }
  const Vector mx = M * xv;
  const double len = mx.norm();
  const Vector u = mx / len;
  const Matrix pu = Matrix::Identity(m, m) - u * u.transpose();
  const Matrix px = Matrix::Identity(m, m) - xv * xv.transpose();
  return spectral_norm(pu * M * px) / len;
}

FiberMap::FiberMap(Space space, FiberFamily family) : space_(std::move(space)), family_(std::move(family)) {
  std::visit(Overloaded{
                 [&](const AffineInterval& f) {
                   require(space_.kind() == SpaceKind::Interval, "AffineInterval needs an Interval space");
                   require(std::isfinite(f.a) && std::isfinite(f.b), "AffineInterval coefficients must be finite");
                 },
                 [&](const CircleWave& f) {
                   require(space_.kind() == SpaceKind::Circle, "CircleWave needs the Circle space");
                   require(f.k >= 1, "CircleWave needs k >= 1");
                   require(std::isfinite(f.rho) && std::isfinite(f.c), "CircleWave parameters must be finite");
                 },
                 [&](const ProjectiveOfMatrix& f) {
                   require(space_.kind() == SpaceKind::Projective, "ProjectiveOfMatrix needs a Projective space");
                   if (f.M.rows() != space_.ambient_dim() || f.M.cols() != space_.ambient_dim())
                     fail(ErrorKind::DimensionMismatch, "matrix size does not match " + space_.describe());
                   Eigen::JacobiSVD<Matrix> svd(f.M);
                   if (!(svd.singularValues()(f.M.rows() - 1) > 1e-10))
                     fail(ErrorKind::InvalidArgument, "ProjectiveOfMatrix needs an invertible matrix");
                   inverse_ = f.M.inverse();
                 },
                 [&](const UserTabulated& f) {
                   require(space_.kind() != SpaceKind::Projective, "UserTabulated supports Circle and Interval");
                   require(f.xs.size() >= 2 && f.xs.size() == f.ys.size(), "UserTabulated needs >= 2 matching knots");
                   require(std::is_sorted(f.xs.begin(), f.xs.end()) &&
                               std::adjacent_find(f.xs.begin(), f.xs.end()) == f.xs.end(),
                           "UserTabulated knots must be strictly increasing");
                   if (space_.kind() == SpaceKind::Interval) {
                     require(f.xs.front() == space_.lower() && f.xs.back() == space_.upper(),
                             "UserTabulated knots must span the interval");
                   } else {
                     require(f.xs.front() >= 0.0 && f.xs.back() < 1.0, "circle knots must lie in [0,1)");
                   }
                 },
             },
             family_);
  lipschitz_ = compute_lipschitz();
  if (space_.kind() == SpaceKind::Interval) {
    for (const auto& p : epsilon_net(space_, std::max(1e-2 * (space_.upper() - space_.lower()), 1e-12))) {
      const double y = apply_lift(p[0]);
      if (!(y >= space_.lower() - kEscapeTol && y <= space_.upper() + kEscapeTol)) {
        std::ostringstream os;
        os << tag() << " maps " << p[0] << " to " << y << " outside " << space_.describe();
        fail(ErrorKind::EscapedSpace, os.str());
      }
    }
  }
}

std::string FiberMap::tag() const {
  return std::visit(Overloaded{
                        [](const AffineInterval&) { return std::string("affine"); },
                        [](const CircleWave&) { return std::string("circle_wave"); },
                        [](const ProjectiveOfMatrix&) { return std::string("projective_matrix"); },
                        [](const UserTabulated&) { return std::string("tabulated"); },
                    },
                    family_);
}

double FiberMap::apply_lift(double x) const {
  return std::visit(Overloaded{
                        [&](const AffineInterval& f) { return f.a * x + f.b; },
                        [&](const CircleWave& f) {
                          return x + f.rho + f.c / (kTwoPi * f.k) * std::sin(kTwoPi * f.k * x);
                        },
                        [&](const ProjectiveOfMatrix&) -> double {
                          fail(ErrorKind::DimensionMismatch, "apply_lift is for one-dimensional families");
                        },
                        [&](const UserTabulated& f) {
                          return tabulated_eval(f, x, space_.kind() == SpaceKind::Circle);
                        },
                    },
                    family_);
}

SpacePoint FiberMap::apply(const SpacePoint& x) const {
  if (const auto* pm = std::get_if<ProjectiveOfMatrix>(&family_)) {
    const auto m = pm->M.rows();
    SpacePoint y;
    y.set_dim(static_cast<int>(m));
    Eigen::Map<const Vector> xv(x.data(), m);
    Eigen::Map<Vector> yv(y.data(), m);
    yv.noalias() = pm->M * xv;
    return space_.canonicalize(y);
  }
  const double y = apply_lift(x[0]);
  if (space_.kind() == SpaceKind::Circle) {
    double w = y - std::floor(y);
    return SpacePoint(w >= 1.0 ? 0.0 : w);
  }
  if (!(y >= space_.lower() - kEscapeTol && y <= space_.upper() + kEscapeTol)) {
    std::ostringstream os;
    os << tag() << " maps " << x[0] << " to " << y << " outside " << space_.describe();
    fail(ErrorKind::EscapedSpace, os.str());
  }
  return SpacePoint(std::clamp(y, space_.lower(), space_.upper()));
}

std::optional<double> FiberMap::derivative_1d(double x) const {
  return std::visit(Overloaded{
                        [&](const AffineInterval& f) -> std::optional<double> { return f.a; },
                        [&](const CircleWave& f) -> std::optional<double> {
                          return 1.0 + f.c * std::cos(kTwoPi * f.k * x);
                        },
                        [&](const ProjectiveOfMatrix&) -> std::optional<double> { return std::nullopt; },
                        [&](const UserTabulated&) -> std::optional<double> { return std::nullopt; },
                    },
                    family_);
}

std::optional<double> FiberMap::derivative_norm(const SpacePoint& x) const {
  if (const auto* pm = std::get_if<ProjectiveOfMatrix>(&family_))
    return projective_derivative_norm(pm->M, x.coords());
  if (auto d = derivative_1d(x[0])) return std::abs(*d);
  return std::nullopt;
}

double FiberMap::compute_lipschitz() const {
  return std::visit(Overloaded{
                        [](const AffineInterval& f) { return std::abs(f.a); },
                        // sup |1 + c cos(2 pi k x)| is attained where cos = sign(c).
                        [](const CircleWave& f) { return 1.0 + std::abs(f.c); },
                        [&](const ProjectiveOfMatrix& f) {
                          const double a = spectral_norm(f.M);
                          const double b = spectral_norm(inverse_);
                          return a * a * b * b;
                        },
                        [&](const UserTabulated& f) {
                          const bool periodic = space_.kind() == SpaceKind::Circle;
                          double best = 0.0;
                          for (std::size_t i = 0; i + 1 < f.xs.size(); ++i)
                            best = std::max(best, std::abs((f.ys[i + 1] - f.ys[i]) / (f.xs[i + 1] - f.xs[i])));
                          if (periodic)
                            best = std::max(best, std::abs((f.ys.front() + 1.0 - f.ys.back()) /
                                                           (f.xs.front() + 1.0 - f.xs.back())));
                          return best;
                        },
                    },
                    family_);
}

double global_lipschitz(const FiberMap& fm) { return fm.lipschitz_bound(); }

void validate_weights(std::span<const double> weights) {
  if (weights.empty()) fail(ErrorKind::InvalidArgument, "weights: at least one atom is required");
  if (weights.size() > kMaxAtoms) fail(ErrorKind::InvalidArgument, "weights: at most 64 atoms are supported");
  double total = 0.0;
  for (double w : weights) {
    if (!(w > 0.0) || !std::isfinite(w)) fail(ErrorKind::InvalidArgument, "weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) {
    std::ostringstream os;
    os.precision(17);
    os << "weights sum to " << total << ", expected 1";
    fail(ErrorKind::InvalidArgument, os.str());
  }
}

SymbolSampler::SymbolSampler(std::span<const double> weights, std::uint64_t seed, std::uint64_t stream)
    : seed_(seed), stream_(stream) {
  cumulative_.reserve(weights.size());
  double acc = 0.0;
  for (double w : weights) cumulative_.push_back(acc += w);
  cumulative_.back() = 2.0;  // absorbs rounding in the total
}

std::uint32_t SymbolSampler::operator()(std::uint64_t k) const {
  if (cumulative_.size() == 1) return 0;
  const double u = uniform_at(seed_, stream_, k);
  std::uint32_t i = 0;
  while (u >= cumulative_[i]) ++i;
  return i;
}

RandomMapSystem::RandomMapSystem(Space space, std::vector<Atom> atoms) : space_(std::move(space)), atoms_(std::move(atoms)) {
  for (const auto& a : atoms_) {
    if (!(a.map.space() == space_)) fail(ErrorKind::InvalidArgument, "all fiber maps must act on " + space_.describe());
    weights_.push_back(a.weight);
  }
  validate_weights(weights_);
}

bool RandomMapSystem::has_derivatives() const {
  return std::all_of(atoms_.begin(), atoms_.end(), [](const Atom& a) { return a.map.has_derivative(); });
}

Word sample_word(std::span<const double> weights, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  const SymbolSampler sampler(weights, seed, stream);
  Word w{std::vector<std::uint32_t>(n), seed, stream};
  for (std::size_t k = 0; k < n; ++k) w.symbols[k] = sampler(k);
  return w;
}

Word sample_word(const RandomMapSystem& system, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  return sample_word(system.weights(), n, seed, stream);
}

SpacePoint step(const RandomMapSystem& system, std::uint32_t symbol, const SpacePoint& x) {
  if (symbol >= system.size()) fail(ErrorKind::InvalidArgument, "word symbol out of range");
  return system.map(symbol).apply(x);
}

std::vector<SpacePoint> iterate(const RandomMapSystem& system, const Word& word, const SpacePoint& x) {
  if (!system.space().contains(x)) fail(ErrorKind::DimensionMismatch, "start point is not in " + system.space().describe());
  std::vector<SpacePoint> orbit;
  orbit.reserve(word.size() + 1);
  orbit.push_back(x);
  for (auto s : word.symbols) orbit.push_back(step(system, s, orbit.back()));
  return orbit;
}

double log_local_lipschitz_along(const RandomMapSystem& system, const Word& word, const SpacePoint& x) {
  SpacePoint p = x;
  double total = 0.0;
  for (auto s : word.symbols) {
    if (s >= system.size()) fail(ErrorKind::InvalidArgument, "word symbol out of range");
    const FiberMap& f = system.map(s);
    const auto d = f.derivative_norm(p);
    if (!d) fail(ErrorKind::InvalidArgument, f.tag() + " has no analytic derivative; use the finite-difference estimate");
    if (*d == 0.0) fail(ErrorKind::ZeroDerivative, f.tag() + " has zero derivative along the orbit");
    total += std::log(*d);
    p = f.apply(p);
  }
  return total;
}

namespace {

SpacePoint apply_word(const RandomMapSystem& system, const Word& word, SpacePoint p) {
  for (auto s : word.symbols) p = step(system, s, p);
  return p;
}

double fd_at(const RandomMapSystem& system, const Word& word, const SpacePoint& x, double h) {
  const Space& space = system.space();
  if (space.kind() != SpaceKind::Projective) {
    double lo = x[0] - h, hi = x[0] + h;
    if (space.kind() == SpaceKind::Interval) {
      lo = std::max(lo, space.lower());
      hi = std::min(hi, space.upper());
    }
    const SpacePoint a = apply_word(system, word, space.point(lo));
    const SpacePoint b = apply_word(system, word, space.point(hi));
    return space.distance(a, b) / space.distance(space.point(lo), space.point(hi));
  }
  const int m = space.ambient_dim();
  Eigen::Map<const Vector> xv(x.data(), m);
  // Orthonormal basis of the tangent space x^perp.
  Matrix basis = Matrix::Identity(m, m);
  basis.col(0) = xv;
  Eigen::HouseholderQR<Matrix> qr(basis);
  const Matrix q = qr.householderQ();
  const SpacePoint y0 = apply_word(system, word, x);
  Eigen::Map<const Vector> y0v(y0.data(), m);
  Matrix jac(m, m - 1);
  for (int j = 1; j < m; ++j) {
    Vector vp = xv + h * q.col(j);
    Vector vm = xv - h * q.col(j);
    SpacePoint pp = space.point(std::span<const double>(vp.data(), static_cast<std::size_t>(m)));
    SpacePoint pm = space.point(std::span<const double>(vm.data(), static_cast<std::size_t>(m)));
    SpacePoint ip = apply_word(system, word, pp);
    SpacePoint im = apply_word(system, word, pm);
    Vector a = Eigen::Map<const Vector>(ip.data(), m);
    Vector b = Eigen::Map<const Vector>(im.data(), m);
    if (a.dot(y0v) < 0) a = -a;
    if (b.dot(y0v) < 0) b = -b;
    Vector col = (a - b) / (2.0 * h);
    col -= col.dot(y0v) * y0v;
    jac.col(j - 1) = col;
  }
  return spectral_norm(jac);
}

}  // namespace

FdEstimate fd_local_lipschitz_along(const RandomMapSystem& system, const Word& word, const SpacePoint& x,
                                    const FdOptions& options) {
  require(options.step > 0.0, "finite-difference step must be positive");
  return {fd_at(system, word, x, options.step), fd_at(system, word, x, 0.5 * options.step), options.step};
}

double local_lipschitz_along(const RandomMapSystem& system, const Word& word, const SpacePoint& x,
                             bool allow_fd_fallback) {
  if (system.has_derivatives()) return std::exp(log_local_lipschitz_along(system, word, x));
  if (!allow_fd_fallback)
    fail(ErrorKind::InvalidArgument, "system has atoms without analytic derivatives and the fallback is disabled");
  return fd_local_lipschitz_along(system, word, x).value;
}

}  // namespace rmlab
