#include "rmlab/linear_cocycles.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rmlab/errors.hpp"
#include "rmlab/parallel.hpp"

namespace rmlab {

double spectral_norm(const Matrix& M) {
  if (M.rows() == 1 && M.cols() == 1) return std::abs(M(0, 0));
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0);
}

double exterior2_norm(const Matrix& M) {
  require(M.rows() == M.cols() && M.rows() >= 2, "exterior2_norm needs a square matrix with m >= 2");
  Eigen::JacobiSVD<Matrix> svd(M);
  return svd.singularValues()(0) * svd.singularValues()(1);
}

Cocycle::Cocycle(std::vector<Matrix> matrices, std::vector<double> weights)
    : matrices_(std::move(matrices)), weights_(std::move(weights)) {
  if (matrices_.empty() || matrices_.size() != weights_.size())
    fail(ErrorKind::ShapeMismatch, "cocycle needs one weight per matrix");
  validate_weights(weights_);
  dim_ = static_cast<int>(matrices_.front().rows());
  if (dim_ < 1 || dim_ > kMaxDim) fail(ErrorKind::DimensionMismatch, "cocycle dimension must be in [1, 8]");
  for (std::size_t i = 0; i < matrices_.size(); ++i) {
    const Matrix& M = matrices_[i];
    if (M.rows() != dim_ || M.cols() != dim_) fail(ErrorKind::ShapeMismatch, "all cocycle matrices must be square of one size");
    if (!M.allFinite()) fail(ErrorKind::InvalidArgument, "cocycle matrix has non-finite entries");
    Eigen::JacobiSVD<Matrix> svd(M);
    if (!(svd.singularValues()(dim_ - 1) > 1e-10)) {
      std::ostringstream os;
      os << "matrix " << i << " is not invertible (smallest singular value " << svd.singularValues()(dim_ - 1) << ")";
      fail(ErrorKind::InvalidArgument, os.str());
    }
    inverses_.push_back(M.inverse());
  }
}

double Cocycle::mean_log_abs_det() const {
  double s = 0.0;
  for (std::size_t i = 0; i < size(); ++i) s += weights_[i] * std::log(std::abs(matrices_[i].determinant()));
  return s;
}

Word sample_word(const Cocycle& cocycle, std::size_t n, std::uint64_t seed, std::uint64_t stream) {
  return sample_word(cocycle.weights(), n, seed, stream);
}

namespace {

void check_symbol(const Cocycle& c, std::uint32_t s) {
  if (s >= c.size()) fail(ErrorKind::InvalidArgument, "word symbol out of range");
}

}  // namespace

LogProduct log_product(const Cocycle& cocycle, const Word& word) {
  const int m = cocycle.dimension();
  LogProduct out{Matrix::Identity(m, m), 0.0};
  Matrix next(m, m);
  for (auto s : word.symbols) {
    check_symbol(cocycle, s);
    next.noalias() = cocycle.matrix(s) * out.normalized;
    const double nrm = spectral_norm(next);
    if (!(nrm > 1e-300) || !std::isfinite(nrm)) fail(ErrorKind::SingularProduct, "renormalized product degenerated");
    out.normalized = next / nrm;
    out.log_scale += std::log(nrm);
  }
  return out;
}

double log_vector_growth(const Cocycle& cocycle, const Word& word, const Vector& x) {
  require(x.size() == cocycle.dimension(), "vector dimension does not match the cocycle");
  require(std::abs(x.norm() - 1.0) <= 1e-9, "log_vector_growth needs a unit vector");
  Vector v = x, w(x.size());
  double total = 0.0;
  for (auto s : word.symbols) {
    check_symbol(cocycle, s);
    w.noalias() = cocycle.matrix(s) * v;
    const double nrm = w.norm();
    total += std::log(nrm);
    v = w / nrm;
  }
  return total;
}

SpectrumEstimate lyapunov_spectrum(const Cocycle& cocycle, int n, int trials, std::uint64_t seed, int workers) {
  require(n >= 10, "lyapunov_spectrum needs n >= 10");
  require(trials >= 1, "lyapunov_spectrum needs trials >= 1");
  const int m = cocycle.dimension();
  constexpr int kBlocks = 10;
  // blocks[trial][b][i]: log growth of direction i within block b.
  std::vector<std::vector<std::vector<double>>> blocks(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const auto sampler = cocycle.sampler(seed, t);
    Matrix q = Matrix::Identity(m, m);
    Matrix z(m, m);
    auto& out = blocks[t];
    out.assign(kBlocks, std::vector<double>(static_cast<std::size_t>(m), 0.0));
    for (int k = 0; k < n; ++k) {
      z.noalias() = cocycle.matrix(sampler(static_cast<std::uint64_t>(k))) * q;
      Eigen::HouseholderQR<Matrix> qr(z);
      const Matrix r = qr.matrixQR().triangularView<Eigen::Upper>();
      q = qr.householderQ();
      // Fix signs so that diag(R) > 0 and Q stays a continuous frame.
      const auto b = static_cast<std::size_t>(std::min(kBlocks - 1, k * kBlocks / n));
      for (int i = 0; i < m; ++i) {
        if (r(i, i) < 0) q.col(i) = -q.col(i);
        out[b][static_cast<std::size_t>(i)] += std::log(std::abs(r(i, i)));
      }
    }
  });
  SpectrumEstimate est;
  est.n = n;
  est.trials = trials;
  std::vector<double> rates;
  for (int i = 0; i < m; ++i) {
    rates.clear();
    double total = 0.0;
    for (const auto& tr : blocks) {
      for (int b = 0; b < kBlocks; ++b) {
        const int begin = (b * n + kBlocks - 1) / kBlocks;
        const int end = ((b + 1) * n + kBlocks - 1) / kBlocks;
        const double v = tr[static_cast<std::size_t>(b)][static_cast<std::size_t>(i)];
        total += v;
        if (end > begin) rates.push_back(v / (end - begin));
      }
    }
    est.exponents.push_back(total / (static_cast<double>(n) * trials));
    est.std_errors.push_back(std::sqrt(sample_variance(rates) / static_cast<double>(rates.size())));
  }
  // QR already orders the exponents for generic products; sort to make it exact.
  std::vector<std::size_t> order(static_cast<std::size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return est.exponents[a] > est.exponents[b]; });
  SpectrumEstimate sorted = est;
  for (std::size_t i = 0; i < order.size(); ++i) {
    sorted.exponents[i] = est.exponents[order[i]];
    sorted.std_errors[i] = est.std_errors[order[i]];
  }
  return sorted;
}

RandomMapSystem projective_system(const Cocycle& cocycle) {
  require(cocycle.dimension() >= 2, "projective_system needs dimension >= 2");
  const Space space = Space::projective(cocycle.dimension());
  std::vector<Atom> atoms;
  for (std::size_t i = 0; i < cocycle.size(); ++i)
    atoms.push_back({FiberMap(space, ProjectiveOfMatrix{cocycle.matrix(i)}), cocycle.weight(i)});
  return RandomMapSystem(space, std::move(atoms));
}

Cocycle restrict_to(const Cocycle& cocycle, const std::vector<Vector>& basis) {
  const int m = cocycle.dimension();
  require(!basis.empty() && basis.size() <= static_cast<std::size_t>(m), "restrict_to needs 1..m basis vectors");
  Matrix b(m, static_cast<Eigen::Index>(basis.size()));
  for (std::size_t j = 0; j < basis.size(); ++j) {
    if (basis[j].size() != m) fail(ErrorKind::DimensionMismatch, "basis vector dimension does not match the cocycle");
    b.col(static_cast<Eigen::Index>(j)) = basis[j];
  }
  Eigen::ColPivHouseholderQR<Matrix> qr(b);
  if (qr.rank() != b.cols()) fail(ErrorKind::InvalidArgument, "subspace basis is linearly dependent");
  const Matrix full_q = qr.householderQ();
  const Matrix u = full_q.leftCols(b.cols());
  const Matrix proj_out = Matrix::Identity(m, m) - u * u.transpose();
  std::vector<Matrix> restricted;
  for (std::size_t i = 0; i < cocycle.size(); ++i) {
    const Matrix& M = cocycle.matrix(i);
    for (std::size_t j = 0; j < basis.size(); ++j) {
      const Vector bj = basis[j] / basis[j].norm();
      const double residual = (proj_out * (M * bj)).norm();
      if (residual > 1e-9) {
        std::ostringstream os;
        os << "atom " << i << " moves basis vector " << j << " off the subspace (residual " << residual << ")";
        fail(ErrorKind::NotInvariant, os.str());
      }
    }
    restricted.push_back(u.transpose() * M * u);
  }
  return Cocycle(std::move(restricted), std::vector<double>(cocycle.weights().begin(), cocycle.weights().end()));
}

double cocycle_distance(const Cocycle& a, const Cocycle& b, bool plus_minus) {
  if (a.dimension() != b.dimension() || a.size() != b.size())
    fail(ErrorKind::ShapeMismatch, "cocycle_distance needs equal dimensions and paired atoms");
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double term = spectral_norm(a.matrix(i) - b.matrix(i));
    if (plus_minus) term += spectral_norm(a.inverse(i) - b.inverse(i));
    d += a.weight(i) * term;
  }
  return d;
}

double furstenberg_integrand(const Cocycle& cocycle, const Vector& x) {
  double s = 0.0;
  for (std::size_t t = 0; t < cocycle.size(); ++t) s += cocycle.weight(t) * std::log((cocycle.matrix(t) * x).norm());
  return s;
}

Estimate furstenberg_estimate(const Cocycle& cocycle, const FurstenbergOptions& options) {
  require(options.samples >= 100, "furstenberg_estimate needs samples >= 100");
  require(options.burn_in >= 0, "burn_in must be nonnegative");
  const int m = cocycle.dimension();
  const auto sampler = cocycle.sampler(options.seed, options.stream);
  Vector x(m);
  if (options.start) {
    require(options.start->size() == m, "start vector dimension does not match the cocycle");
    x = *options.start / options.start->norm();
  } else {
    CounterRng rng(options.seed, derive_stream(options.stream, 0x57A7));
    const SpacePoint p = random_point(Space::projective(std::max(m, 2)), rng);
    for (int i = 0; i < m; ++i) x(i) = p[i];
    x /= x.norm();
  }
  Vector y(m);
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(options.samples));
  const auto total = static_cast<std::uint64_t>(options.burn_in) + static_cast<std::uint64_t>(options.samples);
  for (std::uint64_t k = 0; k < total; ++k) {
    if (k >= static_cast<std::uint64_t>(options.burn_in)) values.push_back(furstenberg_integrand(cocycle, x));
    y.noalias() = cocycle.matrix(sampler(k)) * x;
    x = y / y.norm();
  }
  return batch_mean_estimate(values, 20);
}

}  // namespace rmlab
