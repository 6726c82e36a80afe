#pragma once

// Small numerical helpers shared by the estimators.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <span>
#include <vector>

namespace rmlab {

struct Estimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

/// Pairwise (cascade) summation; stable and order-deterministic.
inline double pairwise_sum(std::span<const double> xs) {
  if (xs.size() <= 16) {
    double s = 0.0;
    for (double x : xs) s += x;
    return s;
  }
  const std::size_t half = xs.size() / 2;
  return pairwise_sum(xs.first(half)) + pairwise_sum(xs.subspan(half));
}

inline double mean(std::span<const double> xs) {
  return xs.empty() ? 0.0 : pairwise_sum(xs) / static_cast<double>(xs.size());
}

/// Unbiased sample variance (0 for fewer than two values).
inline double sample_variance(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs[0]; })) return 0.0;
  const double m = mean(xs);
  std::vector<double> sq(xs.size());
  for (std::size_t i = 0; i < xs.size(); ++i) sq[i] = (xs[i] - m) * (xs[i] - m);
  return pairwise_sum(sq) / static_cast<double>(xs.size() - 1);
}

/// Mean with the standard error of the batch means. Batches are contiguous
/// blocks; identical batches give a zero error.
inline Estimate batch_mean_estimate(std::span<const double> xs, std::size_t batches = 20) {
  Estimate e;
  e.samples = xs.size();
  if (xs.empty()) return e;
  e.value = mean(xs);
  batches = std::min(batches, xs.size());
  if (batches < 2) return e;
  const std::size_t per = xs.size() / batches;
  std::vector<double> bm(batches);
  for (std::size_t b = 0; b < batches; ++b) {
    const std::size_t begin = b * per;
    const std::size_t end = (b + 1 == batches) ? xs.size() : begin + per;
    bm[b] = mean(xs.subspan(begin, end - begin));
  }
  e.std_error = std::sqrt(sample_variance(bm) / static_cast<double>(batches));
  return e;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// sup_u |F_n(u) - Phi((u - mu)/sigma)| of the empirical distribution.
inline double ks_distance_normal(std::vector<double> xs, double mu = 0.0, double sigma = 1.0) {
  if (xs.empty()) return 1.0;
  std::sort(xs.begin(), xs.end());
  const double n = static_cast<double>(xs.size());
  double d = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double f = normal_cdf((xs[i] - mu) / sigma);
    d = std::max({d, static_cast<double>(i + 1) / n - f, f - static_cast<double>(i) / n});
  }
  return d;
}

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double residual_rms = 0.0;
  std::size_t points = 0;
};

/// Weighted least squares y ~ intercept + slope * x (unit weights by default).
inline LinearFit fit_line(std::span<const double> x, std::span<const double> y,
                          std::span<const double> w = {}) {
  LinearFit f;
  const std::size_t n = std::min(x.size(), y.size());
  f.points = n;
  if (n < 2) return f;
  double sw = 0, sx = 0, sy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sw += wi;
    sx += wi * x[i];
    sy += wi * y[i];
  }
  const double mx = sx / sw, my = sy / sw;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double wi = w.empty() ? 1.0 : w[i];
    sxx += wi * (x[i] - mx) * (x[i] - mx);
    sxy += wi * (x[i] - mx) * (y[i] - my);
  }
  if (sxx <= 0) return f;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = y[i] - f.intercept - f.slope * x[i];
    ss += (w.empty() ? 1.0 : w[i]) * r * r;
  }
  f.residual_rms = std::sqrt(ss / sw);
  if (n > 2) {
    if (w.empty()) {
      f.slope_stderr = std::sqrt(ss / static_cast<double>(n - 2) / sxx);
    } else {
      // Weights are inverse variances: the slope error follows from them directly.
      f.slope_stderr = std::sqrt(1.0 / sxx);
    }
  }
  return f;
}

}  // namespace rmlab
