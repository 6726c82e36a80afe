#include "rmlab/limit_stats.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <sstream>

#include "rmlab/errors.hpp"
#include "rmlab/parallel.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

SnSource SnSource::from_cocycle(const Cocycle& cocycle, const Vector& x) {
  require(x.size() == cocycle.dimension(), "start vector dimension does not match the cocycle");
  require(std::abs(x.norm() - 1.0) <= 1e-12, "start vector must be a unit vector");
  SnSource s;
  s.cocycle_ = std::make_shared<const Cocycle>(cocycle);
  s.x_ = x;
  return s;
}

SnSource SnSource::from_system(const RandomMapSystem& system, const SpacePoint& x) {
  require(system.space().contains(x), "start point is not in the space");
  require(system.has_derivatives(), "S_n needs analytic derivatives for every atom");
  SnSource s;
  s.system_ = std::make_shared<const RandomMapSystem>(system);
  s.point_ = x;
  return s;
}

SnSource SnSource::rademacher() { return SnSource{}; }

bool SnSource::deterministic() const {
  if (cocycle_) return cocycle_->size() == 1;
  if (system_) return system_->size() == 1;
  return false;
}

std::string SnSource::describe() const {
  if (cocycle_) return "cocycle";
  if (system_) return "random-map";
  return "rademacher";
}

double SnSource::sample(int n, std::uint64_t seed, std::uint64_t stream) const {
  if (cocycle_) return log_vector_growth(*cocycle_, sample_word(*cocycle_, static_cast<std::size_t>(n), seed, stream), x_);
  if (system_) {
    const RandomMapSystem& s = *system_;
    const auto sampler = s.sampler(seed, stream);
    SpacePoint p = point_;
    std::vector<double> logs(static_cast<std::size_t>(n));
    for (int k = 0; k < n; ++k) {
      const FiberMap& f = s.map(sampler(static_cast<std::uint64_t>(k)));
      const double d = *f.derivative_norm(p);
      if (!(d > 0.0)) fail(ErrorKind::ZeroDerivative, "derivative vanished along the orbit");
      logs[static_cast<std::size_t>(k)] = std::log(d);
      p = f.apply(p);
    }
    return pairwise_sum(logs);
  }
  // +-1 steps from the bits of consecutive Philox blocks.
  long long sum = 0;
  int left = n;
  for (std::uint64_t k = 0; left > 0; ++k) {
    const auto b = philox_block(seed, stream, k);
    for (int lane = 0; lane < 4 && left > 0; ++lane) {
      const int take = std::min(left, 32);
      const std::uint32_t mask = take == 32 ? 0xFFFFFFFFu : ((1u << take) - 1u);
      sum += 2LL * std::popcount(b[static_cast<std::size_t>(lane)] & mask) - take;
      left -= take;
    }
  }
  return static_cast<double>(sum);
}

SnSamples collect_sn(const SnSource& source, const std::vector<int>& n_list, int trials, const LambdaHat& lambda_hat,
                     std::uint64_t seed, const SnOptions& options) {
  require(!n_list.empty(), "n_list is empty");
  for (int n : n_list) require(n >= 1, "every n must be >= 1");
  require(trials >= 1 && static_cast<std::size_t>(trials) >= options.min_trials, "too few trials for a limit theorem");
  require(std::isfinite(lambda_hat.value) && lambda_hat.std_error >= 0.0, "lambda_hat needs a finite value and stderr");
  SnSamples out;
  out.n_list = n_list;
  out.trials = trials;
  out.seed = seed;
  out.lambda_hat = lambda_hat;
  out.s.assign(n_list.size(), std::vector<double>(static_cast<std::size_t>(trials)));
  out.z = out.s;
  const std::size_t total = n_list.size() * static_cast<std::size_t>(trials);
  parallel_for(total, options.workers, [&](std::size_t idx) {
    const std::size_t j = idx / static_cast<std::size_t>(trials);
    const std::size_t t = idx % static_cast<std::size_t>(trials);
    const int n = n_list[j];
    const double s = source.sample(n, seed, derive_stream(j, t));
    out.s[j][t] = s;
    out.z[j][t] = (s - n * lambda_hat.value) / std::sqrt(static_cast<double>(n));
  });
  return out;
}

namespace {

// Delete-a-group jackknife standard error of the sample variance.
double jackknife_variance_stderr(const std::vector<double>& xs, std::size_t groups = 20) {
  groups = std::min(groups, xs.size());
  if (groups < 2) return 0.0;
  const std::size_t per = xs.size() / groups;
  std::vector<double> leave_out(groups);
  std::vector<double> rest;
  rest.reserve(xs.size());
  for (std::size_t g = 0; g < groups; ++g) {
    const std::size_t begin = g * per;
    const std::size_t end = g + 1 == groups ? xs.size() : begin + per;
    rest.clear();
    rest.insert(rest.end(), xs.begin(), xs.begin() + static_cast<long>(begin));
    rest.insert(rest.end(), xs.begin() + static_cast<long>(end), xs.end());
    leave_out[g] = sample_variance(rest);
  }
  const double g = static_cast<double>(groups);
  return std::sqrt((g - 1.0) / g * sample_variance(leave_out) * (g - 1.0));
}

}  // namespace

CltReport clt_test(const SnSamples& samples, double degenerate_below) {
  CltReport report;
  for (std::size_t j = 0; j < samples.n_list.size(); ++j) {
    const auto& z = samples.z[j];
    CltRow row;
    row.n = samples.n_list[j];
    row.mean = mean(z);
    row.variance = sample_variance(z);
    row.variance_stderr = jackknife_variance_stderr(z);
    row.degenerate = row.variance < degenerate_below;
    const double lam = std::sqrt(static_cast<double>(row.n)) * samples.lambda_hat.std_error;
    row.mean_band = 3.0 * std::sqrt(row.variance / static_cast<double>(z.size()) + lam * lam) + 1e-12;
    row.centered = std::abs(row.mean) <= row.mean_band;
    row.ks = row.degenerate ? 0.0 : ks_distance_normal(z, 0.0, std::sqrt(row.variance));
    report.rows.push_back(row);
  }
  if (report.rows.size() >= 2) {
    const auto& a = report.rows[report.rows.size() - 2];
    const auto& b = report.rows.back();
    report.variance_stable =
        std::abs(b.variance - a.variance) <= 4.0 * (a.variance_stderr + b.variance_stderr) + 1e-12;
  }
  return report;
}

BerryEsseenFit berry_esseen_fit(const SnSamples& samples, double degenerate_below) {
  require(samples.n_list.size() >= 3, "Berry-Esseen fit needs at least three values of n");
  BerryEsseenFit fit;
  std::vector<double> lx, ly;
  for (std::size_t j = 0; j < samples.n_list.size(); ++j) {
    const auto& z = samples.z[j];
    const double var = sample_variance(z);
    if (var < degenerate_below) {
      std::ostringstream os;
      os << "sample variance " << var << " at n=" << samples.n_list[j] << " is degenerate";
      fail(ErrorKind::DegenerateVariance, os.str());
    }
    const double gap = ks_distance_normal(z, 0.0, std::sqrt(var));
    fit.n.push_back(samples.n_list[j]);
    fit.gap.push_back(gap);
    lx.push_back(std::log(static_cast<double>(samples.n_list[j])));
    ly.push_back(std::log(gap));
  }
  const LinearFit lf = fit_line(lx, ly);
  fit.slope = lf.slope;
  fit.intercept = lf.intercept;
  fit.slope_stderr = lf.slope_stderr;
  return fit;
}

DeviationFit large_deviation_fit(const SnSamples& samples, const std::vector<double>& eps_list,
                                 const DeviationOptions& options) {
  require(!eps_list.empty() && std::is_sorted(eps_list.begin(), eps_list.end()), "eps_list must be ascending");
  for (double e : eps_list) require(e > 0.0, "eps values must be positive");
  DeviationFit fit;
  const double lam = samples.lambda_hat.value;
  for (double eps : eps_list) {
    DeviationRate rate;
    rate.eps = eps;
    std::vector<double> xs, ys, ws;
    for (std::size_t j = 0; j < samples.n_list.size(); ++j) {
      const int n = samples.n_list[j];
      DeviationCell cell;
      cell.n = n;
      cell.eps = eps;
      for (double s : samples.s[j])
        if (std::abs(s / n - lam) > eps) ++cell.count;
      cell.p_hat = static_cast<double>(cell.count) / static_cast<double>(samples.s[j].size());
      cell.usable = cell.count >= options.min_count;
      if (cell.usable) {
        xs.push_back(n);
        ys.push_back(std::log(cell.p_hat));
        // Delta method: Var(log p_hat) ~ (1 - p) / count.
        ws.push_back(static_cast<double>(cell.count) / std::max(1.0 - cell.p_hat, 1e-12));
      }
      fit.cells.push_back(cell);
    }
    rate.usable_n = xs.size();
    if (xs.size() >= 3) {
      rate.strictly_decreasing = true;
      for (std::size_t i = 1; i < ys.size(); ++i)
        if (!(ys[i] < ys[i - 1])) rate.strictly_decreasing = false;
      const LinearFit lf = fit_line(xs, ys, ws);
      rate.h_hat = -lf.slope / (eps * eps);
      rate.h_stderr = lf.slope_stderr / (eps * eps);
    } else {
      fit.insufficient_tail_mass = true;
    }
    fit.rates.push_back(rate);
  }
  for (std::size_t i = 2; i < fit.rates.size(); ++i) {
    const auto& a = fit.rates[i - 2];
    const auto& b = fit.rates[i - 1];
    const auto& c = fit.rates[i];
    if (a.h_hat && b.h_hat && c.h_hat)
      fit.convexity.push_back(c.eps * c.eps * *c.h_hat - 2.0 * b.eps * b.eps * *b.h_hat + a.eps * a.eps * *a.h_hat);
  }
  if (options.strict && fit.insufficient_tail_mass) {
    fail(ErrorKind::InsufficientTailMass, "fewer than three values of n reach the minimum tail count for some eps");
  }
  return fit;
}

DeviationFit large_deviation_fit(const SnSource& source, const std::vector<double>& eps_list,
                                 const std::vector<int>& n_list, int trials, const LambdaHat& lambda_hat,
                                 std::uint64_t seed, const DeviationOptions& options) {
  SnOptions so;
  so.min_trials = 1;
  so.workers = options.workers;
  return large_deviation_fit(collect_sn(source, n_list, trials, lambda_hat, seed, so), eps_list, options);
}

SllnResult slln_check(const SnSource& source, int n_big, int trials, const LambdaHat& lambda_hat, std::uint64_t seed,
                      int workers) {
  require(n_big >= 1000, "the strong-law audit needs n >= 1000");
  SnOptions so;
  so.min_trials = 1;
  so.workers = workers;
  const SnSamples samples = collect_sn(source, {n_big}, trials, lambda_hat, seed, so);
  SllnResult r;
  r.n = n_big;
  r.trials = trials;
  r.sigma_hat = std::sqrt(sample_variance(samples.z[0]));
  r.band = 3.0 * r.sigma_hat / std::sqrt(static_cast<double>(n_big)) + 3.0 * lambda_hat.std_error + 1e-9;
  std::size_t inside = 0;
  for (double s : samples.s[0])
    if (std::abs(s / n_big - lambda_hat.value) < r.band) ++inside;
  r.fraction = static_cast<double>(inside) / static_cast<double>(trials);
  return r;
}

}  // namespace rmlab
