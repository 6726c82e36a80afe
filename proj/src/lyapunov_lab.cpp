#include "rmlab/lyapunov_lab.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "rmlab/errors.hpp"
#include "rmlab/parallel.hpp"

namespace rmlab {

namespace {

double log_lipschitz_run(const RandomMapSystem& system, const SymbolSampler& sampler, SpacePoint p, int n) {
  double total = 0.0;
  for (int k = 0; k < n; ++k) {
    const FiberMap& f = system.map(sampler(static_cast<std::uint64_t>(k)));
    const double d = *f.derivative_norm(p);
    if (d == 0.0) fail(ErrorKind::ZeroDerivative, f.tag() + " has zero derivative along the orbit");
    total += std::log(d);
    p = f.apply(p);
  }
  return total;
}

double log_lipschitz_word(const RandomMapSystem& system, const Word& word, const SpacePoint& x) {
  if (system.has_derivatives()) return log_local_lipschitz_along(system, word, x);
  const double v = fd_local_lipschitz_along(system, word, x).value;
  if (v == 0.0) fail(ErrorKind::ZeroDerivative, "finite-difference Lipschitz estimate vanished");
  return std::log(v);
}

bool enumerable(std::size_t atoms, int n, std::size_t limit) {
  double count = 1.0;
  for (int k = 0; k < n; ++k) {
    count *= static_cast<double>(atoms);
    if (count > static_cast<double>(limit)) return false;
  }
  return true;
}

// 16 boundary points of the delta-ball around x plus the center (first).
std::vector<SpacePoint> ball_points(const Space& space, const SpacePoint& x, double delta, std::uint64_t seed) {
  std::vector<SpacePoint> pts{x};
  constexpr int kBoundary = 16;
  if (space.one_dimensional()) {
    double radius = delta;
    if (space.kind() == SpaceKind::Projective) radius = std::asin(std::min(delta, 1.0)) / std::numbers::pi;
    const double t = space.line_coordinate(x);
    for (int j = 0; j < kBoundary; ++j) {
      const double s = -1.0 + 2.0 * j / (kBoundary - 1);
      double u = t + s * radius;
      if (space.kind() == SpaceKind::Interval) u = std::clamp(u, space.lower(), space.upper());
      pts.push_back(space.from_line_coordinate(u));
    }
    return pts;
  }
  const int m = space.ambient_dim();
  CounterRng rng(seed, 0xBA11);
  const double th = std::asin(std::min(delta, 1.0));
  for (int j = 0; j < kBoundary; ++j) {
    const SpacePoint v = random_point(space, rng);
    double dot = 0.0;
    for (int i = 0; i < m; ++i) dot += v[i] * x[i];
    SpacePoint w;
    w.set_dim(m);
    double nrm = 0.0;
    for (int i = 0; i < m; ++i) {
      w[i] = v[i] - dot * x[i];
      nrm += w[i] * w[i];
    }
    nrm = std::sqrt(nrm);
    SpacePoint y;
    y.set_dim(m);
    for (int i = 0; i < m; ++i) y[i] = std::cos(th) * x[i] + std::sin(th) * w[i] / nrm;
    pts.push_back(space.canonicalize(y));
  }
  return pts;
}

std::vector<std::pair<std::size_t, std::size_t>> net_pairs(const Space& space, const std::vector<SpacePoint>& net,
                                                           double r) {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  const bool global = r >= space.diameter();
  for (std::size_t i = 0; i < net.size(); ++i)
    for (std::size_t j = i + 1; j < net.size(); ++j) {
      const double d = space.distance(net[i], net[j]);
      if (d > 0.0 && (global || d < r)) pairs.emplace_back(i, j);
    }
  return pairs;
}

}  // namespace

ExponentAtPoint annealed_exponent_at(const RandomMapSystem& system, const SpacePoint& x, int n, std::size_t mc_samples,
                                     std::uint64_t seed, const AnnealedOptions& options) {
  require(n >= 1, "annealed_exponent_at needs n >= 1");
  require(mc_samples >= 10, "annealed_exponent_at needs mc_samples >= 10");
  if (!system.space().contains(x)) fail(ErrorKind::DimensionMismatch, "point is not in " + system.space().describe());
  ExponentAtPoint out{x, n, 0.0, 0.0, mc_samples, false};
  const double inv_n = 1.0 / n;
  if (enumerable(system.size(), n, options.exact_word_limit)) {
    const std::size_t atoms = system.size();
    std::size_t total = 1;
    for (int k = 0; k < n; ++k) total *= atoms;
    std::vector<double> terms(total);
    Word w{std::vector<std::uint32_t>(static_cast<std::size_t>(n)), seed, 0};
    for (std::size_t idx = 0; idx < total; ++idx) {
      std::size_t rest = idx;
      double prob = 1.0;
      for (int k = 0; k < n; ++k) {
        w.symbols[static_cast<std::size_t>(k)] = static_cast<std::uint32_t>(rest % atoms);
        prob *= system.weight(rest % atoms);
        rest /= atoms;
      }
      terms[idx] = prob * log_lipschitz_word(system, w, x) * inv_n;
    }
    out.estimate = pairwise_sum(terms);
    out.exact = true;
    return out;
  }
  std::vector<double> values(mc_samples);
  const bool analytic = system.has_derivatives();
  for (std::size_t s = 0; s < mc_samples; ++s) {
    if (analytic) {
      values[s] = log_lipschitz_run(system, system.sampler(seed, s), x, n) * inv_n;
    } else {
      values[s] = log_lipschitz_word(system, sample_word(system, static_cast<std::size_t>(n), seed, s), x) * inv_n;
    }
  }
  const Estimate e = batch_mean_estimate(values, 20);
  out.estimate = e.value;
  out.std_error = e.std_error;
  return out;
}

namespace {

std::vector<ExponentAtPoint> sweep_net(const RandomMapSystem& system, const std::vector<SpacePoint>& net, int n,
                                       std::size_t mc_samples, std::uint64_t seed, const AnnealedOptions& options) {
  std::vector<ExponentAtPoint> out(net.size());
  parallel_for(net.size(), options.workers, [&](std::size_t i) {
    out[i] = annealed_exponent_at(system, net[i], n, mc_samples, seed, options);
  });
  return out;
}

}  // namespace

Certificate mostly_contracting_certificate(const RandomMapSystem& system, double eps, int n, std::size_t mc_samples,
                                           double margin, std::uint64_t seed, const AnnealedOptions& options) {
  require(margin >= 0.0, "certificate margin must be >= 0");
  Certificate c;
  c.n = n;
  c.margin = margin;
  c.eps = eps;
  c.mc_samples = mc_samples;
  c.seed = seed;
  const auto net = epsilon_net(system.space(), eps);
  c.points = sweep_net(system, net, n, mc_samples, seed, options);
  std::size_t worst = 0;
  c.pass = true;
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const auto& p = c.points[i];
    const double upper = p.estimate + 3.0 * p.std_error;
    if (!(upper < -margin)) c.pass = false;
    const auto& w = c.points[worst];
    if (upper > w.estimate + 3.0 * w.std_error) worst = i;
  }
  c.worst_point = c.points[worst].x;
  c.worst_estimate = c.points[worst].estimate;
  c.worst_std_error = c.points[worst].std_error;
  return c;
}

std::optional<ContractionOnAverageWitness> contraction_on_average_search(const RandomMapSystem& system,
                                                                         const ContractionSearchOptions& options) {
  require(!options.alphas.empty(), "contraction search needs at least one alpha");
  for (double a : options.alphas) require(a > 0.0 && a <= 1.0, "alphas must lie in (0, 1]");
  require(options.n_max >= 1, "n_max must be >= 1");
  require(options.mc_samples >= 2, "contraction search needs mc_samples >= 2");
  const Space& space = system.space();
  const auto net = epsilon_net(space, options.pair_grid_eps);
  const auto pairs = net_pairs(space, net, options.r);
  if (pairs.empty()) return std::nullopt;
  const std::size_t na = options.alphas.size();
  const auto nn = static_cast<std::size_t>(options.n_max);
  // Per pair: sum and sum of squares of ratio^alpha, indexed [alpha][n-1].
  std::vector<std::vector<double>> sums(pairs.size()), sqs(pairs.size());
  parallel_for(pairs.size(), options.workers, [&](std::size_t pi) {
    auto& sum = sums[pi];
    auto& sq = sqs[pi];
    sum.assign(na * nn, 0.0);
    sq.assign(na * nn, 0.0);
    const auto [i, j] = pairs[pi];
    const double d0 = space.distance(net[i], net[j]);
    for (std::size_t s = 0; s < options.mc_samples; ++s) {
      const auto sampler = system.sampler(options.seed, s);
      SpacePoint x = net[i], y = net[j];
      for (std::size_t k = 0; k < nn; ++k) {
        const auto sym = sampler(k);
        x = system.map(sym).apply(x);
        y = system.map(sym).apply(y);
        const double ratio = space.distance(x, y) / d0;
        for (std::size_t a = 0; a < na; ++a) {
          const double v = std::pow(ratio, options.alphas[a]);
          sum[a * nn + k] += v;
          sq[a * nn + k] += v * v;
        }
      }
    }
  });
  const double m = static_cast<double>(options.mc_samples);
  for (std::size_t a = 0; a < na; ++a) {
    for (std::size_t k = 0; k < nn; ++k) {
      double q = 0.0, max_ratio = 0.0;
      for (std::size_t pi = 0; pi < pairs.size(); ++pi) {
        const double mean = sums[pi][a * nn + k] / m;
        const double var = std::max(0.0, (sqs[pi][a * nn + k] - m * mean * mean) / (m - 1.0));
        q = std::max(q, mean + 3.0 * std::sqrt(var / m));
        max_ratio = std::max(max_ratio, mean);
      }
      if (q < 1.0)
        return ContractionOnAverageWitness{options.alphas[a], q, static_cast<int>(k + 1), options.r,
                                           options.r >= space.diameter(), pairs.size(), max_ratio};
    }
  }
  return std::nullopt;
}

ContractionFit exponential_contraction_fit(const RandomMapSystem& system, const SpacePoint& x,
                                           const ContractionFitOptions& options) {
  require(options.delta0 > 0.0, "delta0 must be positive");
  require(options.n_max >= 2 && options.trials >= 1, "contraction fit needs n_max >= 2 and trials >= 1");
  const Space& space = system.space();
  const auto ball = ball_points(space, x, options.delta0, options.seed);
  ContractionFit fit;
  fit.slopes.assign(static_cast<std::size_t>(options.trials), 0.0);
  fit.success.assign(static_cast<std::size_t>(options.trials), false);
  std::vector<char> ok(static_cast<std::size_t>(options.trials), 0);
  parallel_for(static_cast<std::size_t>(options.trials), options.workers, [&](std::size_t t) {
    const auto sampler = system.sampler(options.seed, t);
    auto pts = ball;
    std::vector<double> steps, logs;
    for (int k = 1; k <= options.n_max; ++k) {
      const FiberMap& f = system.map(sampler(static_cast<std::uint64_t>(k - 1)));
      for (auto& p : pts) p = f.apply(p);
      double diam = 0.0;
      for (std::size_t a = 0; a < pts.size(); ++a)
        for (std::size_t b = a + 1; b < pts.size(); ++b) diam = std::max(diam, space.distance(pts[a], pts[b]));
      if (diam < options.diameter_floor) break;
      steps.push_back(k);
      logs.push_back(std::log(diam));
    }
    double slope = 0.0;
    if (steps.size() >= 2) {
      const std::size_t last = steps.size();
      const std::size_t first = std::min(last - 2, (last - 1) / 2);
      const auto xs = std::span<const double>(steps).subspan(first);
      const auto ys = std::span<const double>(logs).subspan(first);
      slope = fit_line(xs, ys).slope;
    } else if (steps.empty()) {
      // Collapsed below resolution on the first step.
      slope = std::log(options.diameter_floor / (2.0 * options.delta0));
    }
    fit.slopes[t] = slope;
    ok[t] = slope < -options.slope_tol;
  });
  std::size_t good = 0;
  for (std::size_t t = 0; t < ok.size(); ++t) {
    fit.success[t] = ok[t] != 0;
    good += ok[t] != 0;
  }
  fit.success_fraction = static_cast<double>(good) / static_cast<double>(ok.size());
  std::vector<double> sorted = fit.slopes;
  std::sort(sorted.begin(), sorted.end());
  const std::size_t n = sorted.size();
  fit.lambda_con = n % 2 ? sorted[n / 2] : 0.5 * (sorted[n / 2 - 1] + sorted[n / 2]);
  fit.q_hat = std::exp(fit.lambda_con);
  return fit;
}

SynchronizationResult synchronization_test(const RandomMapSystem& system, double pair_grid_eps, int n, int trials,
                                           double threshold, std::uint64_t seed, int workers) {
  require(threshold > 0.0, "synchronization threshold must be positive");
  require(n >= 0 && trials >= 1, "synchronization test needs n >= 0 and trials >= 1");
  const Space& space = system.space();
  const auto net = epsilon_net(space, pair_grid_eps);
  const auto pairs = net_pairs(space, net, space.diameter());
  std::vector<std::size_t> hits(static_cast<std::size_t>(trials), 0);
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const auto sampler = system.sampler(seed, t);
    auto pts = net;
    for (int k = 0; k < n; ++k) {
      const FiberMap& f = system.map(sampler(static_cast<std::uint64_t>(k)));
      for (auto& p : pts) p = f.apply(p);
    }
    std::size_t h = 0;
    for (const auto& [i, j] : pairs) h += space.distance(pts[i], pts[j]) < threshold;
    hits[t] = h;
  });
  SynchronizationResult r;
  r.pairs = pairs.size();
  r.trials = static_cast<std::size_t>(trials);
  std::size_t total = 0;
  for (auto h : hits) total += h;
  r.fraction = pairs.empty() ? 0.0 : static_cast<double>(total) / static_cast<double>(pairs.size() * r.trials);
  return r;
}

SystemExponent lambda_of_system(const RandomMapSystem& system, int n, std::size_t mc_samples, double eps,
                                std::uint64_t seed, const AnnealedOptions& options) {
  const auto net = epsilon_net(system.space(), eps);
  const auto pts = sweep_net(system, net, n, mc_samples, seed, options);
  std::size_t best = 0;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (pts[i].estimate > pts[best].estimate) best = i;
  return {pts[best].estimate, pts[best].std_error, pts[best].x, n};
}

Estimate stationary_exponent_estimate(const RandomMapSystem& system, const SpacePoint& x0, int burn_in, int samples,
                                      std::uint64_t seed, std::uint64_t stream) {
  require(samples >= 100 && burn_in >= 0, "stationary_exponent_estimate needs samples >= 100, burn_in >= 0");
  require(system.has_derivatives(), "stationary_exponent_estimate needs analytic derivatives");
  const auto sampler = system.sampler(seed, stream);
  SpacePoint p = x0;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(samples));
  const auto total = static_cast<std::uint64_t>(burn_in) + static_cast<std::uint64_t>(samples);
  for (std::uint64_t k = 0; k < total; ++k) {
    if (k >= static_cast<std::uint64_t>(burn_in)) {
      double v = 0.0;
      for (std::size_t t = 0; t < system.size(); ++t) v += system.weight(t) * std::log(*system.map(t).derivative_norm(p));
      values.push_back(v);
    }
    p = system.map(sampler(k)).apply(p);
  }
  return batch_mean_estimate(values, 20);
}

}  // namespace rmlab
