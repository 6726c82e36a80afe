#include "rmlab/koopman.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "rmlab/errors.hpp"
#include "rmlab/parallel.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

Grid::Grid(Space space, std::size_t cells) : space_(std::move(space)), cells_(cells) {
  require(space_.one_dimensional(), "grids support Interval, Circle and Projective(2) only");
  require(cells >= 1, "grid needs at least one cell");
  width_ = space_.line_length() / static_cast<double>(cells);
  require(width_ > 0.0, "grid needs an interval of positive length");
}

double Grid::center_coordinate(std::size_t i) const {
  if (space_.kind() == SpaceKind::Interval) return space_.lower() + (static_cast<double>(i) + 0.5) * width_;
  return static_cast<double>(i) * width_;
}

double Grid::subpoint_coordinate(std::size_t i, std::size_t k, std::size_t per_cell) const {
  const double offset = (static_cast<double>(k) + 0.5) / static_cast<double>(per_cell) - 0.5;
  return center_coordinate(i) + offset * width_;
}

std::size_t Grid::cell_of_coordinate(double t) const {
  if (space_.kind() == SpaceKind::Interval) {
    const double u = std::floor((t - space_.lower()) / width_);
    if (u < 0) return 0;
    return std::min(static_cast<std::size_t>(u), cells_ - 1);
  }
  const double u = std::floor(t * static_cast<double>(cells_) + 0.5);
  const auto n = static_cast<long long>(cells_);
  long long c = static_cast<long long>(u) % n;
  if (c < 0) c += n;
  return static_cast<std::size_t>(c);
}

std::size_t Grid::cell_of(const SpacePoint& p) const { return cell_of_coordinate(space_.line_coordinate(p)); }

DiscretizedKoopman discretize(const RandomMapSystem& system, const Grid& grid, std::size_t subpoints, int workers) {
  require(system.space() == grid.space(), "grid and system act on different spaces");
  require(subpoints >= 1, "discretize needs at least one sub-point per cell");
  const std::size_t n = grid.size();
  std::vector<std::vector<std::pair<int, double>>> rows(n);
  parallel_for(n, workers, [&](std::size_t i) {
    std::vector<double> acc(n, 0.0);
    std::vector<std::size_t> touched;
    const double share = 1.0 / static_cast<double>(subpoints);
    for (std::size_t k = 0; k < subpoints; ++k) {
      const SpacePoint x = grid.space().from_line_coordinate(grid.subpoint_coordinate(i, k, subpoints));
      for (std::size_t t = 0; t < system.size(); ++t) {
        const std::size_t j = grid.cell_of(system.map(t).apply(x));
        if (acc[j] == 0.0) touched.push_back(j);
        acc[j] += system.weight(t) * share;
      }
    }
    std::sort(touched.begin(), touched.end());
    double total = 0.0;
    for (auto j : touched) total += acc[j];
    for (auto j : touched) rows[i].push_back({static_cast<int>(j), acc[j] / total});
  });
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t i = 0; i < n; ++i)
    for (const auto& [j, v] : rows[i]) trips.emplace_back(static_cast<int>(i), j, v);
  SparseMatrix q(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  q.setFromTriplets(trips.begin(), trips.end());
  q.makeCompressed();
  return {grid, std::move(q)};
}

namespace {

StationaryReport structure_report(const SparseMatrix& q, double tol) {
  check_row_stochastic(q);
  const ChainStructure s = chain_structure(q);
  StationaryReport r;
  r.classes = s.closed_classes;
  r.periods = s.periods;
  r.transient = s.transient;
  r.multiplicity = s.closed_classes.size();
  r.measures.resize(r.multiplicity);
  for (std::size_t c = 0; c < r.multiplicity; ++c) r.measures[c] = class_stationary(q, s.closed_classes[c], tol);
  r.absorption = absorption_probabilities(q, s);
  return r;
}

}  // namespace

Eigen::VectorXd limit_projection(const StationaryReport& report, const Eigen::VectorXd& phi) {
  Eigen::VectorXd averages(static_cast<Eigen::Index>(report.multiplicity));
  for (std::size_t c = 0; c < report.multiplicity; ++c) averages(static_cast<Eigen::Index>(c)) = report.measures[c].dot(phi);
  return report.absorption * averages;
}

double spectral_gap_estimate(const SparseMatrix& q, const StationaryReport& report, const GapOptions& options) {
  if (report.multiplicity != 1) return 1.0;
  if (std::any_of(report.periods.begin(), report.periods.end(), [](int p) { return p > 1; })) return 1.0;
  const auto n = q.rows();
  if (n == 1) return 0.0;
  CounterRng rng(options.seed, 0x6A9);
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = rng.uniform() - 0.5;
  auto deflate = [&](Eigen::VectorXd& x) { x -= limit_projection(report, x); };
  deflate(v);
  double log_norm = 0.0;  // log of the accumulated growth since the start
  std::vector<double> history{0.0};
  double previous = -1.0;
  Eigen::VectorXd w(n);
  for (int it = 1; it <= options.max_iterations; ++it) {
    w.noalias() = q * v;
    deflate(w);
    const double nv = v.norm();
    const double nw = w.norm();
    if (!(nw > 1e-280 * nv) || nw == 0.0) return 0.0;  // nilpotent on the complement
    log_norm += std::log(nw / nv);
    v = w / nw;
    history.push_back(log_norm);
    if (it % options.window == 0 && it >= 2 * options.window) {
      const auto k = history.size() - 1;
      const double rho = std::exp((history[k] - history[k - static_cast<std::size_t>(options.window)]) / options.window);
      if (rho < 1e-12) return 0.0;
      if (previous >= 0.0 && std::abs(rho - previous) <= options.tol * std::max(rho, 1e-3)) return std::min(rho, 1.0);
      previous = rho;
    }
  }
  fail(ErrorKind::NoConvergence, "power iteration for the second eigenvalue did not settle");
}

double spectral_gap_estimate(const SparseMatrix& q, const GapOptions& options) {
  return spectral_gap_estimate(q, structure_report(q, 1e-10), options);
}

StationaryReport stationary_report(const SparseMatrix& q, double tol, const GapOptions& gap) {
  require(tol > 0.0, "stationary_report needs tol > 0");
  StationaryReport r = structure_report(q, tol);
  r.second_eigenvalue_modulus = spectral_gap_estimate(q, r, gap);
  return r;
}

CesaroResult cesaro_projection(const SparseMatrix& q, const StationaryReport& report, const Eigen::VectorXd& phi, int n) {
  require(n >= 1, "cesaro_projection needs n >= 1");
  require(phi.size() == q.rows(), "phi must have one value per cell");
  CesaroResult out;
  Eigen::VectorXd term = phi;
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(phi.size());
  Eigen::VectorXd next(phi.size());
  for (int i = 0; i < n; ++i) {
    sum += term;
    next.noalias() = q * term;
    term.swap(next);
  }
  out.average = sum / static_cast<double>(n);
  out.projection = limit_projection(report, phi);
  out.distance = (out.average - out.projection).lpNorm<Eigen::Infinity>();
  return out;
}

CesaroResult cesaro_projection(const SparseMatrix& q, const Eigen::VectorXd& phi, int n) {
  return cesaro_projection(q, structure_report(q, 1e-10), phi, n);
}

namespace {

// Random test function on the line coordinate: a single cosine mode, except
// sample 0 which is the normalized coordinate itself on intervals.
struct TestFunction {
  int frequency = 1;
  double phase = 0.0;
  bool linear = false;
  double offset = 0.0;
  double length = 1.0;

  double operator()(double t) const {
    const double u = (t - offset) / length;
    if (linear) return u;
    return std::cos(2.0 * std::numbers::pi * frequency * u + phase);
  }
};

}  // namespace

HolderFit holder_contraction_check(const RandomMapSystem& system, const HolderOptions& o) {
  require(o.alpha > 0.0 && o.alpha <= 1.0, "alpha must lie in (0, 1]");
  require(o.n >= 1 && o.sample_functions >= 2, "holder check needs n >= 1 and at least two test functions");
  const Space& space = system.space();
  require(space.one_dimensional(), "holder check supports one-dimensional spaces");
  const auto net = epsilon_net(space, o.net_eps);
  const std::size_t np = net.size();

  // Images f^n_w(x) for every net point and word, with the word weights.
  std::vector<double> word_weight;
  std::vector<std::vector<std::uint32_t>> words;
  {
    double count = 1.0;
    for (int k = 0; k < o.n && count <= static_cast<double>(o.exact_word_limit); ++k) count *= static_cast<double>(system.size());
    if (count <= static_cast<double>(o.exact_word_limit)) {
      const auto total = static_cast<std::size_t>(count);
      for (std::size_t idx = 0; idx < total; ++idx) {
        std::vector<std::uint32_t> w(static_cast<std::size_t>(o.n));
        std::size_t rest = idx;
        double p = 1.0;
        for (auto& s : w) {
          s = static_cast<std::uint32_t>(rest % system.size());
          p *= system.weight(s);
          rest /= system.size();
        }
        words.push_back(std::move(w));
        word_weight.push_back(p);
      }
    } else {
      for (std::size_t s = 0; s < o.words; ++s) {
        words.push_back(sample_word(system, static_cast<std::size_t>(o.n), o.seed, s).symbols);
        word_weight.push_back(1.0 / static_cast<double>(o.words));
      }
    }
  }
  std::vector<std::vector<double>> image_coord(np);
  parallel_for(np, o.workers, [&](std::size_t i) {
    image_coord[i].resize(words.size());
    for (std::size_t w = 0; w < words.size(); ++w) {
      SpacePoint p = net[i];
      for (auto s : words[w]) p = system.map(s).apply(p);
      image_coord[i][w] = space.line_coordinate(p);
    }
  });

  CounterRng rng(o.seed, 0x4F1D);
  std::vector<TestFunction> tests;
  for (int s = 0; s < o.sample_functions; ++s) {
    TestFunction f;
    f.offset = space.kind() == SpaceKind::Interval ? space.lower() : 0.0;
    f.length = space.line_length();
    f.linear = (s == 0 && space.kind() == SpaceKind::Interval);
    f.frequency = s == 0 ? 1 : 1 + (s - 1) % o.max_frequency;
    f.phase = 2.0 * std::numbers::pi * rng.uniform();
    tests.push_back(f);
  }

  // |phi|_alpha is taken over the net together with every image point, so
  // that |P^n phi(x) - P^n phi(y)| <= |phi|_alpha E d(f x, f y)^alpha holds for
  // the sampled quantities themselves.
  std::vector<double> eval;
  for (const auto& p : net) eval.push_back(space.line_coordinate(p));
  for (const auto& row : image_coord) eval.insert(eval.end(), row.begin(), row.end());
  const std::size_t ne = eval.size();
  require(ne <= 4096, "holder check: net times words exceeds 4096 evaluation points; lower words or raise net_eps");
  std::vector<SpacePoint> eval_pts(ne);
  for (std::size_t i = 0; i < ne; ++i) eval_pts[i] = space.from_line_coordinate(eval[i]);
  auto pair_index = [](std::size_t i, std::size_t j) { return j * (j - 1) / 2 + i; };  // i < j
  std::vector<double> dpow(ne * (ne - 1) / 2);
  parallel_for(ne, o.workers, [&](std::size_t j) {
    for (std::size_t i = 0; i < j; ++i) dpow[pair_index(i, j)] = std::pow(space.distance(eval_pts[i], eval_pts[j]), o.alpha);
  });

  auto seminorm = [&](const std::vector<double>& v, std::size_t count) {
    double s = 0.0;
    for (std::size_t j = 1; j < count; ++j)
      for (std::size_t i = 0; i < j; ++i) {
        const double d = dpow[pair_index(i, j)];
        if (d > 0.0) s = std::max(s, std::abs(v[i] - v[j]) / d);
      }
    return s;
  };

  HolderFit fit;
  fit.c_reference = 2.0 / std::pow(o.r, o.alpha);
  for (const auto& f : tests) {
    std::vector<double> phi(ne), pphi(np);
    for (std::size_t i = 0; i < ne; ++i) phi[i] = f(eval[i]);
    for (std::size_t i = 0; i < np; ++i) {
      double acc = 0.0;
      for (std::size_t w = 0; w < words.size(); ++w) acc += word_weight[w] * f(image_coord[i][w]);
      pphi[i] = acc;
    }
    double sup = 0.0;
    for (double v : phi) sup = std::max(sup, std::abs(v));
    fit.seminorm_in.push_back(seminorm(phi, ne));
    fit.sup_in.push_back(sup);
    fit.seminorm_out.push_back(seminorm(pphi, np));
  }
  // Least squares for (q, C) with C >= 0, then raise q until the bound holds
  // for every sample.
  const auto& a = fit.seminorm_in;
  const auto& b = fit.sup_in;
  const auto& y = fit.seminorm_out;
  double saa = 0, sab = 0, sbb = 0, sya = 0, syb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    saa += a[i] * a[i];
    sab += a[i] * b[i];
    sbb += b[i] * b[i];
    sya += y[i] * a[i];
    syb += y[i] * b[i];
  }
  const double det = saa * sbb - sab * sab;
  double c = det > 1e-12 * saa * sbb ? (saa * syb - sab * sya) / det : 0.0;
  if (!(c > 0.0)) c = 0.0;
  double q = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i] > 0.0) q = std::max(q, (y[i] - c * b[i]) / a[i]);
  fit.q_hat = q;
  fit.c_hat = c;
  fit.violated = q >= 1.0 - o.violation_margin;
  return fit;
}

double grid_wasserstein1(const Grid& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  require(a.size() == b.size() && static_cast<std::size_t>(a.size()) == grid.size(), "measures must live on the grid");
  const auto n = a.size();
  std::vector<double> diff(static_cast<std::size_t>(n));
  double fa = 0.0, fb = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    fa += a(i);
    fb += b(i);
    diff[static_cast<std::size_t>(i)] = fa - fb;
  }
  double shift = 0.0;
  if (grid.space().periodic()) {
    // On the circle W1 = min_c sum |F - G - c|, attained at a median.
    std::vector<double> sorted = diff;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<long>(sorted.size() / 2), sorted.end());
    shift = sorted[sorted.size() / 2];
  }
  double s = 0.0;
  for (double d : diff) s += std::abs(d - shift);
  return s * grid.width();
}

BasinReport empirical_basins(const RandomMapSystem& system, const Grid& grid, const StationaryReport& report, int n,
                             int trials, std::uint64_t seed, int workers) {
  require(n >= 1 && trials >= 1, "empirical_basins needs n >= 1 and trials >= 1");
  require(system.space() == grid.space(), "grid and system act on different spaces");
  const std::size_t cells = grid.size();
  const auto r = static_cast<Eigen::Index>(report.multiplicity);
  BasinReport out;
  out.threshold = 2.0 * (grid.width() + 1.0 / std::sqrt(static_cast<double>(n)));
  out.attribution = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(cells), r);
  out.unattributed.assign(cells, 0.0);
  std::vector<std::vector<int>> counts(cells);  // per cell, per class (+1 for none)
  parallel_for(cells, workers, [&](std::size_t c) {
    counts[c].assign(static_cast<std::size_t>(r) + 1, 0);
    Eigen::VectorXd occ(static_cast<Eigen::Index>(cells));
    for (int t = 0; t < trials; ++t) {
      occ.setZero();
      const auto sampler = system.sampler(seed, derive_stream(c, static_cast<std::uint64_t>(t)));
      SpacePoint p = grid.center(c);
      for (int k = 0; k < n; ++k) {
        p = system.map(sampler(static_cast<std::uint64_t>(k))).apply(p);
        occ(static_cast<Eigen::Index>(grid.cell_of(p))) += 1.0;
      }
      occ /= static_cast<double>(n);
      int best = -1;
      double best_tv = out.threshold;
      for (Eigen::Index k = 0; k < r; ++k) {
        const double tv = 0.5 * (occ - report.measures[static_cast<std::size_t>(k)]).lpNorm<1>();
        if (tv <= best_tv) {
          best_tv = tv;
          best = static_cast<int>(k);
        }
      }
      ++counts[c][best < 0 ? static_cast<std::size_t>(r) : static_cast<std::size_t>(best)];
    }
  });
  double total = 0.0;
  for (std::size_t c = 0; c < cells; ++c) {
    for (Eigen::Index k = 0; k < r; ++k)
      out.attribution(static_cast<Eigen::Index>(c), k) = counts[c][static_cast<std::size_t>(k)] / static_cast<double>(trials);
    out.unattributed[c] = counts[c][static_cast<std::size_t>(r)] / static_cast<double>(trials);
    total += out.unattributed[c];
  }
  out.unattributed_fraction = total / static_cast<double>(cells);
  return out;
}

std::vector<LawConvergenceRow> law_convergence_test(const RandomMapSystem& system, const SpacePoint& x, const Grid& grid,
                                                    const StationaryReport& report, const std::vector<int>& n_list,
                                                    int trials, std::uint64_t seed, int workers) {
  require(!n_list.empty() && std::is_sorted(n_list.begin(), n_list.end()), "n_list must be ascending and nonempty");
  require(n_list.front() >= 0 && trials >= 1, "law_convergence_test needs n >= 0 and trials >= 1");
  require(report.multiplicity >= 1, "stationary report has no measures");
  const std::size_t cells = grid.size();
  const std::size_t nn = n_list.size();
  // positions[t][j]: cell of f^{n_j}(x) along word t.
  std::vector<std::vector<std::size_t>> positions(static_cast<std::size_t>(trials));
  parallel_for(static_cast<std::size_t>(trials), workers, [&](std::size_t t) {
    const auto sampler = system.sampler(seed, t);
    SpacePoint p = x;
    int k = 0;
    positions[t].resize(nn);
    for (std::size_t j = 0; j < nn; ++j) {
      for (; k < n_list[j]; ++k) p = system.map(sampler(static_cast<std::uint64_t>(k))).apply(p);
      positions[t][j] = grid.cell_of(p);
    }
  });
  std::vector<LawConvergenceRow> rows;
  for (std::size_t j = 0; j < nn; ++j) {
    Eigen::VectorXd law = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cells));
    for (const auto& pos : positions) law(static_cast<Eigen::Index>(pos[j])) += 1.0;
    law /= static_cast<double>(trials);
    LawConvergenceRow row{n_list[j], 0.0, -1};
    for (std::size_t c = 0; c < report.multiplicity; ++c) {
      const double w = grid_wasserstein1(grid, law, report.measures[c]);
      if (row.nearest < 0 || w < row.w1) {
        row.w1 = w;
        row.nearest = static_cast<int>(c);
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace rmlab
