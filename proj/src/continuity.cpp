#include "rmlab/continuity.hpp"

#include <cmath>
#include <sstream>

#include "rmlab/errors.hpp"
#include "rmlab/lyapunov_lab.hpp"
#include "rmlab/parallel.hpp"
#include "rmlab/stats.hpp"

namespace rmlab {

std::optional<HolderPair> holder_fit(const std::vector<SweepRow>& rows, double base_estimate, double base_std_error,
                                     std::size_t min_points) {
  std::vector<double> lx, ly;
  for (const auto& r : rows) {
    if (!r.has_estimate || !(r.distance > 0.0)) continue;
    const double signal = std::abs(r.estimate - base_estimate);
    const double noise = 3.0 * std::hypot(r.std_error, base_std_error) + 1e-12;
    if (signal <= noise) continue;
    lx.push_back(std::log(r.distance));
    ly.push_back(std::log(signal));
  }
  if (lx.size() < min_points) return std::nullopt;
  const LinearFit lf = fit_line(lx, ly);
  HolderPair h;
  h.gamma_hat = lf.slope;
  h.c_hat = std::exp(lf.intercept);
  h.gamma_stderr = lf.slope_stderr;
  h.residual = lf.residual_rms;
  h.points = lx.size();
  for (std::size_t i = 0; i < lx.size(); ++i) h.c_envelope = std::max(h.c_envelope, std::exp(ly[i] - h.gamma_hat * lx[i]));
  return h;
}

namespace {

void check_t_list(const std::vector<double>& t_list) {
  require(!t_list.empty(), "t_list is empty");
  for (double t : t_list) require(std::isfinite(t), "t values must be finite");
}

// Adjacent rows (in t order) may differ by 3 combined stderr plus the
// Holder bound of their distance gap, with the constant raised so the fitted
// power law dominates every fitted point.
void audit_continuity(SweepResult& r) {
  std::vector<const SweepRow*> sorted;
  for (const auto& row : r.rows)
    if (row.has_estimate) sorted.push_back(&row);
  std::sort(sorted.begin(), sorted.end(), [](const SweepRow* a, const SweepRow* b) { return a->t < b->t; });
  r.max_adjacent_excess = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < sorted.size(); ++i) {
    const auto& a = *sorted[i - 1];
    const auto& b = *sorted[i];
    double allowed = 3.0 * std::hypot(a.std_error, b.std_error) + 1e-12;
    if (r.fit) allowed += r.fit->c_envelope * std::pow(std::abs(b.distance - a.distance), r.fit->gamma_hat);
    r.max_adjacent_excess = std::max(r.max_adjacent_excess, std::abs(b.estimate - a.estimate) - allowed);
  }
  if (sorted.size() < 2) r.max_adjacent_excess = 0.0;
  r.continuous = r.max_adjacent_excess <= 0.0;
}

void finish(SweepResult& r, std::size_t base_index) {
  r.base_estimate = r.rows[base_index].estimate;
  r.base_std_error = r.rows[base_index].std_error;
  r.fit = holder_fit(r.rows, r.base_estimate, r.base_std_error);
  audit_continuity(r);
}

std::size_t index_of_zero(const std::vector<double>& t_list) {
  for (std::size_t i = 0; i < t_list.size(); ++i)
    if (t_list[i] == 0.0) return i;
  return t_list.size();
}

}  // namespace

SweepResult lambda1_sweep(const Cocycle& base, const std::vector<Matrix>& direction, const std::vector<double>& t_list,
                          const FurstenbergOptions& options, int workers) {
  check_t_list(t_list);
  require(direction.size() == base.size(), "direction needs one matrix per atom");
  for (const auto& d : direction)
    if (d.rows() != base.dimension() || d.cols() != base.dimension())
      fail(ErrorKind::ShapeMismatch, "direction matrices must match the cocycle dimension");
  std::vector<double> ts = t_list;
  const bool has_zero = index_of_zero(ts) < ts.size();
  if (!has_zero) ts.insert(ts.begin(), 0.0);

  std::vector<std::optional<Cocycle>> cocycles(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    std::vector<Matrix> ms;
    for (std::size_t k = 0; k < base.size(); ++k) ms.push_back(base.matrix(k) + ts[i] * direction[k]);
    try {
      cocycles[i].emplace(std::move(ms), std::vector<double>(base.weights().begin(), base.weights().end()));
    } catch (const Error& e) {
      std::ostringstream os;
      os << "perturbed cocycle is singular at t=" << ts[i] << ": " << e.what();
      fail(ErrorKind::NotInvertibleAt, os.str());
    }
  }
  SweepResult r;
  r.rows.resize(ts.size());
  // Same seed and stream at every t: common random numbers.
  parallel_for(ts.size(), workers, [&](std::size_t i) {
    const Estimate e = furstenberg_estimate(*cocycles[i], options);
    r.rows[i] = {ts[i], cocycle_distance(*cocycles[i], base), e.value, e.std_error, 0, true};
  });
  finish(r, index_of_zero(ts));
  if (!has_zero) r.rows.erase(r.rows.begin());
  return r;
}

double grid_c1_distance(const RandomMapSystem& f, const RandomMapSystem& g, std::size_t points, bool with_derivative) {
  require(f.size() == g.size(), "systems must have paired atoms");
  require(f.space() == g.space() && f.space().one_dimensional() && f.space().kind() != SpaceKind::Projective,
          "grid distances need matching interval or circle systems");
  require(points >= 2, "grid needs at least two points");
  const Space& sp = f.space();
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) {
    double d0 = 0.0, d1 = 0.0;
    for (std::size_t i = 0; i < points; ++i) {
      const double x = sp.kind() == SpaceKind::Circle
                           ? static_cast<double>(i) / static_cast<double>(points)
                           : sp.lower() + (sp.upper() - sp.lower()) * static_cast<double>(i) / static_cast<double>(points - 1);
      const double a = f.map(k).apply_lift(x);
      const double b = g.map(k).apply_lift(x);
      d0 = std::max(d0, sp.kind() == SpaceKind::Circle ? std::abs(circle_delta(a, b)) : std::abs(a - b));
      if (with_derivative) {
        const auto da = f.map(k).derivative_1d(x);
        const auto db = g.map(k).derivative_1d(x);
        if (!da || !db) fail(ErrorKind::InvalidArgument, "C1 distance needs analytic derivatives");
        d1 = std::max(d1, std::abs(*da - *db));
      }
    }
    total += f.weight(k) * (d0 + d1);
  }
  return total;
}

namespace {

void check_diffeomorphism(const RandomMapSystem& s, double t, std::size_t points) {
  for (std::size_t k = 0; k < s.size(); ++k) {
    for (std::size_t i = 0; i < points; ++i) {
      const double x = s.space().kind() == SpaceKind::Circle
                           ? static_cast<double>(i) / static_cast<double>(points)
                           : s.space().lower() + s.space().line_length() * static_cast<double>(i) /
                                                     static_cast<double>(points - 1);
      const auto d = s.map(k).derivative_1d(x);
      if (!d || !(*d > 0.0)) {
        std::ostringstream os;
        os << "atom " << k << " at t=" << t << " has derivative "
           << (d ? std::to_string(*d) : std::string("undefined")) << " at x=" << x;
        fail(ErrorKind::NotDiffeomorphismAt, os.str());
      }
    }
  }
}

std::vector<RandomMapSystem> build_path(const SystemPath& path, const std::vector<double>& ts) {
  std::vector<RandomMapSystem> out;
  out.reserve(ts.size());
  for (double t : ts) out.push_back(path(t));
  for (const auto& s : out)
    require(s.size() == out.front().size() && s.space() == out.front().space(),
            "every system on the path must share the space and atom count");
  return out;
}

}  // namespace

SweepResult circle_exponent_sweep(const SystemPath& path, const std::vector<double>& t_list,
                                  const CircleSweepOptions& options) {
  check_t_list(t_list);
  std::vector<double> ts = t_list;
  const bool has_zero = index_of_zero(ts) < ts.size();
  if (!has_zero) ts.insert(ts.begin(), 0.0);
  const auto systems = build_path(path, ts);
  for (std::size_t i = 0; i < ts.size(); ++i) check_diffeomorphism(systems[i], ts[i], options.grid_points);
  const RandomMapSystem& base = systems[index_of_zero(ts)];
  SweepResult r;
  r.rows.resize(ts.size());
  parallel_for(ts.size(), options.workers, [&](std::size_t i) {
    const Estimate e =
        stationary_exponent_estimate(systems[i], options.x0, options.burn_in, options.samples, options.seed, 0);
    r.rows[i] = {ts[i], grid_c1_distance(systems[i], base, options.grid_points, true), e.value, e.std_error, 0, true};
  });
  finish(r, index_of_zero(ts));
  if (!has_zero) r.rows.erase(r.rows.begin());
  return r;
}

SweepResult stationary_stability_sweep(const SystemPath& path, const std::vector<double>& t_list,
                                       const StabilityOptions& options) {
  check_t_list(t_list);
  std::vector<double> ts = t_list;
  const bool has_zero = index_of_zero(ts) < ts.size();
  if (!has_zero) ts.insert(ts.begin(), 0.0);
  const auto systems = build_path(path, ts);
  const std::size_t zero = index_of_zero(ts);
  const Grid grid(systems.front().space(), options.cells);
  std::vector<StationaryReport> reports(ts.size());
  for (std::size_t i = 0; i < ts.size(); ++i) {
    const auto dk = discretize(systems[i], grid, options.subpoints, options.workers);
    reports[i] = stationary_report(dk.q);
  }
  SweepResult r;
  const bool unique = reports[zero].multiplicity == 1;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    SweepRow row;
    row.t = ts[i];
    row.distance = grid_c1_distance(systems[i], systems[zero], options.grid_points, false);
    row.multiplicity = reports[i].multiplicity;
    row.has_estimate = unique && reports[i].multiplicity == 1;
    if (row.has_estimate) row.estimate = grid_wasserstein1(grid, reports[i].measures[0], reports[zero].measures[0]);
    r.rows.push_back(row);
  }
  r.base_estimate = 0.0;
  r.fit = holder_fit(r.rows, 0.0, 0.0);
  audit_continuity(r);
  if (!has_zero) r.rows.erase(r.rows.begin());
  return r;
}

}  // namespace rmlab
