#include "rmlab/runner.hpp"

#include <bit>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <locale>
#include <ostream>
#include <sstream>

#include "rmlab/catalog.hpp"
#include "rmlab/continuity.hpp"
#include "rmlab/errors.hpp"
#include "rmlab/kingman.hpp"
#include "rmlab/koopman.hpp"
#include "rmlab/limit_stats.hpp"
#include "rmlab/lyapunov_lab.hpp"
#include "rmlab/rng.hpp"

namespace rmlab {

namespace {

constexpr int kMaxInt = 1 << 30;

Json num(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

Json num_array(const std::vector<double>& v) {
  Json a = Json::array();
  for (double x : v) a.push_back(num(x));
  return a;
}

Json point_json(const SpacePoint& p) {
  if (p.dim() == 1) return num(p[0]);
  Json a = Json::array();
  for (double x : p.coords()) a.push_back(num(x));
  return a;
}

Vector unit_vector(const Json& j, int dim, const std::string& path) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) config_fail(path, "expected " + std::to_string(dim) + " coordinates");
  Vector v(dim);
  for (int i = 0; i < dim; ++i) {
    if (!j[static_cast<std::size_t>(i)].is_number()) config_fail(path + "[" + std::to_string(i) + "]", "expected a number");
    v(i) = j[static_cast<std::size_t>(i)].get<double>();
  }
  const double n = v.norm();
  if (!(n > 0.0)) config_fail(path, "vector must be nonzero");
  return v / n;
}

struct Outcome {
  Json results = Json::object();
  std::vector<Verdict> verdicts;
  std::vector<CsvTable> tables;
};

using Plan = std::function<Outcome(int workers)>;

struct Expectation {
  std::string field;
  std::optional<double> min, max;
  std::string path;
};

// "rows[2].w1" -> /rows/2/w1
Json::json_pointer pointer_of(const std::string& field) {
  std::string p;
  std::string token;
  auto flush = [&] {
    if (!token.empty()) p += "/" + token;
    token.clear();
  };
  for (char c : field) {
    if (c == '.' || c == '[' || c == ']') {
      flush();
    } else {
      token += c;
    }
  }
  flush();
  return Json::json_pointer(p);
}

// Sources of S_n for the limit-theorem experiments.
struct SourceSpec {
  SnSource source;
  std::function<LambdaHat(int)> lambda;
};

SourceSpec parse_source(Fields& top, Fields& params, std::uint64_t seed) {
  const bool has_cocycle = top.has("cocycle");
  const bool has_system = top.has("system");
  if (has_cocycle == has_system) config_fail(top.path(), "exactly one of cocycle or system is required");
  Fields lam = params.object("lambda_hat");
  const std::uint64_t lam_seed = derive_stream(seed, 1);
  SourceSpec spec;
  std::function<LambdaHat(int)> estimator;
  if (has_cocycle) {
    const Cocycle c = parse_cocycle(top.raw("cocycle"), "cocycle");
    const Vector x = unit_vector(params.raw("x"), c.dimension(), params.at("x"));
    spec.source = SnSource::from_cocycle(c, x);
    if (lam.has("furstenberg")) {
      Fields fo = lam.object("furstenberg");
      FurstenbergOptions o;
      o.burn_in = static_cast<int>(fo.integer("burn_in_steps", 0, kMaxInt));
      o.samples = static_cast<int>(fo.integer("samples", 100, kMaxInt));
      o.seed = lam_seed;
      fo.finish();
      estimator = [c, o](int) {
        const Estimate e = furstenberg_estimate(c, o);
        return LambdaHat{e.value, e.std_error, "furstenberg"};
      };
    }
  } else {
    const RandomMapSystem s = parse_system(top.raw("system"), "system");
    const SpacePoint x = parse_point(s.space(), params.raw("x"), params.at("x"));
    try {
      spec.source = SnSource::from_system(s, x);
    } catch (const Error& e) {
      config_fail("system", e.what());
    }
    if (lam.has("stationary")) {
      Fields so = lam.object("stationary");
      const int burn = static_cast<int>(so.integer("burn_in_steps", 0, kMaxInt));
      const int samples = static_cast<int>(so.integer("samples", 100, kMaxInt));
      so.finish();
      estimator = [s, x, burn, samples, lam_seed](int) {
        const Estimate e = stationary_exponent_estimate(s, x, burn, samples, lam_seed, 0);
        return LambdaHat{e.value, e.std_error, "stationary-chain"};
      };
    }
  }
  if (!estimator) {
    const LambdaHat fixed{lam.number("value"), lam.number("std_error"), "analytic"};
    if (fixed.std_error < 0.0) config_fail(lam.at("std_error"), "must be nonnegative");
    estimator = [fixed](int) { return fixed; };
  }
  lam.finish();
  spec.lambda = estimator;
  return spec;
}

Json lambda_json(const LambdaHat& l) {
  return Json{{"value", num(l.value)}, {"std_error", num(l.std_error)}, {"provenance", l.provenance}};
}

Plan plan_certificate(Fields& top, Fields& params, std::uint64_t seed) {
  const RandomMapSystem s = parse_system(top.raw("system"), "system");
  const double eps = params.positive("eps");
  const int n = static_cast<int>(params.integer("n_steps", 1, 100000));
  const auto mc = static_cast<std::size_t>(params.integer("mc_samples", 2, kMaxInt));
  const double margin = params.number("margin_nats");
  return [=](int workers) {
    AnnealedOptions ao;
    ao.workers = workers;
    const Certificate c = mostly_contracting_certificate(s, eps, n, mc, margin, seed, ao);
    Outcome o;
    o.results = {{"pass", c.pass},
                 {"n_steps", c.n},
                 {"eps", num(c.eps)},
                 {"margin_nats", num(c.margin)},
                 {"net_points", c.points.size()},
                 {"worst_point", point_json(c.worst_point)},
                 {"worst_estimate", num(c.worst_estimate)},
                 {"worst_std_error", num(c.worst_std_error)},
                 {"mc_samples", c.mc_samples}};
    std::ostringstream os;
    os << std::setprecision(6) << "worst estimate + 3 stderr = " << c.worst_estimate + 3.0 * c.worst_std_error
       << " vs -margin " << -c.margin;
    o.verdicts.push_back({"certificate", c.pass, os.str()});
    CsvTable t{"points", {}, {}};
    const int d = c.points.empty() ? 1 : c.points.front().x.dim();
    for (int i = 0; i < d; ++i) t.header.push_back("x" + std::to_string(i));
    t.header.insert(t.header.end(), {"estimate", "std_error", "exact"});
    for (const auto& p : c.points) {
      std::vector<double> row(p.x.coords().begin(), p.x.coords().end());
      row.insert(row.end(), {p.estimate, p.std_error, p.exact ? 1.0 : 0.0});
      t.rows.push_back(std::move(row));
    }
    o.tables.push_back(std::move(t));
    return o;
  };
}

Plan plan_spectrum(Fields& top, Fields& params, std::uint64_t seed) {
  const Cocycle c = parse_cocycle(top.raw("cocycle"), "cocycle");
  const int n = static_cast<int>(params.integer("n_steps", 10, kMaxInt));
  const int trials = static_cast<int>(params.integer("trials", 1, kMaxInt));
  return [=](int workers) {
    const SpectrumEstimate e = lyapunov_spectrum(c, n, trials, seed, workers);
    double sum = 0.0, se = 0.0;
    for (std::size_t i = 0; i < e.exponents.size(); ++i) {
      sum += e.exponents[i];
      se += e.std_errors[i];
    }
    const double det = c.mean_log_abs_det();
    Outcome o;
    o.results = {{"exponents", num_array(e.exponents)},
                 {"std_errors", num_array(e.std_errors)},
                 {"sum", num(sum)},
                 {"mean_log_abs_det", num(det)},
                 {"n_steps", e.n},
                 {"trials", e.trials}};
    bool ordered = std::is_sorted(e.exponents.rbegin(), e.exponents.rend());
    o.verdicts.push_back({"ordered", ordered, "exponents in descending order"});
    const double band = 3.0 * se + 1e-9;
    std::ostringstream os;
    os << std::setprecision(6) << "|sum - E log|det|| = " << std::abs(sum - det) << " vs " << band;
    o.verdicts.push_back({"trace_identity", std::abs(sum - det) <= band, os.str()});
    return o;
  };
}

Plan plan_furstenberg(Fields& top, Fields& params, std::uint64_t seed) {
  const Cocycle c = parse_cocycle(top.raw("cocycle"), "cocycle");
  FurstenbergOptions fo;
  fo.burn_in = static_cast<int>(params.integer("burn_in_steps", 0, kMaxInt));
  fo.samples = static_cast<int>(params.integer("samples", 100, kMaxInt));
  fo.seed = seed;
  return [=](int) {
    const Estimate e = furstenberg_estimate(c, fo);
    Outcome o;
    o.results = {{"estimate", num(e.value)}, {"std_error", num(e.std_error)}, {"samples", e.samples}};
    return o;
  };
}

Plan plan_koopman(Fields& top, Fields& params, std::uint64_t seed) {
  const RandomMapSystem s = parse_system(top.raw("system"), "system");
  if (!s.space().one_dimensional()) config_fail("system.space", "Ulam discretization needs a one-dimensional space");
  const auto cells = static_cast<std::size_t>(params.integer("cells", 1, 1 << 20));
  const auto sub = static_cast<std::size_t>(params.integer("subpoints", 1, 4096));
  return [=](int workers) {
    const Grid grid(s.space(), cells);
    const auto dk = discretize(s, grid, sub, workers);
    GapOptions go;
    go.seed = seed;
    const StationaryReport r = stationary_report(dk.q, 1e-10, go);
    Outcome o;
    Json sizes = Json::array();
    for (const auto& c : r.classes) sizes.push_back(c.size());
    o.results = {{"cells", cells},
                 {"multiplicity", r.multiplicity},
                 {"class_sizes", sizes},
                 {"periods", r.periods},
                 {"transient_cells", r.transient.size()},
                 {"second_eigenvalue_modulus", num(r.second_eigenvalue_modulus)}};
    CsvTable t{"stationary", {"cell", "center"}, {}};
    for (std::size_t c = 0; c < r.multiplicity; ++c) t.header.push_back("mu" + std::to_string(c));
    for (std::size_t i = 0; i < cells; ++i) {
      std::vector<double> row{static_cast<double>(i), grid.center_coordinate(i)};
      for (const auto& m : r.measures) row.push_back(m(static_cast<Eigen::Index>(i)));
      t.rows.push_back(std::move(row));
    }
    o.tables.push_back(std::move(t));
    return o;
  };
}

Plan plan_kingman(Fields& top, Fields& params, std::uint64_t) {
  const ChainConfig chain = parse_chain(top.raw("chain"), "chain");
  const auto length = static_cast<std::size_t>(params.integer("length", 1, kMaxSequenceLength));
  const auto window = static_cast<std::size_t>(params.integer("tail_window", 1, kMaxSequenceLength));
  return [=](int) {
    const SubadditiveSequence seq = build_additive(chain.p, chain.phi1, length);
    const SubadditivityCheck check = check_subadditivity(chain.p, seq);
    const UniformKingmanReport r = verify_uniform_kingman(chain.p, seq, window);
    Outcome o;
    o.results = {{"length", length},
                 {"max_limit", num(r.max_limit)},
                 {"ergodic_max", num(r.ergodic_max)},
                 {"pointwise_sup", num(r.pointwise_sup)},
                 {"inf_formula", num(r.inf_formula)},
                 {"lambda_per_measure", num_array(r.lambda_per_measure)},
                 {"slack", num(r.slack)},
                 {"max_disagreement", num(r.max_disagreement)},
                 {"agree", r.agree},
                 {"additive", r.additive},
                 {"additive_identity", r.additive_identity ? num(*r.additive_identity) : Json(nullptr)},
                 {"subadditivity_worst_residual", num(check.worst_residual)},
                 {"diverging", r.diverging}};
    o.verdicts.push_back({"four_way_agreement", r.agree, "max disagreement within 10/N"});
    if (r.additive) o.verdicts.push_back({"additive_identity", r.additive_identity_holds, "Lambda = max <phi_1, mu>"});
    return o;
  };
}

Plan plan_clt(Fields& top, Fields& params, std::uint64_t seed) {
  SourceSpec spec = parse_source(top, params, seed);
  const std::vector<int> n_list = params.integers("n_list", 1, kMaxInt);
  const int trials = static_cast<int>(params.integer("trials", 1000, kMaxInt));
  const double ks_threshold = params.positive("ks_threshold");
  std::optional<std::vector<double>> bracket;
  if (params.has("berry_esseen_bracket")) {
    bracket = params.numbers("berry_esseen_bracket");
    if (bracket->size() != 2 || !((*bracket)[0] < (*bracket)[1]))
      config_fail(params.at("berry_esseen_bracket"), "expected [low, high] with low < high");
    if (n_list.size() < 3) config_fail(params.at("n_list"), "a Berry-Esseen fit needs at least three values of n");
  }
  return [=](int workers) {
    const LambdaHat lam = spec.lambda(workers);
    SnOptions so;
    so.workers = workers;
    const SnSamples samples = collect_sn(spec.source, n_list, trials, lam, seed, so);
    const CltReport r = clt_test(samples);
    Outcome o;
    Json rows = Json::array();
    bool ks_ok = true;
    bool any_degenerate = false;
    for (const auto& row : r.rows) {
      rows.push_back({{"n", row.n},
                      {"mean", num(row.mean)},
                      {"mean_band", num(row.mean_band)},
                      {"centered", row.centered},
                      {"variance", num(row.variance)},
                      {"variance_stderr", num(row.variance_stderr)},
                      {"ks", num(row.ks)},
                      {"degenerate", row.degenerate}});
      any_degenerate = any_degenerate || row.degenerate;
      if (!row.degenerate && !(row.ks < ks_threshold)) ks_ok = false;
    }
    o.results = {{"lambda_hat", lambda_json(lam)}, {"trials", trials}, {"rows", rows},
                 {"variance_stable", r.variance_stable}};
    o.verdicts.push_back({"ks", ks_ok, "KS distance below threshold at every non-degenerate n"});
    if (bracket) {
      if (any_degenerate) {
        o.results["berry_esseen"] = nullptr;
        o.verdicts.push_back({"berry_esseen", false, "degenerate variance"});
      } else {
        const BerryEsseenFit be = berry_esseen_fit(samples);
        o.results["berry_esseen"] = {{"gaps", num_array(be.gap)},
                                     {"slope", num(be.slope)},
                                     {"intercept", num(be.intercept)},
                                     {"slope_stderr", num(be.slope_stderr)}};
        const bool in = be.slope >= (*bracket)[0] && be.slope <= (*bracket)[1];
        o.verdicts.push_back({"berry_esseen", in, "slope within bracket"});
      }
    }
    CsvTable t{"z", {}, {}};
    for (int n : n_list) t.header.push_back("z_n" + std::to_string(n));
    for (int i = 0; i < trials; ++i) {
      std::vector<double> row;
      for (std::size_t j = 0; j < n_list.size(); ++j) row.push_back(samples.z[j][static_cast<std::size_t>(i)]);
      t.rows.push_back(std::move(row));
    }
    o.tables.push_back(std::move(t));
    return o;
  };
}

Plan plan_large_deviation(Fields& top, Fields& params, std::uint64_t seed) {
  SourceSpec spec = parse_source(top, params, seed);
  const std::vector<int> n_list = params.integers("n_list", 1, kMaxInt);
  const std::vector<double> eps = params.numbers("eps_list");
  for (std::size_t i = 0; i < eps.size(); ++i)
    if (!(eps[i] > 0.0) || (i > 0 && !(eps[i] > eps[i - 1])))
      config_fail(params.at("eps_list"), "eps values must be positive and increasing");
  const int trials = static_cast<int>(params.integer("trials", 1, kMaxInt));
  const auto min_count = static_cast<std::size_t>(params.integer("min_count", 1, kMaxInt));
  return [=](int workers) {
    const LambdaHat lam = spec.lambda(workers);
    DeviationOptions dopt;
    dopt.min_count = min_count;
    dopt.workers = workers;
    const DeviationFit fit = large_deviation_fit(spec.source, eps, n_list, trials, lam, seed, dopt);
    Outcome o;
    Json cells = Json::array();
    for (const auto& c : fit.cells)
      cells.push_back(
          {{"n", c.n}, {"eps", num(c.eps)}, {"count", c.count}, {"p_hat", num(c.p_hat)}, {"usable", c.usable}});
    Json rates = Json::array();
    for (const auto& r : fit.rates) {
      rates.push_back({{"eps", num(r.eps)},
                       {"h_hat", r.h_hat ? num(*r.h_hat) : Json(nullptr)},
                       {"h_stderr", num(r.h_stderr)},
                       {"strictly_decreasing", r.strictly_decreasing},
                       {"usable_n", r.usable_n}});
      if (r.h_hat) {
        const bool ok = r.strictly_decreasing && *r.h_hat > 3.0 * r.h_stderr;
        std::ostringstream os;
        os << "eps=" << r.eps;
        o.verdicts.push_back({"decay " + os.str(), ok, "log p decreasing in n with h > 3 stderr"});
      }
    }
    o.results = {{"lambda_hat", lambda_json(lam)},
                 {"trials", trials},
                 {"cells", cells},
                 {"rates", rates},
                 {"convexity", num_array(fit.convexity)},
                 {"insufficient_tail_mass", fit.insufficient_tail_mass}};
    CsvTable t{"tails", {"n", "eps", "count", "p_hat"}, {}};
    for (const auto& c : fit.cells) t.rows.push_back({double(c.n), c.eps, double(c.count), c.p_hat});
    o.tables.push_back(std::move(t));
    return o;
  };
}

Json sweep_json(const SweepResult& r, Outcome& o) {
  Json rows = Json::array();
  CsvTable t{"sweep", {"t", "distance", "estimate", "std_error", "multiplicity"}, {}};
  for (const auto& row : r.rows) {
    rows.push_back({{"t", num(row.t)},
                    {"distance", num(row.distance)},
                    {"estimate", row.has_estimate ? num(row.estimate) : Json(nullptr)},
                    {"std_error", num(row.std_error)},
                    {"multiplicity", row.multiplicity}});
    t.rows.push_back({row.t, row.distance, row.has_estimate ? row.estimate : std::nan(""), row.std_error,
                      double(row.multiplicity)});
  }
  o.tables.push_back(std::move(t));
  Json fit = nullptr;
  if (r.fit)
    fit = {{"c_hat", num(r.fit->c_hat)},
           {"c_envelope", num(r.fit->c_envelope)},
           {"gamma_hat", num(r.fit->gamma_hat)},
           {"gamma_stderr", num(r.fit->gamma_stderr)},
           {"residual", num(r.fit->residual)},
           {"points", r.fit->points}};
  o.verdicts.push_back({"continuous", r.continuous, "adjacent jumps within noise plus the fitted Holder bound"});
  return {{"rows", rows},
          {"fit", fit},
          {"base_estimate", num(r.base_estimate)},
          {"max_adjacent_excess", num(r.max_adjacent_excess)},
          {"continuous", r.continuous}};
}

SystemPath parse_path(Fields& top, Fields& params) {
  const Json system = top.raw("system");
  if (params.has("direction")) {
    const Json direction = params.raw("direction");
    const std::string where = params.at("direction");
    if (system.contains("builtin")) config_fail(where, "builtin systems carry their own parameter path");
    // Validate the path at t = 0 and t = 1 shapes now.
    parse_system(shift_system(system, direction, 0.0, where), "system");
    return [system, direction, where](double t) { return parse_system(shift_system(system, direction, t, where), "system"); };
  }
  if (!system.contains("builtin") || !system["builtin"].is_string())
    config_fail(params.at("direction"), "explicit systems need a per-atom direction");
  const std::string name = system["builtin"].get<std::string>();
  parse_system(system, "system");
  return [name](double t) { return catalog::system_by_name(name, t); };
}

Plan plan_sweep(Fields& top, Fields& params, std::uint64_t seed) {
  const std::string kind = params.string("kind");
  const std::vector<double> ts = params.numbers("t_list");
  if (kind == "lambda1") {
    const Cocycle c = parse_cocycle(top.raw("cocycle"), "cocycle");
    const Json& dir = params.raw("direction");
    if (!dir.is_array() || dir.size() != c.size()) config_fail(params.at("direction"), "expected one matrix per atom");
    std::vector<Matrix> direction;
    for (std::size_t i = 0; i < dir.size(); ++i)
      direction.push_back(parse_matrix(dir[i], params.at("direction") + "[" + std::to_string(i) + "]"));
    FurstenbergOptions fo;
    fo.burn_in = static_cast<int>(params.integer("burn_in_steps", 0, kMaxInt));
    fo.samples = static_cast<int>(params.integer("samples", 100, kMaxInt));
    fo.seed = seed;
    return [=](int workers) {
      Outcome o;
      o.results = sweep_json(lambda1_sweep(c, direction, ts, fo, workers), o);
      return o;
    };
  }
  if (kind == "circle") {
    const SystemPath path = parse_path(top, params);
    CircleSweepOptions co;
    co.x0 = parse_point(path(0.0).space(), params.raw("x0"), params.at("x0"));
    co.burn_in = static_cast<int>(params.integer("burn_in_steps", 0, kMaxInt));
    co.samples = static_cast<int>(params.integer("samples", 100, kMaxInt));
    co.seed = seed;
    return [=](int workers) mutable {
      co.workers = workers;
      Outcome o;
      o.results = sweep_json(circle_exponent_sweep(path, ts, co), o);
      return o;
    };
  }
  if (kind == "stationary") {
    const SystemPath path = parse_path(top, params);
    if (!path(0.0).space().one_dimensional()) config_fail("system.space", "stationary sweeps need a one-dimensional space");
    StabilityOptions so;
    so.cells = static_cast<std::size_t>(params.integer("cells", 1, 1 << 20));
    so.subpoints = static_cast<std::size_t>(params.integer("subpoints", 1, 4096));
    return [=](int workers) mutable {
      so.workers = workers;
      Outcome o;
      o.results = sweep_json(stationary_stability_sweep(path, ts, so), o);
      return o;
    };
  }
  config_fail(params.at("kind"), "unknown sweep kind '" + kind + "' (lambda1, circle, stationary)");
}

Plan plan_synchronization(Fields& top, Fields& params, std::uint64_t seed) {
  const RandomMapSystem s = parse_system(top.raw("system"), "system");
  const double eps = params.positive("pair_grid_eps");
  const int n = static_cast<int>(params.integer("n_steps", 1, kMaxInt));
  const int trials = static_cast<int>(params.integer("trials", 1, kMaxInt));
  const double threshold = params.positive("threshold");
  return [=](int workers) {
    const SynchronizationResult r = synchronization_test(s, eps, n, trials, threshold, seed, workers);
    Outcome o;
    o.results = {{"fraction", num(r.fraction)}, {"pairs", r.pairs}, {"trials", r.trials}};
    return o;
  };
}

Plan plan_basins(Fields& top, Fields& params, std::uint64_t seed) {
  const RandomMapSystem s = parse_system(top.raw("system"), "system");
  if (!s.space().one_dimensional()) config_fail("system.space", "basins need a one-dimensional space");
  const auto cells = static_cast<std::size_t>(params.integer("cells", 1, 1 << 20));
  const auto sub = static_cast<std::size_t>(params.integer("subpoints", 1, 4096));
  const int n = static_cast<int>(params.integer("n_steps", 1, kMaxInt));
  const int trials = static_cast<int>(params.integer("trials", 1, kMaxInt));
  return [=](int workers) {
    const Grid grid(s.space(), cells);
    const StationaryReport rep = stationary_report(discretize(s, grid, sub, workers).q);
    const BasinReport b = empirical_basins(s, grid, rep, n, trials, seed, workers);
    Outcome o;
    o.results = {{"multiplicity", rep.multiplicity},
                 {"unattributed_fraction", num(b.unattributed_fraction)},
                 {"threshold", num(b.threshold)}};
    CsvTable t{"basins", {"cell", "center"}, {}};
    for (std::size_t c = 0; c < rep.multiplicity; ++c) t.header.push_back("p" + std::to_string(c));
    t.header.push_back("unattributed");
    for (std::size_t i = 0; i < cells; ++i) {
      std::vector<double> row{double(i), grid.center_coordinate(i)};
      for (Eigen::Index c = 0; c < b.attribution.cols(); ++c) row.push_back(b.attribution(static_cast<Eigen::Index>(i), c));
      row.push_back(b.unattributed[i]);
      t.rows.push_back(std::move(row));
    }
    o.tables.push_back(std::move(t));
    return o;
  };
}

Plan plan_law_convergence(Fields& top, Fields& params, std::uint64_t seed) {
  const RandomMapSystem s = parse_system(top.raw("system"), "system");
  if (!s.space().one_dimensional()) config_fail("system.space", "law convergence needs a one-dimensional space");
  const SpacePoint x = parse_point(s.space(), params.raw("x"), params.at("x"));
  const auto cells = static_cast<std::size_t>(params.integer("cells", 1, 1 << 20));
  const auto sub = static_cast<std::size_t>(params.integer("subpoints", 1, 4096));
  std::vector<int> n_list = params.integers("n_list", 0, kMaxInt);
  if (!std::is_sorted(n_list.begin(), n_list.end())) config_fail(params.at("n_list"), "n_list must be ascending");
  const int trials = static_cast<int>(params.integer("trials", 1, kMaxInt));
  return [=](int workers) {
    const Grid grid(s.space(), cells);
    const StationaryReport rep = stationary_report(discretize(s, grid, sub, workers).q);
    const auto rows = law_convergence_test(s, x, grid, rep, n_list, trials, seed, workers);
    Outcome o;
    Json jr = Json::array();
    CsvTable t{"law", {"n", "w1", "nearest"}, {}};
    for (const auto& r : rows) {
      jr.push_back({{"n", r.n}, {"w1", num(r.w1)}, {"nearest", r.nearest}});
      t.rows.push_back({double(r.n), r.w1, double(r.nearest)});
    }
    o.results = {{"multiplicity", rep.multiplicity}, {"rows", jr}};
    o.tables.push_back(std::move(t));
    return o;
  };
}

struct ParsedConfig {
  std::string kind;
  std::string name;
  std::uint64_t seed = 0;
  std::optional<std::string> out_dir;
  std::vector<Expectation> expect;
  Plan plan;
};

ParsedConfig parse_config(const Json& config) {
  Fields top(config, "");
  ParsedConfig pc;
  pc.kind = top.string("experiment");
  pc.seed = top.seed("master_seed");
  pc.name = top.has("name") ? top.string("name") : pc.kind;
  if (pc.name.empty() || pc.name.find_first_of("/\\") != std::string::npos)
    config_fail("name", "must be a nonempty file-name-safe string");
  if (top.has("output")) {
    Fields out = top.object("output");
    pc.out_dir = out.string("dir");
    out.finish();
  }
  if (top.has("expect")) {
    const Json& ex = top.raw("expect");
    if (!ex.is_array()) config_fail("expect", "expected an array");
    for (std::size_t i = 0; i < ex.size(); ++i) {
      Fields e(ex[i], "expect[" + std::to_string(i) + "]");
      Expectation x;
      x.path = e.path();
      x.field = e.string("field");
      if (e.has("min")) x.min = e.number("min");
      if (e.has("max")) x.max = e.number("max");
      if (!x.min && !x.max) config_fail(e.path(), "needs min or max");
      e.finish();
      pc.expect.push_back(x);
    }
  }
  Fields params = top.object("params");
  using Planner = Plan (*)(Fields&, Fields&, std::uint64_t);
  const std::pair<const char*, Planner> planners[] = {
      {"certificate", plan_certificate},   {"spectrum", plan_spectrum},
      {"furstenberg", plan_furstenberg},   {"koopman", plan_koopman},
      {"kingman", plan_kingman},           {"clt", plan_clt},
      {"large-deviation", plan_large_deviation}, {"sweep", plan_sweep},
      {"synchronization", plan_synchronization}, {"basins", plan_basins},
      {"law-convergence", plan_law_convergence},
  };
  for (const auto& [name, planner] : planners)
    if (pc.kind == name) pc.plan = planner(top, params, pc.seed);
  if (!pc.plan) config_fail("experiment", "unknown experiment kind '" + pc.kind + "'");
  params.finish();
  top.finish();
  return pc;
}

Verdict evaluate(const Expectation& e, const Json& results) {
  const auto ptr = pointer_of(e.field);
  if (!results.contains(ptr)) config_fail(e.path + ".field", "no result field '" + e.field + "'");
  const Json& v = results.at(ptr);
  if (!v.is_number()) return {"expect " + e.field, false, "value is not a number"};
  const double x = v.get<double>();
  bool ok = true;
  std::ostringstream os;
  os << std::setprecision(10) << e.field << " = " << x;
  if (e.min) {
    ok = ok && x >= *e.min;
    os << ", min " << *e.min;
  }
  if (e.max) {
    ok = ok && x <= *e.max;
    os << ", max " << *e.max;
  }
  return {"expect " + e.field, ok, os.str()};
}

}  // namespace

bool RunReport::all_pass() const {
  return std::all_of(verdicts.begin(), verdicts.end(), [](const Verdict& v) { return v.pass; });
}

void write_csv(std::ostream& os, const CsvTable& table) {
  std::ostringstream buf;
  buf.imbue(std::locale::classic());
  buf << std::setprecision(17);
  for (std::size_t i = 0; i < table.header.size(); ++i) buf << (i ? "," : "") << table.header[i];
  buf << '\n';
  for (const auto& row : table.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) {
      if (i) buf << ',';
      if (std::isfinite(row[i])) buf << row[i];
    }
    buf << '\n';
  }
  os << buf.str();
}

RunReport run_config(const Json& config, const RunOptions& options) {
  const ParsedConfig pc = parse_config(config);
  const auto start = std::chrono::steady_clock::now();
  Outcome out = pc.plan(std::max(1, options.workers));
  for (const auto& e : pc.expect) out.verdicts.push_back(evaluate(e, out.results));
  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

  RunReport r;
  r.verdicts = out.verdicts;
  r.tables = std::move(out.tables);
  Json verdicts = Json::array();
  for (const auto& v : r.verdicts) verdicts.push_back({{"name", v.name}, {"pass", v.pass}, {"detail", v.detail}});
  r.json = {{"name", pc.name},
            {"experiment", pc.kind},
            {"version", kLibraryVersion},
            {"master_seed", pc.seed},
            {"config", config},
            {"results", out.results},
            {"verdicts", verdicts},
            {"pass", r.all_pass()},
            {"runtime", {{"wall_clock_seconds", seconds}, {"workers", std::max(1, options.workers)}}}};
  return r;
}

Json read_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) config_fail("<file>", "cannot read " + path);
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    config_fail("<file>", std::string("not valid JSON: ") + e.what());
  }
}

std::string write_report(const RunReport& report, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const std::string name = report.json.at("name").get<std::string>();
  const auto base = std::filesystem::path(dir) / name;
  const std::string path = base.string() + ".json";
  {
    std::ofstream os(path, std::ios::binary);
    os << report.json.dump(2) << '\n';
    if (!os) fail(ErrorKind::InvalidArgument, "cannot write " + path);
  }
  for (const auto& t : report.tables) {
    std::ofstream os(base.string() + "." + t.name + ".csv", std::ios::binary);
    write_csv(os, t);
  }
  return path;
}

int run_command(const std::string& config_path, const RunOptions& options, std::ostream& out, std::ostream& err) {
  try {
    const Json config = read_config_file(config_path);
    const RunReport r = run_config(config, options);
    std::optional<std::string> dir = options.out_dir;
    if (!dir && config.contains("output")) dir = config["output"]["dir"].get<std::string>();
    if (dir) {
      out << "report: " << write_report(r, *dir) << '\n';
    } else {
      out << r.json.dump(2) << '\n';
    }
    for (const auto& v : r.verdicts) out << (v.pass ? "PASS " : "FAIL ") << v.name << ": " << v.detail << '\n';
    return r.all_pass() ? 0 : 2;
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

std::optional<std::string> first_difference(const Json& expected, const Json& actual, const std::string& path) {
  auto child = [&](const std::string& key) { return path.empty() ? key : path + "." + key; };
  if (expected.is_number() && actual.is_number()) {
    if (expected.is_number_integer() && actual.is_number_integer()) {
      const bool eq = expected.is_number_unsigned() || actual.is_number_unsigned()
                          ? expected.get<std::uint64_t>() == actual.get<std::uint64_t>()
                          : expected.get<std::int64_t>() == actual.get<std::int64_t>();
      return eq ? std::nullopt : std::optional(path);
    }
    const double a = expected.get<double>();
    const double b = actual.get<double>();
    return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b) ? std::nullopt : std::optional(path);
  }
  if (expected.type() != actual.type()) return path;
  if (expected.is_object()) {
    for (const auto& item : expected.items()) {
      if (path.empty() && item.key() == "runtime") continue;
      if (!actual.contains(item.key())) return child(item.key());
      if (auto d = first_difference(item.value(), actual[item.key()], child(item.key()))) return d;
    }
    for (const auto& item : actual.items()) {
      if (path.empty() && item.key() == "runtime") continue;
      if (!expected.contains(item.key())) return child(item.key());
    }
    return std::nullopt;
  }
  if (expected.is_array()) {
    if (expected.size() != actual.size()) return path;
    for (std::size_t i = 0; i < expected.size(); ++i)
      if (auto d = first_difference(expected[i], actual[i], path + "[" + std::to_string(i) + "]")) return d;
    return std::nullopt;
  }
  return expected == actual ? std::nullopt : std::optional(path);
}

ReplayResult replay_check(const std::string& report_path, int workers) {
  Json stored;
  {
    std::ifstream in(report_path);
    if (!in) fail(ErrorKind::ReportUnreadable, "cannot read " + report_path);
    try {
      stored = Json::parse(in);
    } catch (const Json::parse_error& e) {
      fail(ErrorKind::ReportUnreadable, std::string("not valid JSON: ") + e.what());
    }
  }
  if (!stored.is_object() || !stored.contains("config") || !stored.contains("version"))
    fail(ErrorKind::ReportUnreadable, "report has no config echo");
  RunOptions o;
  o.workers = workers;
  const RunReport fresh = run_config(stored["config"], o);
  ReplayResult r;
  if (auto d = first_difference(stored, fresh.json)) {
    r.mismatch = d->empty() ? std::string("<root>") : *d;
    const auto ptr = pointer_of(*d);
    std::ostringstream os;
    os << "report has " << (stored.contains(ptr) ? stored.at(ptr).dump() : std::string("<missing>")) << ", replay has "
       << (fresh.json.contains(ptr) ? fresh.json.at(ptr).dump() : std::string("<missing>"));
    r.detail = os.str();
    return r;
  }
  r.pass = true;
  return r;
}

int replay_command(const std::string& report_path, int workers, std::ostream& out, std::ostream& err) {
  try {
    const ReplayResult r = replay_check(report_path, workers);
    if (r.pass) {
      out << "replay: pass\n";
      return 0;
    }
    out << "replay: mismatch at " << r.mismatch << " (" << r.detail << ")\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
  }
  return 1;
}

}  // namespace rmlab
