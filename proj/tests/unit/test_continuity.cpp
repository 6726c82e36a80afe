#include <doctest.h>

#include <cmath>

#include "rmlab/catalog.hpp"
#include "rmlab/continuity.hpp"
#include "error_kind.hpp"

using namespace rmlab;

TEST_CASE("lambda1_sweep along cat map plus tI") {
  const std::vector<double> ts{0.0, 0.01, 0.02, 0.05, 0.1, 0.2};
  FurstenbergOptions o;
  o.burn_in = 100;
  o.samples = 2000;
  const auto r = lambda1_sweep(catalog::cat_map(), {Matrix::Identity(2, 2)}, ts, o);
  REQUIRE(r.rows.size() == ts.size());
  for (const auto& row : r.rows) {
    const double oracle = std::log((3.0 + std::sqrt(5.0)) / 2.0 + row.t);
    CHECK(std::abs(row.estimate - oracle) <= 3.0 * row.std_error + 1e-9);
  }
  CHECK(r.rows[0].distance == 0.0);
  REQUIRE(r.fit.has_value());
  CHECK(r.fit->gamma_hat == doctest::Approx(1.0).epsilon(0.2));
  CHECK(r.continuous);

  const auto flat = lambda1_sweep(catalog::rotation_cocycle(), {Matrix::Zero(2, 2)}, {0.0, 0.1, 0.2}, o);
  CHECK(!flat.fit.has_value());
  for (const auto& row : flat.rows) CHECK(row.distance == 0.0);

  Matrix singular(2, 2);
  singular << -2.0, 0.0, 0.0, 0.0;
  CHECK(error_kind_of([&] { lambda1_sweep(catalog::cat_map(), {singular}, {0.0, 0.5}, o); }) ==
        ErrorKind::NotInvertibleAt);
}

TEST_CASE("circle_exponent_sweep on the two-attractor family") {
  CircleSweepOptions o;
  o.burn_in = 50;
  o.samples = 2000;
  const std::vector<double> ts{0.0, 0.0, 0.01, 0.02, 0.05, 0.1};
  const auto r = circle_exponent_sweep([](double t) { return catalog::two_attractor(t); }, ts, o);
  REQUIRE(r.rows.size() == ts.size());
  for (const auto& row : r.rows) {
    const double oracle = 0.5 * (std::log(0.5 - row.t) + std::log(0.2));
    CHECK(std::abs(row.estimate - oracle) <= 1e-12);
  }
  CHECK(r.rows[1].distance == 0.0);
  REQUIRE(r.fit.has_value());
  CHECK(r.fit->points == 4);
  CHECK(r.fit->gamma_hat == doctest::Approx(1.0).epsilon(0.1));
  CHECK(error_kind_of([&] { circle_exponent_sweep([](double t) { return catalog::two_attractor(t); }, {0.0, 0.7}, o); }) ==
        ErrorKind::NotDiffeomorphismAt);
}

TEST_CASE("stationary_stability_sweep") {
  StabilityOptions o;
  o.cells = 64;
  const std::vector<double> ts{0.0, 0.01, 0.02, 0.05};
  const auto r = stationary_stability_sweep([](double t) { return catalog::ifs_halves(t); }, ts, o);
  CHECK(r.rows[0].estimate == 0.0);
  for (const auto& row : r.rows) {
    CHECK(row.multiplicity == 1);
    CHECK(row.estimate <= 1.0 / 64 + 5.0 * row.t);
  }
  CHECK(r.rows[3].estimate > r.rows[0].estimate);

  StabilityOptions o2;
  const auto two = stationary_stability_sweep([](double t) { return catalog::two_attractor(t); }, {0.0, 0.01, 0.05}, o2);
  for (const auto& row : two.rows) {
    CHECK(row.multiplicity == 2);
    CHECK(!row.has_estimate);
  }
}

TEST_CASE("holder_fit") {
  std::vector<SweepRow> rows;
  for (double d : {0.0, 0.01, 0.02, 0.04, 0.08}) rows.push_back({d, d, 1.0 + 3.0 * std::sqrt(d), 1e-6, 0, true});
  const auto f = holder_fit(rows, 1.0, 1e-6);
  REQUIRE(f.has_value());
  CHECK(f->points == 4);
  CHECK(f->gamma_hat == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(f->c_hat == doctest::Approx(3.0).epsilon(1e-9));
  rows.pop_back();
  CHECK(!holder_fit(rows, 1.0, 1e-6).has_value());
}

TEST_CASE("grid_c1_distance") {
  const auto a = catalog::two_attractor(0.0);
  const auto b = catalog::two_attractor(0.1);
  CHECK(grid_c1_distance(a, a, 4096, true) == 0.0);
  const double c0 = grid_c1_distance(a, b, 4096, false);
  const double c1 = grid_c1_distance(a, b, 4096, true);
  CHECK(c0 == doctest::Approx(0.5 * 0.1 / (4.0 * M_PI)).epsilon(1e-6));
  CHECK(c1 == doctest::Approx(c0 + 0.5 * 0.1).epsilon(1e-6));
}
