#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "rmlab/catalog.hpp"
#include "rmlab/koopman.hpp"
#include "rmlab/linear_cocycles.hpp"

using namespace rmlab;

namespace {

DiscretizedKoopman ulam(const RandomMapSystem& s, std::size_t n) { return discretize(s, Grid(s.space(), n)); }

Eigen::MatrixXd dense(const SparseMatrix& q) { return Eigen::MatrixXd(q); }

}  // namespace

TEST_CASE("discretize") {
  const auto ifs = ulam(catalog::ifs_halves(), 64);
  for (Eigen::Index i = 0; i < ifs.q.outerSize(); ++i) {
    int entries = 0;
    for (SparseMatrix::InnerIterator it(ifs.q, i); it; ++it) {
      CHECK(it.value() == 0.5);
      ++entries;
    }
    CHECK(entries == 2);
  }
  const auto rot = ulam(catalog::rotation_by_third(), 3);
  const Eigen::MatrixXd p = dense(rot.q);
  CHECK(p(0, 1) == 1.0);
  CHECK(p(1, 2) == 1.0);
  CHECK(p(2, 0) == 1.0);
  const auto two = ulam(catalog::two_attractor(), 128);
  CHECK(two.q.coeff(0, 0) == 1.0);
  CHECK(two.q.coeff(64, 64) == 1.0);
}

TEST_CASE("stationary_report") {
  const auto ifs = ulam(catalog::ifs_halves(), 64);
  const auto r = stationary_report(ifs.q);
  CHECK(r.multiplicity == 1);
  for (Eigen::Index i = 0; i < 64; ++i) CHECK(std::abs(r.measures[0](i) - 1.0 / 64) <= 1e-6);
  CHECK(r.second_eigenvalue_modulus < 1.0);

  const auto two = stationary_report(ulam(catalog::two_attractor(), 128).q);
  REQUIRE(two.multiplicity == 2);
  CHECK(two.measures[0](0) == doctest::Approx(1.0));
  CHECK(two.measures[1](64) == doctest::Approx(1.0));
  CHECK(two.periods == std::vector<int>{1, 1});
  CHECK(two.second_eigenvalue_modulus == 1.0);

  const auto rot = stationary_report(ulam(catalog::rotation_by_third(), 3).q);
  CHECK(rot.multiplicity == 1);
  CHECK(rot.periods == std::vector<int>{3});
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(rot.measures[0](i) == doctest::Approx(1.0 / 3));
  CHECK(rot.second_eigenvalue_modulus == 1.0);
}

TEST_CASE("spectral gap matches a dense eigenvalue oracle") {
  for (std::size_t n : {16u, 64u}) {
    const auto dk = ulam(catalog::ifs_halves(), n);
    const double rho = spectral_gap_estimate(dk.q);
    Eigen::EigenSolver<Eigen::MatrixXd> es(dense(dk.q));
    std::vector<double> mods;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
    std::sort(mods.rbegin(), mods.rend());
    CHECK(mods[0] == doctest::Approx(1.0));
    CHECK(rho == doctest::Approx(mods[1]).epsilon(1e-3));
  }
  const auto minimal = ulam(catalog::minimal_circle_family(), 64);
  const double rho = spectral_gap_estimate(minimal.q);
  Eigen::EigenSolver<Eigen::MatrixXd> es(dense(minimal.q));
  std::vector<double> mods;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mods.push_back(std::abs(es.eigenvalues()(i)));
  std::sort(mods.rbegin(), mods.rend());
  CHECK(rho == doctest::Approx(mods[1]).epsilon(1e-3));
}

TEST_CASE("cesaro_projection") {
  const auto ifs = ulam(catalog::ifs_halves(), 64);
  const auto rep = stationary_report(ifs.q);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(64);
  CHECK(cesaro_projection(ifs.q, rep, ones, 7).distance <= 1e-12);
  const Grid g(Space::interval(0.0, 1.0), 64);
  Eigen::VectorXd x(64);
  for (Eigen::Index i = 0; i < 64; ++i) x(i) = g.center_coordinate(static_cast<std::size_t>(i));
  double prev = 1.0;
  for (int n : {50, 100, 200}) {
    const auto c = cesaro_projection(ifs.q, rep, x, n);
    CHECK(c.projection(3) == doctest::Approx(0.5));
    CHECK(c.distance <= prev + 1.0 / n);
    prev = c.distance;
  }
  CHECK(prev <= 0.02);

  const auto rot = ulam(catalog::rotation_by_third(), 3);
  Eigen::VectorXd ind = Eigen::VectorXd::Zero(3);
  ind(0) = 1.0;
  const auto c = cesaro_projection(rot.q, ind, 9);
  for (Eigen::Index i = 0; i < 3; ++i) CHECK(c.average(i) == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("limit projection sums to one over class indicators") {
  const auto dk = ulam(catalog::two_attractor(), 128);
  const auto rep = stationary_report(dk.q);
  Eigen::VectorXd total = Eigen::VectorXd::Zero(128);
  for (const auto& cls : rep.classes) {
    Eigen::VectorXd ind = Eigen::VectorXd::Zero(128);
    for (int i : cls) ind(i) = 1.0;
    total += limit_projection(rep, ind);
  }
  for (Eigen::Index i = 0; i < 128; ++i) CHECK(total(i) == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("holder_contraction_check") {
  HolderOptions o;
  o.alpha = 1.0;
  o.n = 1;
  const auto ifs = holder_contraction_check(catalog::ifs_halves(), o);
  CHECK(ifs.q_hat == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(ifs.c_hat <= 1e-6);
  CHECK(!ifs.violated);
  const auto rot = holder_contraction_check(catalog::random_rotations(), o);
  CHECK(rot.q_hat >= 0.98);
  CHECK(rot.q_hat <= 1.0 + 1e-9);
  CHECK(rot.violated);

  HolderOptions p;
  p.alpha = 0.1;
  p.n = 30;
  p.net_eps = 0.02;
  const auto pair = holder_contraction_check(projective_system(catalog::hyperbolic_rotation_pair()), p);
  CHECK(pair.q_hat < 1.0);
  CHECK(!pair.violated);
}

TEST_CASE("empirical_basins") {
  const auto ifs = catalog::ifs_halves();
  const Grid g64(ifs.space(), 64);
  const auto r1 = stationary_report(discretize(ifs, g64).q);
  const auto b1 = empirical_basins(ifs, g64, r1, 20000, 4, 1);
  for (Eigen::Index i = 0; i < 64; ++i) CHECK(b1.attribution(i, 0) == 1.0);

  const auto two = catalog::two_attractor();
  const Grid g(two.space(), 128);
  const auto r = stationary_report(discretize(two, g).q);
  const auto b = empirical_basins(two, g, r, 200, 10, 1);
  CHECK(b.unattributed_fraction <= 2.0 / 128);
  for (std::size_t i = 0; i < 128; ++i) {
    const double x = g.center_coordinate(i);
    if (x < 0.24 || x > 0.76) CHECK(b.attribution(static_cast<Eigen::Index>(i), 0) == 1.0);
    if (x > 0.26 && x < 0.74) CHECK(b.attribution(static_cast<Eigen::Index>(i), 1) == 1.0);
  }
}

TEST_CASE("law_convergence_test") {
  const auto ifs = catalog::ifs_halves();
  const Grid g(ifs.space(), 64);
  const auto rep = stationary_report(discretize(ifs, g).q);
  const auto rows = law_convergence_test(ifs, SpacePoint(0.0), g, rep, {4, 10}, 20000, 1);
  CHECK(rows[1].w1 <= std::pow(2.0, -10) + 1.0 / 64 + 3.0 / std::sqrt(20000.0));

  const auto rot = catalog::rotation_by_third();
  const Grid g3(rot.space(), 3);
  const auto rr = stationary_report(discretize(rot, g3).q);
  for (const auto& row : law_convergence_test(rot, SpacePoint(0.0), g3, rr, {3, 30, 31}, 50, 1))
    CHECK(row.w1 >= 0.1);

  const auto two = catalog::two_attractor();
  const Grid g2(two.space(), 128);
  const auto r2 = stationary_report(discretize(two, g2).q);
  const auto tr = law_convergence_test(two, SpacePoint(0.1), g2, r2, {1, 5, 20, 40}, 200, 1);
  CHECK(tr.back().nearest == 0);
  CHECK(tr.back().w1 <= 1e-12);
  CHECK(tr[1].w1 < tr[0].w1);
}

TEST_CASE("grid_wasserstein1") {
  const Grid g(Space::interval(0.0, 1.0), 4);
  Eigen::VectorXd a = Eigen::VectorXd::Zero(4), b = Eigen::VectorXd::Zero(4);
  a(0) = 1.0;
  b(3) = 1.0;
  CHECK(grid_wasserstein1(g, a, b) == doctest::Approx(0.75));
  const Grid c(Space::circle(), 4);
  CHECK(grid_wasserstein1(c, a, b) == doctest::Approx(0.25));
  CHECK(grid_wasserstein1(c, a, a) == 0.0);
}
