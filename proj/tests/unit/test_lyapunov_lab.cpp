#include <doctest.h>

#include <cmath>

#include "rmlab/catalog.hpp"
#include "rmlab/linear_cocycles.hpp"
#include "rmlab/lyapunov_lab.hpp"

using namespace rmlab;

namespace {
const double kTwoAttractorAtZero = 0.5 * (std::log(0.5) + std::log(0.2));
}

TEST_CASE("annealed_exponent_at") {
  const auto ifs = catalog::ifs_halves();
  for (double x : {0.0, 0.37, 1.0}) {
    const auto e = annealed_exponent_at(ifs, SpacePoint(x), 1, 100, 1);
    CHECK(e.estimate == -std::log(2.0));
    CHECK(e.std_error == 0.0);
  }
  const auto rot = catalog::random_rotations();
  CHECK(annealed_exponent_at(rot, SpacePoint(0.3), 20, 100, 1).estimate == 0.0);
  const auto two = catalog::two_attractor();
  CHECK(annealed_exponent_at(two, SpacePoint(0.0), 1, 100, 1).estimate ==
        doctest::Approx(kTwoAttractorAtZero).epsilon(1e-14));
  // Past the enumeration limit the estimate is Monte Carlo with a batch error.
  const auto mc = annealed_exponent_at(two, SpacePoint(0.1), 20, 2000, 3);
  CHECK(!mc.exact);
  CHECK(mc.std_error > 0.0);
  CHECK(mc.mc_samples == 2000);
}

TEST_CASE("mostly_contracting_certificate") {
  const auto pass = mostly_contracting_certificate(catalog::ifs_halves(), 0.05, 1, 100, 0.5, 1);
  CHECK(pass.pass);
  CHECK(pass.worst_estimate == -std::log(2.0));
  const auto fail = mostly_contracting_certificate(catalog::random_rotations(), 0.05, 5, 100, 0.0, 1);
  CHECK(!fail.pass);
  for (const auto& p : fail.points) CHECK(std::abs(p.estimate) <= 1e-12);
}

TEST_CASE("contraction_on_average_search") {
  ContractionSearchOptions o;
  o.alphas = {1.0};
  o.n_max = 1;
  o.r = 1.0;
  o.pair_grid_eps = 0.1;
  const auto w = contraction_on_average_search(catalog::ifs_halves(), o);
  REQUIRE(w.has_value());
  CHECK(w->q == doctest::Approx(0.5).epsilon(1e-6));
  CHECK(w->global);
  o.r = 0.5;
  o.n_max = 3;
  CHECK(!contraction_on_average_search(catalog::random_rotations(), o).has_value());
}

TEST_CASE("exponential_contraction_fit") {
  ContractionFitOptions o;
  o.trials = 20;
  o.n_max = 30;
  const auto ifs = exponential_contraction_fit(catalog::ifs_halves(), SpacePoint(0.4), o);
  CHECK(ifs.q_hat == doctest::Approx(0.5).epsilon(0.02));
  CHECK(ifs.success_fraction == 1.0);
  const auto rot = exponential_contraction_fit(catalog::random_rotations(), SpacePoint(0.4), o);
  CHECK(std::abs(rot.lambda_con) < 1e-6);
  CHECK(rot.success_fraction == 0.0);
  const auto two = exponential_contraction_fit(catalog::two_attractor(), SpacePoint(0.0), o);
  const auto oracle = annealed_exponent_at(catalog::two_attractor(), SpacePoint(0.0), 1, 10, 1);
  CHECK(std::abs(two.lambda_con - oracle.estimate) <= 0.1);
}

TEST_CASE("synchronization_test") {
  CHECK(synchronization_test(catalog::ifs_halves(), 0.1, 30, 10, 1e-6, 1).fraction == 1.0);
  CHECK(synchronization_test(catalog::random_rotations(), 0.1, 30, 10, 1e-6, 1).fraction == 0.0);
  const double f = synchronization_test(catalog::two_attractor(), 0.05, 200, 10, 1e-6, 1).fraction;
  CHECK(f > 0.0);
  CHECK(f < 1.0);
}

TEST_CASE("lambda_of_system") {
  CHECK(lambda_of_system(catalog::ifs_halves(), 1, 10, 0.1, 1).estimate == -std::log(2.0));
  CHECK(lambda_of_system(catalog::random_rotations(), 4, 10, 0.1, 1).estimate == 0.0);
  const auto at_repeller = lambda_of_system(catalog::two_attractor(), 1, 10, 0.05, 1);
  CHECK(at_repeller.estimate == doctest::Approx(0.5 * (std::log(1.5) + std::log(1.8))).epsilon(1e-12));
  // 1/4 is a common repelling fixed point, so the maximum never turns negative.
  const auto late = lambda_of_system(catalog::two_attractor(), 40, 400, 0.05, 1);
  CHECK(std::abs(late.estimate - at_repeller.estimate) <= 3.0 * late.std_error);
}

TEST_CASE("contraction slope is bounded by the system exponent") {
  ContractionFitOptions o;
  o.trials = 20;
  o.n_max = 40;
  const auto sys = catalog::two_attractor();
  const auto fit = exponential_contraction_fit(sys, SpacePoint(0.1), o);
  const auto lam = lambda_of_system(sys, 40, 400, 0.05, 2);
  CHECK(fit.lambda_con <= lam.estimate + 3.0 * lam.std_error);
}

TEST_CASE("stationary_exponent_estimate") {
  const auto e = stationary_exponent_estimate(catalog::two_attractor(), SpacePoint(0.0), 10, 1000, 1);
  CHECK(e.value == doctest::Approx(kTwoAttractorAtZero).epsilon(1e-14));
  const auto r = stationary_exponent_estimate(catalog::random_rotations(), SpacePoint(0.2), 10, 1000, 1);
  CHECK(r.value == 0.0);
}
