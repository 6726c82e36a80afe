#include <doctest.h>

#include <cmath>

#include "rmlab/catalog.hpp"
#include "rmlab/errors.hpp"
#include "rmlab/linear_cocycles.hpp"
#include "rmlab/random_systems.hpp"
#include "error_kind.hpp"

using namespace rmlab;

namespace {

RandomMapSystem single(const Space& s, FiberFamily f) { return RandomMapSystem(s, {{FiberMap(s, std::move(f)), 1.0}}); }

Word word_of(std::vector<std::uint32_t> symbols) { return Word{std::move(symbols), 0, 0}; }

Matrix m2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

}  // namespace

TEST_CASE("sample_word") {
  const auto s = catalog::rotation_by_third();
  CHECK(sample_word(s, 5, 1, 0).symbols == std::vector<std::uint32_t>(5, 0));
  const auto ifs = catalog::ifs_halves();
  CHECK(sample_word(ifs, 50, 3, 7).symbols == sample_word(ifs, 50, 3, 7).symbols);
  CHECK(sample_word(ifs, 50, 3, 7).symbols != sample_word(ifs, 50, 3, 8).symbols);
  // Symbol k depends only on (seed, stream, k): prefixes agree.
  const Word a = sample_word(ifs, 20, 3, 7);
  const Word b = sample_word(ifs, 40, 3, 7);
  CHECK(std::equal(a.symbols.begin(), a.symbols.end(), b.symbols.begin()));
}

TEST_CASE("iterate") {
  const Space unit = Space::interval(0.0, 1.0);
  const auto half = single(unit, AffineInterval{0.5, 0.0});
  const auto orbit = iterate(half, word_of({0, 0, 0}), SpacePoint(1.0));
  REQUIRE(orbit.size() == 4);
  CHECK(orbit[1][0] == 0.5);
  CHECK(orbit[3][0] == 0.125);
  CHECK(iterate(half, word_of({}), SpacePoint(0.3)).size() == 1);

  const auto rot = single(Space::circle(), CircleWave{0.25, 0.0, 1});
  const auto r = iterate(rot, word_of({0, 0}), SpacePoint(0.9));
  CHECK(r[1][0] == doctest::Approx(0.15).epsilon(1e-12));
  CHECK(r[2][0] == doctest::Approx(0.4).epsilon(1e-12));
}

TEST_CASE("construction-time validation") {
  const Space unit = Space::interval(0.0, 1.0);
  CHECK(error_kind_of([&] { (void)FiberMap(unit, AffineInterval{1.0, 0.5}); }) == ErrorKind::EscapedSpace);
  CHECK(error_kind_of([&] {
          (void)RandomMapSystem(unit, {{FiberMap(unit, AffineInterval{0.5, 0.0}), 0.5},
                                 {FiberMap(unit, AffineInterval{0.5, 0.5}), 0.4}});
        }) == ErrorKind::InvalidArgument);
  CHECK(error_kind_of([&] { (void)RandomMapSystem(unit, {{FiberMap(unit, AffineInterval{0.5, 0.0}), -1.0}}); }) ==
        ErrorKind::InvalidArgument);
  CHECK(error_kind_of([&] { (void)FiberMap(Space::projective(2), ProjectiveOfMatrix{m2(1, 1, 1, 1)}); }) ==
        ErrorKind::InvalidArgument);
}

TEST_CASE("local Lipschitz constants along words") {
  const Space unit = Space::interval(0.0, 1.0);
  const auto half = single(unit, AffineInterval{0.5, 0.0});
  CHECK(local_lipschitz_along(half, word_of({0, 0, 0, 0}), SpacePoint(0.7)) == doctest::Approx(1.0 / 16.0));
  const auto rots = catalog::random_rotations();
  CHECK(local_lipschitz_along(rots, sample_word(rots, 30, 1, 1), SpacePoint(0.2)) == 1.0);

  const Space p2 = Space::projective(2);
  const auto hyp = single(p2, ProjectiveOfMatrix{m2(2, 0, 0, 0.5)});
  const SpacePoint e1 = p2.point(std::vector<double>{1, 0});
  const SpacePoint e2 = p2.point(std::vector<double>{0, 1});
  CHECK(local_lipschitz_along(hyp, word_of({0}), e1) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(local_lipschitz_along(hyp, word_of({0}), e2) == doctest::Approx(4.0).epsilon(1e-12));
  // Finite-difference oracle on the projective metric.
  const FdEstimate fd1 = fd_local_lipschitz_along(hyp, word_of({0}), e1);
  const FdEstimate fd2 = fd_local_lipschitz_along(hyp, word_of({0}), e2);
  CHECK(fd1.value == doctest::Approx(0.25).epsilon(1e-4));
  CHECK(fd2.value == doctest::Approx(4.0).epsilon(1e-4));

  const auto zero = single(unit, AffineInterval{0.0, 0.5});
  CHECK(error_kind_of([&] { (void)local_lipschitz_along(zero, word_of({0}), SpacePoint(0.1)); }) ==
        ErrorKind::ZeroDerivative);
}

TEST_CASE("finite differences agree with analytic derivative norms") {
  const auto two = catalog::two_attractor();
  const auto pair = projective_system(catalog::hyperbolic_rotation_pair());
  for (std::uint64_t stream = 0; stream < 5; ++stream) {
    const Word w = sample_word(two, 6, 11, stream);
    for (double x : {0.05, 0.3, 0.61, 0.9}) {
      const double exact = local_lipschitz_along(two, w, SpacePoint(x));
      CHECK(fd_local_lipschitz_along(two, w, SpacePoint(x)).value == doctest::Approx(exact).epsilon(1e-4));
    }
    const Word wp = sample_word(pair, 4, 11, stream);
    for (double a : {0.2, 1.1, 2.5}) {
      const SpacePoint x = pair.space().point(std::vector<double>{std::cos(a), std::sin(a)});
      const double exact = local_lipschitz_along(pair, wp, x);
      CHECK(fd_local_lipschitz_along(pair, wp, x).value == doctest::Approx(exact).epsilon(1e-4));
    }
  }
}

TEST_CASE("tabulated maps use the finite-difference fallback") {
  const Space unit = Space::interval(0.0, 1.0);
  const auto tab = single(unit, UserTabulated{{0.0, 0.5, 1.0}, {0.1, 0.3, 0.4}});
  CHECK(!tab.has_derivatives());
  CHECK(error_kind_of([&] { (void)local_lipschitz_along(tab, word_of({0}), SpacePoint(0.2)); }) ==
        ErrorKind::InvalidArgument);
  const FdEstimate fd = fd_local_lipschitz_along(tab, word_of({0, 0}), SpacePoint(0.2));
  // 0.2 -> 0.18 (slope 0.4) -> 0.172 (slope 0.4)
  CHECK(fd.value == doctest::Approx(0.16).epsilon(1e-6));
  CHECK(fd.value_half == doctest::Approx(0.16).epsilon(1e-6));
  CHECK(fd.step == 1e-6);
  CHECK(global_lipschitz(tab.map(0)) == doctest::Approx(0.4));
}

TEST_CASE("global Lipschitz bounds") {
  const Space unit = Space::interval(0.0, 1.0);
  CHECK(global_lipschitz(FiberMap(unit, AffineInterval{0.5, 0.25})) == 0.5);
  CHECK(global_lipschitz(FiberMap(Space::projective(2), ProjectiveOfMatrix{m2(2, 0, 0, 0.5)})) ==
        doctest::Approx(16.0));
  CHECK(global_lipschitz(FiberMap(Space::circle(), CircleWave{0.0, 0.5, 2})) == doctest::Approx(1.5));
}
