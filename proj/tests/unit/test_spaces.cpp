#include <doctest.h>

#include <cmath>

#include "rmlab/errors.hpp"
#include "rmlab/rng.hpp"
#include "rmlab/spaces.hpp"

using namespace rmlab;

TEST_CASE("distance examples") {
  const Space c = Space::circle();
  CHECK(c.distance(SpacePoint(0.1), SpacePoint(0.9)) == doctest::Approx(0.2).epsilon(1e-14));
  const Space p2 = Space::projective(2);
  CHECK(p2.distance(p2.point(std::vector<double>{1, 0}), p2.point(std::vector<double>{0, 1})) == 1.0);
  const Space p3 = Space::projective(3);
  const SpacePoint x = p3.point(std::vector<double>{1, 2, 3});
  CHECK(p3.distance(x, x) == 0.0);
  const Space i = Space::interval(-1.0, 2.0);
  CHECK(i.distance(SpacePoint(-1.0), SpacePoint(2.0)) == 3.0);
  CHECK(i.diameter() == 3.0);
  CHECK(c.diameter() == 0.5);
  CHECK(p3.diameter() == 1.0);
}

TEST_CASE("distance rejects mismatched dimensions") {
  const Space p3 = Space::projective(3);
  const SpacePoint a{1.0, 0.0};
  const SpacePoint b{1.0, 0.0, 0.0};
  try {
    (void)p3.distance(a, b);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DimensionMismatch);
  }
}

TEST_CASE("projective distance equals |sin angle| and ignores sign") {
  const Space p2 = Space::projective(2);
  for (double a : {0.1, 0.7, 1.3, 2.9}) {
    for (double b : {0.0, 0.4, 2.0}) {
      const SpacePoint x = p2.point(std::vector<double>{std::cos(a), std::sin(a)});
      const SpacePoint y = p2.point(std::vector<double>{std::cos(b), std::sin(b)});
      const SpacePoint ny = p2.point(std::vector<double>{-std::cos(b), -std::sin(b)});
      CHECK(p2.distance(x, y) == doctest::Approx(std::abs(std::sin(a - b))).epsilon(1e-12));
      CHECK(p2.distance(x, y) == p2.distance(x, ny));
    }
  }
}

TEST_CASE("canonical projective representatives") {
  const Space p3 = Space::projective(3);
  const SpacePoint x = p3.point(std::vector<double>{0.0, -3.0, 4.0});
  CHECK(x[0] == 0.0);
  CHECK(x[1] == doctest::Approx(0.6));
  CHECK(x[2] == doctest::Approx(-0.8));
  CHECK(x == p3.point(std::vector<double>{0.0, 6.0, -8.0}));
}

TEST_CASE("epsilon nets") {
  const auto i = epsilon_net(Space::interval(0.0, 1.0), 0.5);
  REQUIRE(i.size() == 3);
  CHECK(i[0][0] == 0.0);
  CHECK(i[1][0] == 0.5);
  CHECK(i[2][0] == 1.0);

  const auto c = epsilon_net(Space::circle(), 0.25);
  REQUIRE(c.size() == 4);
  for (int k = 0; k < 4; ++k) CHECK(c[static_cast<std::size_t>(k)][0] == 0.25 * k);
  CHECK(covering_radius_estimate(Space::circle(), c, 10000, 1) <= 0.25);

  const Space p2 = Space::projective(2);
  const auto n2 = epsilon_net(p2, 0.05);
  CHECK(covering_radius_estimate(p2, n2, 10000, 2) <= 0.05);

  const Space p3 = Space::projective(3);
  const auto n3 = epsilon_net(p3, 0.3);
  CHECK(n3.size() <= 200);
  CHECK(covering_radius_estimate(p3, n3, 10000, 3) <= 0.3);
}

TEST_CASE("epsilon net size cap") {
  NetOptions o;
  o.max_points = 10;
  try {
    (void)epsilon_net(Space::circle(), 0.01, o);
    FAIL("expected UnsupportedResolution");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UnsupportedResolution);
  }
}

TEST_CASE("line coordinates round trip") {
  const Space p2 = Space::projective(2);
  for (double t : {0.0, 0.1, 0.5, 0.9}) {
    CHECK(p2.line_coordinate(p2.from_line_coordinate(t)) == doctest::Approx(t).epsilon(1e-12));
  }
  const Space c = Space::circle();
  CHECK(c.canonicalize(SpacePoint(1.25))[0] == doctest::Approx(0.25));
  CHECK(c.canonicalize(SpacePoint(-0.25))[0] == doctest::Approx(0.75));
  CHECK(circle_delta(0.9, 0.1) == doctest::Approx(0.2));
}
