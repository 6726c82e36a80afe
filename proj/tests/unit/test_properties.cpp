#include <doctest.h>

#include "properties.hpp"

TEST_CASE("structural properties") {
  for (std::uint64_t seed : {1u, 2u}) {
    for (const auto& r : rmlab::props::all(seed)) {
      CAPTURE(r.name);
      CAPTURE(r.detail);
      CHECK(r.pass);
      CHECK(r.cases > 0);
    }
  }
}
