#pragma once

#include <cmath>
#include <numbers>

namespace rmlab {

template <class Rng>
SpacePoint random_point(const Space& space, Rng& rng) {
  switch (space.kind()) {
    case SpaceKind::Circle:
      return SpacePoint(rng.uniform());
    case SpaceKind::Interval:
      return SpacePoint(space.lower() + (space.upper() - space.lower()) * rng.uniform());
    case SpaceKind::Projective: {
      SpacePoint p;
      p.set_dim(space.ambient_dim());
      for (int i = 0; i < p.dim(); i += 2) {
        // Box-Muller pair.
        const double r = std::sqrt(-2.0 * std::log(rng.uniform()));
        const double th = 2.0 * std::numbers::pi * rng.uniform();
        p[i] = r * std::cos(th);
        if (i + 1 < p.dim()) p[i + 1] = r * std::sin(th);
      }
      return space.canonicalize(p);
    }
  }
  return {};
}

}  // namespace rmlab
