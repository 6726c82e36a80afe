#pragma once

// Parameter sweeps: Lyapunov exponents and stationary measures along a
// one-parameter family, distances to the base system and Holder fits of
// the response.

#include <functional>
#include <optional>
#include <vector>

#include "rmlab/koopman.hpp"
#include "rmlab/linear_cocycles.hpp"
#include "rmlab/random_systems.hpp"

namespace rmlab {

struct HolderPair {
  double c_hat = 0.0;
  double c_envelope = 0.0;  // smallest C with C d^gamma_hat above every fitted point
  double gamma_hat = 0.0;
  double gamma_stderr = 0.0;
  double residual = 0.0;
  std::size_t points = 0;
};

struct SweepRow {
  double t = 0.0;
  double distance = 0.0;
  double estimate = 0.0;  // exponent, or W1 to the base measure
  double std_error = 0.0;
  std::size_t multiplicity = 0;  // stationary sweeps only
  bool has_estimate = true;
};

struct SweepResult {
  std::vector<SweepRow> rows;
  std::optional<HolderPair> fit;  // needs >= 4 usable rows
  double base_estimate = 0.0;
  double base_std_error = 0.0;
  double max_adjacent_excess = 0.0;  // adjacent jump minus its allowed bound
  bool continuous = true;
};

using SystemPath = std::function<RandomMapSystem(double)>;

/// Fits log|estimate(t) - estimate(0)| against log distance(t) over rows with
/// positive distance and a response above 3 combined standard errors.
std::optional<HolderPair> holder_fit(const std::vector<SweepRow>& rows, double base_estimate, double base_std_error,
                                     std::size_t min_points = 4);

SweepResult lambda1_sweep(const Cocycle& base, const std::vector<Matrix>& direction, const std::vector<double>& t_list,
                          const FurstenbergOptions& options, int workers = 1);

struct CircleSweepOptions {
  SpacePoint x0{0.0};
  int burn_in = 1000;
  int samples = 100000;
  std::uint64_t seed = 1;
  std::size_t grid_points = 4096;
  int workers = 1;
};

SweepResult circle_exponent_sweep(const SystemPath& path, const std::vector<double>& t_list,
                                  const CircleSweepOptions& options);

struct StabilityOptions {
  std::size_t cells = 128;
  std::size_t subpoints = 16;
  std::size_t grid_points = 4096;
  int workers = 1;
};

SweepResult stationary_stability_sweep(const SystemPath& path, const std::vector<double>& t_list,
                                       const StabilityOptions& options);

/// sum_k w_k (sup |f_k - g_k| + sup |f_k' - g_k'|) on a uniform grid; the
/// derivative term is dropped when with_derivative is false.
double grid_c1_distance(const RandomMapSystem& f, const RandomMapSystem& g, std::size_t points, bool with_derivative);

}  // namespace rmlab
