#pragma once

// Ulam discretization of the annealed Koopman operator P phi(x) = E phi(f_w x)
// on one-dimensional spaces, and the finite shadows of its spectral theory:
// stationary measures, eigenvalue-1 multiplicity, periods, the spectral gap,
// Cesaro projections, basins and convergence of laws.

#include <cstdint>
#include <vector>

#include "rmlab/markov.hpp"
#include "rmlab/random_systems.hpp"

namespace rmlab {

// Uniform partition of a one-dimensional space in its line coordinate.
// Interval cells are [a + i w, a + (i+1) w); circle and Projective(2) cells
// are centered at i/N so that cell 0 contains the origin in its middle.
class Grid {
 public:
  Grid(Space space, std::size_t cells);

  const Space& space() const { return space_; }
  std::size_t size() const { return cells_; }
  double width() const { return width_; }
  double center_coordinate(std::size_t i) const;
  SpacePoint center(std::size_t i) const { return space_.from_line_coordinate(center_coordinate(i)); }
  /// Coordinate of sub-point k of K equally spaced points inside cell i.
  double subpoint_coordinate(std::size_t i, std::size_t k, std::size_t per_cell) const;
  std::size_t cell_of(const SpacePoint& p) const;
  std::size_t cell_of_coordinate(double t) const;

 private:
  Space space_;
  std::size_t cells_;
  double width_;
};

struct DiscretizedKoopman {
  Grid grid;
  SparseMatrix q;  // q(i, j) = sum_t p_t * fraction of cell-i sub-points sent into cell j
};

/// Sub-points per cell default to 16; with 1 the matrix is the cell-center rule.
DiscretizedKoopman discretize(const RandomMapSystem& system, const Grid& grid, std::size_t subpoints = 16,
                              int workers = 1);

struct StationaryReport {
  std::vector<Eigen::VectorXd> measures;    // one ergodic probability vector per closed class
  std::vector<std::vector<int>> classes;
  std::vector<int> periods;
  std::vector<int> transient;
  Eigen::MatrixXd absorption;               // N x r
  std::size_t multiplicity = 0;
  double second_eigenvalue_modulus = 1.0;
};

struct GapOptions {
  int max_iterations = 200000;
  int window = 200;
  double tol = 1e-4;
  std::uint64_t seed = 7;
};

StationaryReport stationary_report(const SparseMatrix& q, double tol = 1e-10, const GapOptions& gap = {});

/// rho_2 of Q on the complement of its eigenvalue-1 space; exactly 1 when
/// there are several closed classes or a periodic one.
double spectral_gap_estimate(const SparseMatrix& q, const StationaryReport& report, const GapOptions& options = {});
double spectral_gap_estimate(const SparseMatrix& q, const GapOptions& options = {});

/// Pi phi: class averages on recurrent cells, absorption-weighted on transient ones.
Eigen::VectorXd limit_projection(const StationaryReport& report, const Eigen::VectorXd& phi);

struct CesaroResult {
  Eigen::VectorXd average;     // A_n phi
  Eigen::VectorXd projection;  // Pi phi
  double distance = 0.0;       // sup norm of the difference
};

CesaroResult cesaro_projection(const SparseMatrix& q, const StationaryReport& report, const Eigen::VectorXd& phi, int n);
CesaroResult cesaro_projection(const SparseMatrix& q, const Eigen::VectorXd& phi, int n);

struct HolderOptions {
  double alpha = 1.0;
  int n = 1;
  double r = 1.0;
  int sample_functions = 16;
  std::uint64_t seed = 1;
  double net_eps = 0.005;
  std::size_t words = 16;           // Monte Carlo words for P^n phi (exact when enumerable)
  std::size_t exact_word_limit = 16;
  int max_frequency = 16;
  double violation_margin = 0.01;   // verdict Violated when q_hat >= 1 - margin
  int workers = 1;
};

struct HolderFit {
  double q_hat = 0.0;
  double c_hat = 0.0;
  bool violated = false;
  double c_reference = 0.0;         // 2 / r^alpha
  std::vector<double> seminorm_in, sup_in, seminorm_out;
};

/// Fits |P^n phi|_a <= q |phi|_a + C ||phi||_inf over random test functions.
HolderFit holder_contraction_check(const RandomMapSystem& system, const HolderOptions& options);

struct BasinReport {
  Eigen::MatrixXd attribution;           // N x r frequencies
  std::vector<double> unattributed;      // per cell
  double unattributed_fraction = 0.0;    // mean over cells
  double threshold = 0.0;                // total-variation attribution radius
};

BasinReport empirical_basins(const RandomMapSystem& system, const Grid& grid, const StationaryReport& report, int n,
                             int trials, std::uint64_t seed, int workers = 1);

/// W1 between two probability vectors on the grid (line-coordinate units).
double grid_wasserstein1(const Grid& grid, const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct LawConvergenceRow {
  int n = 0;
  double w1 = 0.0;
  int nearest = -1;
};

std::vector<LawConvergenceRow> law_convergence_test(const RandomMapSystem& system, const SpacePoint& x, const Grid& grid,
                                                    const StationaryReport& report, const std::vector<int>& n_list,
                                                    int trials, std::uint64_t seed, int workers = 1);

}  // namespace rmlab
