#pragma once

// Finite Markov chain structure: recurrent classes, per-class stationary
// vectors, periods and absorption probabilities. Shared by the Ulam
// discretization and the finite-state subadditive harness.

#include <cstddef>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

namespace rmlab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

inline constexpr double kStructuralZero = 1e-12;

/// Throws unless every row is nonnegative and sums to 1 within 1e-12.
void check_row_stochastic(const SparseMatrix& q);

struct ChainStructure {
  std::vector<std::vector<int>> closed_classes;  // sorted cell indices
  std::vector<int> periods;
  std::vector<int> transient;                    // cells in no closed class
  std::vector<int> class_of;                     // -1 for transient cells
};

/// Condenses the graph of entries >= 1e-12 and keeps the closed components.
ChainStructure chain_structure(const SparseMatrix& q);

/// Stationary probability vector of one closed class (full length, zero
/// elsewhere) with ||mu Q - mu||_1 <= tol.
Eigen::VectorXd class_stationary(const SparseMatrix& q, const std::vector<int>& cls, double tol);

/// h(i, c): probability of absorption into closed class c from cell i.
Eigen::MatrixXd absorption_probabilities(const SparseMatrix& q, const ChainStructure& s);

/// ||mu Q - mu||_1.
double left_residual(const SparseMatrix& q, const Eigen::VectorXd& mu);

SparseMatrix to_sparse(const Eigen::MatrixXd& p);

}  // namespace rmlab
