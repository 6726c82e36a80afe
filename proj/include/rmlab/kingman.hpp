#pragma once

// Exact finite-state harness for subadditive sequences over a Markov
// operator: phi_{n+m} <= phi_n + P^n phi_m. Compares the growth constant
// computed from maxima, ergodic measures, pointwise limsups and the infimum
// formula.

#include <cstddef>
#include <optional>
#include <vector>

#include <Eigen/Dense>

namespace rmlab {

inline constexpr std::size_t kMaxChainStates = 512;
inline constexpr std::size_t kMaxSequenceLength = 4096;
inline constexpr double kSubadditiveSlack = 1e-9;
inline constexpr double kDivergenceFloor = -1e6;

class FiniteMarkovOperator {
 public:
  explicit FiniteMarkovOperator(Eigen::MatrixXd p);

  const Eigen::MatrixXd& matrix() const { return p_; }
  std::size_t states() const { return static_cast<std::size_t>(p_.rows()); }
  Eigen::VectorXd apply(const Eigen::VectorXd& phi) const { return p_ * phi; }

 private:
  Eigen::MatrixXd p_;
};

struct SubadditiveSequence {
  std::vector<Eigen::VectorXd> phi;  // phi[n-1] holds phi_n

  std::size_t length() const { return phi.size(); }
  const Eigen::VectorXd& at(std::size_t n) const { return phi[n - 1]; }
};

SubadditiveSequence build_additive(const FiniteMarkovOperator& p, const Eigen::VectorXd& phi1, std::size_t n);

struct SubadditivityCheck {
  bool pass = true;
  double worst_residual = 0.0;  // max of phi_{n+m} - phi_n - P^n phi_m
  std::size_t n = 0;
  std::size_t m = 0;
  std::size_t state = 0;
};

SubadditivityCheck check_subadditivity(const FiniteMarkovOperator& p, const SubadditiveSequence& seq);

/// Ergodic invariant probability vectors, one per recurrent class.
std::vector<Eigen::VectorXd> ergodic_measures(const FiniteMarkovOperator& p);

struct UniformKingmanReport {
  double max_limit = 0.0;       // max_x phi_N(x) / N
  double ergodic_max = 0.0;     // max over ergodic mu of inf_n <phi_n, mu> / n
  double pointwise_sup = 0.0;   // max_x of the tail-window max of phi_n(x) / n
  double inf_formula = 0.0;     // min_n max_x phi_n(x) / n
  std::vector<double> lambda_per_measure;
  double slack = 0.0;           // 10 / N
  double max_disagreement = 0.0;
  bool agree = false;
  bool additive = false;
  std::optional<double> additive_identity;  // max_mu <phi_1, mu> when additive
  bool additive_identity_holds = false;
  bool diverging = false;       // some phi_n / n fell below the floor
};

UniformKingmanReport verify_uniform_kingman(const FiniteMarkovOperator& p, const SubadditiveSequence& seq,
                                            std::size_t tail_window);

struct PointwiseKingmanReport {
  Eigen::VectorXd g_hat;        // phi_N / N
  double g_dot_mu = 0.0;
  double lambda_mu = 0.0;       // inf_n <phi_n, mu> / n
  bool mean_matches = false;
  bool ergodic = false;
  double support_spread = 0.0;  // max - min of g_hat on supp(mu)
  bool constant_on_support = true;
  double slack = 0.0;
};

PointwiseKingmanReport verify_pointwise_kingman(const FiniteMarkovOperator& p, const SubadditiveSequence& seq,
                                                const Eigen::VectorXd& mu);

}  // namespace rmlab
