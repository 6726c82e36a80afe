#include "rmlab/kingman.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "rmlab/errors.hpp"
#include "rmlab/markov.hpp"

namespace rmlab {

FiniteMarkovOperator::FiniteMarkovOperator(Eigen::MatrixXd p) : p_(std::move(p)) {
  require(p_.rows() == p_.cols() && p_.rows() >= 1, "Markov operator must be a nonempty square matrix");
  require(static_cast<std::size_t>(p_.rows()) <= kMaxChainStates, "Markov operator supports at most 512 states");
  for (Eigen::Index i = 0; i < p_.rows(); ++i) {
    for (Eigen::Index j = 0; j < p_.cols(); ++j) {
      if (!(p_(i, j) >= 0.0) || !std::isfinite(p_(i, j))) {
        std::ostringstream os;
        os << "entry (" << i << ", " << j << ") is negative or not finite";
        fail(ErrorKind::InvalidArgument, os.str());
      }
    }
    const double s = p_.row(i).sum();
    if (std::abs(s - 1.0) > 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i << " sums to " << s << ", expected 1";
      fail(ErrorKind::InvalidArgument, os.str());
    }
  }
}

SubadditiveSequence build_additive(const FiniteMarkovOperator& p, const Eigen::VectorXd& phi1, std::size_t n) {
  require(n >= 1 && n <= kMaxSequenceLength, "sequence length must lie in [1, 4096]");
  require(static_cast<std::size_t>(phi1.size()) == p.states(), "phi_1 must have one value per state");
  SubadditiveSequence seq;
  seq.phi.reserve(n);
  seq.phi.push_back(phi1);
  // phi_{n+1} = phi_1 + P phi_n
  for (std::size_t k = 1; k < n; ++k) seq.phi.push_back(phi1 + p.apply(seq.phi.back()));
  return seq;
}

SubadditivityCheck check_subadditivity(const FiniteMarkovOperator& p, const SubadditiveSequence& seq) {
  const std::size_t big_n = seq.length();
  const auto s = static_cast<Eigen::Index>(p.states());
  for (const auto& v : seq.phi) require(v.size() == s, "sequence entries must have one value per state");
  SubadditivityCheck out;
  out.worst_residual = -std::numeric_limits<double>::infinity();
  if (big_n < 2) {
    out.worst_residual = 0.0;
    return out;
  }
  // Column m-1 of w holds P^n phi_m for the current n.
  Eigen::MatrixXd phi(s, static_cast<Eigen::Index>(big_n));
  for (std::size_t m = 0; m < big_n; ++m) phi.col(static_cast<Eigen::Index>(m)) = seq.phi[m];
  Eigen::MatrixXd w = phi;
  for (std::size_t n = 1; n < big_n; ++n) {
    const auto cols = static_cast<Eigen::Index>(big_n - n);
    w.leftCols(cols) = p.matrix() * w.leftCols(cols);
    for (std::size_t m = 1; n + m <= big_n; ++m) {
      for (Eigen::Index x = 0; x < s; ++x) {
        const double r = seq.phi[n + m - 1](x) - seq.phi[n - 1](x) - w(x, static_cast<Eigen::Index>(m - 1));
        if (r > out.worst_residual) {
          out.worst_residual = r;
          out.n = n;
          out.m = m;
          out.state = static_cast<std::size_t>(x);
        }
      }
    }
  }
  out.pass = out.worst_residual <= kSubadditiveSlack;
  return out;
}

std::vector<Eigen::VectorXd> ergodic_measures(const FiniteMarkovOperator& p) {
  const SparseMatrix q = to_sparse(p.matrix());
  const ChainStructure st = chain_structure(q);
  std::vector<Eigen::VectorXd> out;
  for (const auto& cls : st.closed_classes) out.push_back(class_stationary(q, cls, 1e-13));
  return out;
}

namespace {

double lambda_of_measure(const SubadditiveSequence& seq, const Eigen::VectorXd& mu) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= seq.length(); ++n) best = std::min(best, seq.at(n).dot(mu) / static_cast<double>(n));
  return best;
}

bool is_additive(const FiniteMarkovOperator& p, const SubadditiveSequence& seq) {
  for (std::size_t n = 1; n < seq.length(); ++n) {
    const Eigen::VectorXd expected = seq.at(1) + p.apply(seq.at(n));
    const double scale = 1.0 + expected.lpNorm<Eigen::Infinity>();
    if ((seq.at(n + 1) - expected).lpNorm<Eigen::Infinity>() > 1e-12 * scale) return false;
  }
  return true;
}

}  // namespace

UniformKingmanReport verify_uniform_kingman(const FiniteMarkovOperator& p, const SubadditiveSequence& seq,
                                            std::size_t tail_window) {
  require(seq.length() >= 1, "sequence is empty");
  const SubadditivityCheck check = check_subadditivity(p, seq);
  if (!check.pass) {
    std::ostringstream os;
    os << "phi_{n+m} exceeds phi_n + P^n phi_m by " << check.worst_residual << " at n=" << check.n
       << ", m=" << check.m << ", state " << check.state;
    fail(ErrorKind::SubadditivityViolated, os.str());
  }
  const std::size_t big_n = seq.length();
  const double nd = static_cast<double>(big_n);
  tail_window = std::clamp<std::size_t>(tail_window, 1, big_n);

  UniformKingmanReport r;
  r.slack = 10.0 / nd;
  r.max_limit = seq.at(big_n).maxCoeff() / nd;
  r.inf_formula = std::numeric_limits<double>::infinity();
  for (std::size_t n = 1; n <= big_n; ++n) {
    const double v = seq.at(n).maxCoeff() / static_cast<double>(n);
    r.inf_formula = std::min(r.inf_formula, v);
    if (seq.at(n).minCoeff() / static_cast<double>(n) < kDivergenceFloor) r.diverging = true;
  }
  r.pointwise_sup = -std::numeric_limits<double>::infinity();
  for (std::size_t n = big_n - tail_window + 1; n <= big_n; ++n)
    r.pointwise_sup = std::max(r.pointwise_sup, seq.at(n).maxCoeff() / static_cast<double>(n));

  const auto measures = ergodic_measures(p);
  r.ergodic_max = -std::numeric_limits<double>::infinity();
  for (const auto& mu : measures) {
    r.lambda_per_measure.push_back(lambda_of_measure(seq, mu));
    r.ergodic_max = std::max(r.ergodic_max, r.lambda_per_measure.back());
  }

  const double values[] = {r.max_limit, r.ergodic_max, r.pointwise_sup, r.inf_formula};
  r.max_disagreement = *std::max_element(std::begin(values), std::end(values)) -
                       *std::min_element(std::begin(values), std::end(values));
  r.agree = r.max_disagreement <= r.slack;

  r.additive = is_additive(p, seq);
  if (r.additive) {
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& mu : measures) best = std::max(best, seq.at(1).dot(mu));
    r.additive_identity = best;
    const double scale = 1.0 + std::abs(best);
    r.additive_identity_holds = std::abs(best - r.ergodic_max) <= 1e-9 * scale;
  }
  return r;
}

PointwiseKingmanReport verify_pointwise_kingman(const FiniteMarkovOperator& p, const SubadditiveSequence& seq,
                                                const Eigen::VectorXd& mu) {
  require(seq.length() >= 1, "sequence is empty");
  require(static_cast<std::size_t>(mu.size()) == p.states(), "mu must have one value per state");
  const double total = mu.sum();
  const double residual = (mu.transpose() * p.matrix() - mu.transpose()).lpNorm<1>();
  if (mu.minCoeff() < 0.0 || std::abs(total - 1.0) > 1e-10 || residual > 1e-10) {
    std::ostringstream os;
    os << "mu is not an invariant probability vector (||mu P - mu||_1 = " << residual << ", mass " << total << ")";
    fail(ErrorKind::NotInvariantMeasure, os.str());
  }
  const std::size_t big_n = seq.length();
  PointwiseKingmanReport r;
  r.slack = 10.0 / static_cast<double>(big_n);
  r.g_hat = seq.at(big_n) / static_cast<double>(big_n);
  r.g_dot_mu = r.g_hat.dot(mu);
  r.lambda_mu = lambda_of_measure(seq, mu);
  r.mean_matches = std::abs(r.g_dot_mu - r.lambda_mu) <= r.slack;

  // mu is ergodic iff it is the invariant vector of the single recurrent
  // class containing its support.
  const SparseMatrix q = to_sparse(p.matrix());
  const ChainStructure st = chain_structure(q);
  int cls = -2;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (Eigen::Index x = 0; x < mu.size(); ++x) {
    if (mu(x) <= kStructuralZero) continue;
    const int c = st.class_of[static_cast<std::size_t>(x)];
    cls = (cls == -2 || cls == c) ? c : -1;
    lo = std::min(lo, r.g_hat(x));
    hi = std::max(hi, r.g_hat(x));
  }
  r.ergodic = cls >= 0;
  r.support_spread = hi - lo;
  r.constant_on_support = !r.ergodic || r.support_spread <= r.slack;
  return r;
}

}  // namespace rmlab
