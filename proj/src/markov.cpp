#include "rmlab/markov.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include "rmlab/errors.hpp"

namespace rmlab {

void check_row_stochastic(const SparseMatrix& q) {
  if (q.rows() != q.cols()) fail(ErrorKind::ShapeMismatch, "transition matrix must be square");
  for (Eigen::Index i = 0; i < q.outerSize(); ++i) {
    double s = 0.0;
    for (SparseMatrix::InnerIterator it(q, i); it; ++it) {
      if (!(it.value() >= 0.0)) fail(ErrorKind::InvalidArgument, "transition matrix has a negative entry");
      s += it.value();
    }
    if (std::abs(s - 1.0) > 1e-12) {
      std::ostringstream os;
      os.precision(17);
      os << "row " << i << " sums to " << s;
      fail(ErrorKind::InvalidArgument, os.str());
    }
  }
}

SparseMatrix to_sparse(const Eigen::MatrixXd& p) {
  SparseMatrix s = p.sparseView(0.0, 0.0);
  s.makeCompressed();
  return s;
}

namespace {

std::vector<std::vector<int>> adjacency(const SparseMatrix& q) {
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(q.rows()));
  for (Eigen::Index i = 0; i < q.outerSize(); ++i)
    for (SparseMatrix::InnerIterator it(q, i); it; ++it)
      if (it.value() >= kStructuralZero) adj[static_cast<std::size_t>(i)].push_back(static_cast<int>(it.col()));
  return adj;
}

// Iterative Tarjan; returns component id per vertex.
std::vector<int> strongly_connected(const std::vector<std::vector<int>>& adj, int& count) {
  const int n = static_cast<int>(adj.size());
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1), stack;
  std::vector<char> on_stack(n, 0);
  std::vector<std::pair<int, std::size_t>> call;
  int next = 0;
  count = 0;
  for (int root = 0; root < n; ++root) {
    if (index[root] >= 0) continue;
    call.push_back({root, 0});
    index[root] = low[root] = next++;
    stack.push_back(root);
    on_stack[root] = 1;
    while (!call.empty()) {
      auto& [v, pos] = call.back();
      if (pos < adj[v].size()) {
        const int w = adj[v][pos++];
        if (index[w] < 0) {
          index[w] = low[w] = next++;
          stack.push_back(w);
          on_stack[w] = 1;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[v] = std::min(low[v], index[w]);
        }
        continue;
      }
      if (low[v] == index[v]) {
        int w;
        do {
          w = stack.back();
          stack.pop_back();
          on_stack[w] = 0;
          comp[w] = count;
        } while (w != v);
        ++count;
      }
      const int done = v;
      call.pop_back();
      if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
    }
  }
  return comp;
}

int class_period(const std::vector<std::vector<int>>& adj, const std::vector<int>& cls, const std::vector<int>& class_of,
                 int id) {
  std::vector<int> level(adj.size(), -1);
  std::vector<int> queue{cls.front()};
  level[static_cast<std::size_t>(cls.front())] = 0;
  int g = 0;
  for (std::size_t h = 0; h < queue.size(); ++h) {
    const int v = queue[h];
    for (int w : adj[static_cast<std::size_t>(v)]) {
      if (class_of[static_cast<std::size_t>(w)] != id) continue;
      if (level[static_cast<std::size_t>(w)] < 0) {
        level[static_cast<std::size_t>(w)] = level[static_cast<std::size_t>(v)] + 1;
        queue.push_back(w);
      } else {
        g = std::gcd(g, std::abs(level[static_cast<std::size_t>(v)] + 1 - level[static_cast<std::size_t>(w)]));
      }
    }
  }
  return g == 0 ? 1 : g;
}

}  // namespace

ChainStructure chain_structure(const SparseMatrix& q) {
  const auto adj = adjacency(q);
  int count = 0;
  const auto comp = strongly_connected(adj, count);
  std::vector<char> closed(static_cast<std::size_t>(count), 1);
  for (std::size_t v = 0; v < adj.size(); ++v)
    for (int w : adj[v])
      if (comp[static_cast<std::size_t>(w)] != comp[v]) closed[static_cast<std::size_t>(comp[v])] = 0;

  ChainStructure s;
  s.class_of.assign(adj.size(), -1);
  std::vector<int> id_of_comp(static_cast<std::size_t>(count), -1);
  // Number classes by their smallest cell so the order is canonical.
  for (std::size_t v = 0; v < adj.size(); ++v) {
    const int c = comp[v];
    if (!closed[static_cast<std::size_t>(c)]) {
      s.transient.push_back(static_cast<int>(v));
      continue;
    }
    if (id_of_comp[static_cast<std::size_t>(c)] < 0) {
      id_of_comp[static_cast<std::size_t>(c)] = static_cast<int>(s.closed_classes.size());
      s.closed_classes.emplace_back();
    }
    const int id = id_of_comp[static_cast<std::size_t>(c)];
    s.closed_classes[static_cast<std::size_t>(id)].push_back(static_cast<int>(v));
    s.class_of[v] = id;
  }
  for (std::size_t c = 0; c < s.closed_classes.size(); ++c)
    s.periods.push_back(class_period(adj, s.closed_classes[c], s.class_of, static_cast<int>(c)));
  return s;
}

double left_residual(const SparseMatrix& q, const Eigen::VectorXd& mu) {
  const Eigen::VectorXd next = q.transpose() * mu;
  return (next - mu).lpNorm<1>();
}

Eigen::VectorXd class_stationary(const SparseMatrix& q, const std::vector<int>& cls, double tol) {
  const auto k = static_cast<Eigen::Index>(cls.size());
  std::vector<int> local(static_cast<std::size_t>(q.rows()), -1);
  for (Eigen::Index i = 0; i < k; ++i) local[static_cast<std::size_t>(cls[static_cast<std::size_t>(i)])] = static_cast<int>(i);
  // Restricted transition block (rows of a closed class stay inside it up to
  // structural zeros, which are dropped).
  std::vector<Eigen::Triplet<double>> trips;
  for (Eigen::Index i = 0; i < k; ++i) {
    for (SparseMatrix::InnerIterator it(q, cls[static_cast<std::size_t>(i)]); it; ++it) {
      const int j = local[static_cast<std::size_t>(it.col())];
      if (j >= 0 && it.value() >= kStructuralZero) trips.emplace_back(i, j, it.value());
    }
  }
  SparseMatrix block(k, k);
  block.setFromTriplets(trips.begin(), trips.end());
  Eigen::VectorXd pi;
  if (k == 1) {
    pi = Eigen::VectorXd::Ones(1);
  } else if (k <= 2048) {
    // Direct solve of pi (B - I) = 0 with one equation replaced by sum(pi) = 1.
    Eigen::MatrixXd a = Eigen::MatrixXd(block.transpose()) - Eigen::MatrixXd::Identity(k, k);
    a.row(k - 1).setOnes();
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(k);
    rhs(k - 1) = 1.0;
    pi = a.partialPivLu().solve(rhs);
  } else {
    pi = Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
  }
  // Lazy fixed-point polishing; (B + I)/2 shares the fixed vector and is aperiodic.
  for (int it = 0; it < 200000; ++it) {
    pi = pi.cwiseMax(0.0);
    pi /= pi.sum();
    const Eigen::VectorXd next = block.transpose() * pi;
    const double res = (next - pi).lpNorm<1>();
    if (res <= tol) break;
    pi = 0.5 * (pi + next);
  }
  Eigen::VectorXd full = Eigen::VectorXd::Zero(q.rows());
  for (Eigen::Index i = 0; i < k; ++i) full(cls[static_cast<std::size_t>(i)]) = pi(i);
  const double res = left_residual(q, full);
  if (!(res <= tol)) {
    std::ostringstream os;
    os << "stationary vector residual " << res << " above tolerance " << tol;
    fail(ErrorKind::NoConvergence, os.str());
  }
  return full;
}

Eigen::MatrixXd absorption_probabilities(const SparseMatrix& q, const ChainStructure& s) {
  const auto n = q.rows();
  const auto r = static_cast<Eigen::Index>(s.closed_classes.size());
  Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, r);
  for (Eigen::Index i = 0; i < n; ++i)
    if (s.class_of[static_cast<std::size_t>(i)] >= 0) h(i, s.class_of[static_cast<std::size_t>(i)]) = 1.0;
  const auto t = static_cast<Eigen::Index>(s.transient.size());
  if (t == 0) return h;
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (Eigen::Index i = 0; i < t; ++i) local[static_cast<std::size_t>(s.transient[static_cast<std::size_t>(i)])] = static_cast<int>(i);
  // (I - Q_TT) H_T = Q_TC 1_C
  std::vector<Eigen::Triplet<double>> trips;
  Eigen::MatrixXd rhs = Eigen::MatrixXd::Zero(t, r);
  for (Eigen::Index i = 0; i < t; ++i) {
    trips.emplace_back(i, i, 1.0);
    for (SparseMatrix::InnerIterator it(q, s.transient[static_cast<std::size_t>(i)]); it; ++it) {
      if (it.value() < kStructuralZero) continue;
      const int j = local[static_cast<std::size_t>(it.col())];
      if (j >= 0) {
        trips.emplace_back(i, j, -it.value());
      } else {
        const int c = s.class_of[static_cast<std::size_t>(it.col())];
        if (c >= 0) rhs(i, c) += it.value();
      }
    }
  }
  Eigen::SparseMatrix<double> a(t, t);
  a.setFromTriplets(trips.begin(), trips.end());
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.compute(a);
  if (lu.info() != Eigen::Success) fail(ErrorKind::NoConvergence, "absorption system is singular");
  const Eigen::MatrixXd ht = lu.solve(rhs);
  for (Eigen::Index i = 0; i < t; ++i) h.row(s.transient[static_cast<std::size_t>(i)]) = ht.row(i);
  return h;
}

}  // namespace rmlab
