#include "rmlab/catalog.hpp"

#include <cmath>
#include <numbers>

#include "rmlab/errors.hpp"

namespace rmlab::catalog {

namespace {

Matrix mat2(double a, double b, double c, double d) {
  Matrix m(2, 2);
  m << a, b, c, d;
  return m;
}

Eigen::VectorXd vec(std::initializer_list<double> xs) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

Matrix rotation(double theta) { return mat2(std::cos(theta), -std::sin(theta), std::sin(theta), std::cos(theta)); }

RandomMapSystem circle_pair(CircleWave a, CircleWave b) {
  const Space s = Space::circle();
  return RandomMapSystem(s, {{FiberMap(s, a), 0.5}, {FiberMap(s, b), 0.5}});
}

}  // namespace

RandomMapSystem ifs_halves(double t) {
  const Space s = Space::interval(0.0, 1.0);
  return RandomMapSystem(s, {{FiberMap(s, AffineInterval{0.5 + t, 0.0}), 0.5},
                             {FiberMap(s, AffineInterval{0.5 + t, 0.5 - t}), 0.5}});
}

RandomMapSystem random_rotations() {
  return circle_pair(CircleWave{(std::sqrt(5.0) - 1.0) / 2.0, 0.0, 1}, CircleWave{std::sqrt(2.0) - 1.0, 0.0, 1});
}

RandomMapSystem two_attractor(double t) {
  return circle_pair(CircleWave{0.0, -(0.5 + t), 2}, CircleWave{0.0, -0.8, 2});
}

RandomMapSystem rotation_by_third() {
  const Space s = Space::circle();
  return RandomMapSystem(s, {{FiberMap(s, CircleWave{1.0 / 3.0, 0.0, 1}), 1.0}});
}

RandomMapSystem minimal_circle_family(double t) {
  return circle_pair(CircleWave{0.0, -(0.5 + t), 2}, CircleWave{(std::sqrt(5.0) - 1.0) / 2.0, 0.0, 1});
}

Cocycle diagonal_hyperbolic() { return Cocycle({mat2(2.0, 0.0, 0.0, 0.5)}, {1.0}); }

Cocycle rotation_cocycle() { return Cocycle({rotation(1.0)}, {1.0}); }

Cocycle cat_map() { return Cocycle({mat2(2.0, 1.0, 1.0, 1.0)}, {1.0}); }

Cocycle hyperbolic_rotation_pair() { return Cocycle({mat2(2.0, 0.0, 0.0, 0.5), rotation(1.0)}, {0.5, 0.5}); }

FiniteMarkovOperator identity_chain() { return FiniteMarkovOperator(Eigen::MatrixXd::Identity(2, 2)); }

FiniteMarkovOperator uniform_chain() { return FiniteMarkovOperator(Eigen::MatrixXd::Constant(2, 2, 0.5)); }

FiniteMarkovOperator absorbing_chain() {
  Eigen::MatrixXd p(3, 3);
  p << 0.0, 0.5, 0.5, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0;
  return FiniteMarkovOperator(p);
}

std::vector<BuiltinChain> builtin_chains() {
  return {
      {"identity", identity_chain(), vec({1.0, -1.0}), 1.0},
      {"uniform", uniform_chain(), vec({1.0, -1.0}), 0.0},
      {"absorbing", absorbing_chain(), vec({0.0, 2.0, -1.0}), 2.0},
  };
}

std::vector<std::string> system_names() {
  return {"ifs-halves", "random-rotations", "two-attractor", "rotation-by-third", "minimal-circle"};
}

std::vector<std::string> cocycle_names() { return {"diagonal", "rotation", "cat", "hyperbolic-rotation"}; }

RandomMapSystem system_by_name(const std::string& name, double t) {
  if (name == "ifs-halves") return ifs_halves(t);
  if (name == "random-rotations") return random_rotations();
  if (name == "two-attractor") return two_attractor(t);
  if (name == "rotation-by-third") return rotation_by_third();
  if (name == "minimal-circle") return minimal_circle_family(t);
  fail(ErrorKind::InvalidArgument, "unknown builtin system '" + name + "'");
}

Cocycle cocycle_by_name(const std::string& name) {
  if (name == "diagonal") return diagonal_hyperbolic();
  if (name == "rotation") return rotation_cocycle();
  if (name == "cat") return cat_map();
  if (name == "hyperbolic-rotation") return hyperbolic_rotation_pair();
  fail(ErrorKind::InvalidArgument, "unknown builtin cocycle '" + name + "'");
}

FiniteMarkovOperator chain_by_name(const std::string& name) {
  for (auto& c : builtin_chains())
    if (c.name == name) return c.p;
  fail(ErrorKind::InvalidArgument, "unknown builtin chain '" + name + "'");
}

}  // namespace rmlab::catalog
