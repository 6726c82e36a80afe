#pragma once

// Built-in systems, cocycles and chains used by the examples, the runner's
// "builtin" shorthand and the test suites.

#include <string>
#include <vector>

#include "rmlab/kingman.hpp"
#include "rmlab/linear_cocycles.hpp"
#include "rmlab/random_systems.hpp"

namespace rmlab::catalog {

/// {x/2, x/2 + 1/2} on [0, 1] with equal weights; slopes shifted by t, the
/// second map keeps 1 fixed.
RandomMapSystem ifs_halves(double t = 0.0);

/// Rotations by (sqrt 5 - 1)/2 and sqrt 2 - 1 with equal weights.
RandomMapSystem random_rotations();

/// x + c/(4 pi) sin(4 pi x) with c = -(0.5 + t) and c = -0.8, equal weights.
/// Both maps fix 0, 1/4, 1/2, 3/4; 0 and 1/2 attract, 1/4 and 3/4 repel.
RandomMapSystem two_attractor(double t = 0.0);

/// Rotation by 1/3 (deterministic).
RandomMapSystem rotation_by_third();

/// Two-attractor map with c = -0.5 mixed with the golden rotation. No common
/// invariant measure; uniquely ergodic and mostly contracting. Parameter t
/// shifts the wave amplitude.
RandomMapSystem minimal_circle_family(double t = 0.0);

Cocycle diagonal_hyperbolic();  // diag(2, 1/2)
Cocycle rotation_cocycle();     // rotation by 1 radian
Cocycle cat_map();              // [[2, 1], [1, 1]]
/// {diag(2, 1/2), rotation by 1 radian}, equal weights.
Cocycle hyperbolic_rotation_pair();

FiniteMarkovOperator identity_chain();   // I_2
FiniteMarkovOperator uniform_chain();    // all entries 1/2
FiniteMarkovOperator absorbing_chain();  // transient state 0 feeding absorbing 1 and 2

struct BuiltinChain {
  std::string name;
  FiniteMarkovOperator p;
  Eigen::VectorXd phi1;
  double lambda;  // exact growth constant of the additive sequence
};

std::vector<BuiltinChain> builtin_chains();

std::vector<std::string> system_names();
std::vector<std::string> cocycle_names();
RandomMapSystem system_by_name(const std::string& name, double t = 0.0);
Cocycle cocycle_by_name(const std::string& name);
FiniteMarkovOperator chain_by_name(const std::string& name);

}  // namespace rmlab::catalog
