#include "rmlab/config.hpp"

#include <cmath>
#include <sstream>

#include "rmlab/catalog.hpp"
#include "rmlab/errors.hpp"

namespace rmlab {

void config_fail(const std::string& path, const std::string& message) {
  fail(ErrorKind::ConfigInvalid, "at " + (path.empty() ? std::string("<root>") : path) + ": " + message);
}

Fields::Fields(const Json& j, std::string path) : j_(&j), path_(std::move(path)) {
  if (!j.is_object()) config_fail(path_, "expected an object");
}

const Json& Fields::raw(const std::string& key) {
  if (!j_->contains(key)) config_fail(at(key), "required field is missing");
  used_.insert(key);
  return (*j_)[key];
}

double Fields::number(const std::string& key) {
  const Json& v = raw(key);
  if (!v.is_number()) config_fail(at(key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) config_fail(at(key), "expected a finite number");
  return d;
}

double Fields::positive(const std::string& key) {
  const double d = number(key);
  if (!(d > 0.0)) config_fail(at(key), "expected a positive number");
  return d;
}

std::int64_t Fields::integer(const std::string& key, std::int64_t lo, std::int64_t hi) {
  const Json& v = raw(key);
  if (!v.is_number_integer()) config_fail(at(key), "expected an integer");
  const auto i = v.get<std::int64_t>();
  if (i < lo || i > hi) {
    std::ostringstream os;
    os << "value " << i << " outside [" << lo << ", " << hi << "]";
    config_fail(at(key), os.str());
  }
  return i;
}

std::uint64_t Fields::seed(const std::string& key) {
  const Json& v = raw(key);
  if (!v.is_number_unsigned()) config_fail(at(key), "expected a nonnegative integer");
  return v.get<std::uint64_t>();
}

std::string Fields::string(const std::string& key) {
  const Json& v = raw(key);
  if (!v.is_string()) config_fail(at(key), "expected a string");
  return v.get<std::string>();
}

std::vector<double> Fields::numbers(const std::string& key) {
  const Json& v = raw(key);
  if (!v.is_array() || v.empty()) config_fail(at(key), "expected a nonempty array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) config_fail(at(key) + "[" + std::to_string(i) + "]", "expected a number");
    out.push_back(v[i].get<double>());
  }
  return out;
}

std::vector<int> Fields::integers(const std::string& key, int lo, int hi) {
  const Json& v = raw(key);
  if (!v.is_array() || v.empty()) config_fail(at(key), "expected a nonempty array of integers");
  std::vector<int> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string p = at(key) + "[" + std::to_string(i) + "]";
    if (!v[i].is_number_integer()) config_fail(p, "expected an integer");
    const auto x = v[i].get<std::int64_t>();
    if (x < lo || x > hi) config_fail(p, "value " + std::to_string(x) + " out of range");
    out.push_back(static_cast<int>(x));
  }
  return out;
}

Matrix Fields::matrix(const std::string& key) { return parse_matrix(raw(key), at(key)); }

Fields Fields::object(const std::string& key) { return Fields(raw(key), at(key)); }

void Fields::finish() const {
  for (const auto& item : j_->items())
    if (!used_.contains(item.key())) config_fail(at(item.key()), "unknown field");
}

Matrix parse_matrix(const Json& j, const std::string& path) {
  if (!j.is_array() || j.empty()) config_fail(path, "expected a nonempty array of rows");
  const std::size_t rows = j.size();
  if (!j[0].is_array() || j[0].empty()) config_fail(path + "[0]", "expected a nonempty row");
  const std::size_t cols = j[0].size();
  Matrix m(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
  for (std::size_t r = 0; r < rows; ++r) {
    const std::string rp = path + "[" + std::to_string(r) + "]";
    if (!j[r].is_array() || j[r].size() != cols) config_fail(rp, "rows must have equal length");
    for (std::size_t c = 0; c < cols; ++c) {
      if (!j[r][c].is_number()) config_fail(rp + "[" + std::to_string(c) + "]", "expected a number");
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = j[r][c].get<double>();
    }
  }
  return m;
}

Space parse_space(const Json& j, const std::string& path) {
  Fields f(j, path);
  const std::string kind = f.string("kind");
  Space s = Space::circle();
  if (kind == "circle") {
  } else if (kind == "interval") {
    const double lo = f.number("lower");
    const double hi = f.number("upper");
    if (!(hi > lo)) config_fail(f.at("upper"), "upper must exceed lower");
    s = Space::interval(lo, hi);
  } else if (kind == "projective") {
    s = Space::projective(static_cast<int>(f.integer("dim", 2, kMaxDim)));
  } else {
    config_fail(f.at("kind"), "unknown space kind '" + kind + "' (circle, interval, projective)");
  }
  f.finish();
  return s;
}

namespace {

void check_weights(const std::vector<double>& w, std::size_t atoms, const std::string& path) {
  if (w.size() != atoms) {
    config_fail(path, "expected " + std::to_string(atoms) + " weights, got " + std::to_string(w.size()));
  }
  try {
    validate_weights(w);
  } catch (const Error& e) {
    std::string msg = e.what();
    const auto colon = msg.find(": ");
    config_fail(path, colon == std::string::npos ? msg : msg.substr(colon + 2));
  }
}

FiberFamily parse_family(const Json& j, const std::string& path) {
  Fields f(j, path);
  const std::string family = f.string("family");
  FiberFamily out;
  if (family == "affine") {
    out = AffineInterval{f.number("a"), f.number("b")};
  } else if (family == "circle-wave") {
    out = CircleWave{f.number("rho"), f.number("c"), static_cast<int>(f.integer("k", 1, 1000))};
  } else if (family == "matrix") {
    out = ProjectiveOfMatrix{f.matrix("matrix")};
  } else if (family == "tabulated") {
    out = UserTabulated{f.numbers("xs"), f.numbers("ys")};
  } else {
    config_fail(f.at("family"), "unknown family '" + family + "' (affine, circle-wave, matrix, tabulated)");
  }
  f.finish();
  return out;
}

template <class Fn>
auto rethrow_at(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::ConfigInvalid) throw;
    config_fail(path, e.what());
  }
}

}  // namespace

RandomMapSystem parse_system(const Json& j, const std::string& path) {
  Fields f(j, path);
  if (f.has("builtin")) {
    const std::string name = f.string("builtin");
    f.finish();
    return rethrow_at(f.at("builtin"), [&] { return catalog::system_by_name(name); });
  }
  const Space space = parse_space(f.raw("space"), f.at("space"));
  const Json& atoms = f.raw("atoms");
  if (!atoms.is_array() || atoms.empty()) config_fail(f.at("atoms"), "expected a nonempty array of atoms");
  if (atoms.size() > kMaxAtoms) config_fail(f.at("atoms"), "at most 64 atoms are supported");
  const std::vector<double> weights = f.numbers("weights");
  check_weights(weights, atoms.size(), f.at("weights"));
  f.finish();
  std::vector<Atom> out;
  for (std::size_t i = 0; i < atoms.size(); ++i) {
    const std::string p = f.at("atoms") + "[" + std::to_string(i) + "]";
    const FiberFamily fam = parse_family(atoms[i], p);
    out.push_back(rethrow_at(p, [&] { return Atom{FiberMap(space, fam), weights[i]}; }));
  }
  return rethrow_at(path, [&] { return RandomMapSystem(space, std::move(out)); });
}

namespace {

Json shift_value(const Json& base, const Json& delta, double t, const std::string& path) {
  if (delta.is_number()) {
    if (!base.is_number()) config_fail(path, "direction is numeric but the system field is not");
    return base.get<double>() + t * delta.get<double>();
  }
  if (delta.is_array()) {
    if (!base.is_array() || base.size() != delta.size()) config_fail(path, "direction shape does not match");
    Json out = Json::array();
    for (std::size_t i = 0; i < delta.size(); ++i)
      out.push_back(shift_value(base[i], delta[i], t, path + "[" + std::to_string(i) + "]"));
    return out;
  }
  config_fail(path, "direction entries must be numbers or arrays of numbers");
}

}  // namespace

Json shift_system(const Json& system, const Json& direction, double t, const std::string& path) {
  if (!direction.is_array() || !system.contains("atoms") || direction.size() != system["atoms"].size())
    config_fail(path, "direction needs one object per atom of an explicit system");
  Json out = system;
  for (std::size_t i = 0; i < direction.size(); ++i) {
    const std::string p = path + "[" + std::to_string(i) + "]";
    if (!direction[i].is_object()) config_fail(p, "expected an object of parameter deltas");
    for (const auto& item : direction[i].items()) {
      if (item.key() == "family" || !out["atoms"][i].contains(item.key()))
        config_fail(p + "." + item.key(), "not a numeric parameter of this atom");
      out["atoms"][i][item.key()] = shift_value(out["atoms"][i][item.key()], item.value(), t, p + "." + item.key());
    }
  }
  return out;
}

Cocycle parse_cocycle(const Json& j, const std::string& path) {
  Fields f(j, path);
  if (f.has("builtin")) {
    const std::string name = f.string("builtin");
    f.finish();
    return rethrow_at(f.at("builtin"), [&] { return catalog::cocycle_by_name(name); });
  }
  const Json& ms = f.raw("matrices");
  if (!ms.is_array() || ms.empty()) config_fail(f.at("matrices"), "expected a nonempty array of matrices");
  std::vector<Matrix> matrices;
  for (std::size_t i = 0; i < ms.size(); ++i)
    matrices.push_back(parse_matrix(ms[i], f.at("matrices") + "[" + std::to_string(i) + "]"));
  const std::vector<double> weights = f.numbers("weights");
  check_weights(weights, matrices.size(), f.at("weights"));
  f.finish();
  return rethrow_at(path, [&] { return Cocycle(std::move(matrices), weights); });
}

SpacePoint parse_point(const Space& space, const Json& j, const std::string& path) {
  std::vector<double> xs;
  if (j.is_number()) {
    xs.push_back(j.get<double>());
  } else if (j.is_array()) {
    for (std::size_t i = 0; i < j.size(); ++i) {
      if (!j[i].is_number()) config_fail(path + "[" + std::to_string(i) + "]", "expected a number");
      xs.push_back(j[i].get<double>());
    }
  } else {
    config_fail(path, "expected a number or an array of coordinates");
  }
  return rethrow_at(path, [&] {
    const SpacePoint p = space.point(xs);
    if (!space.contains(p)) config_fail(path, "point lies outside " + space.describe());
    return p;
  });
}

ChainConfig parse_chain(const Json& j, const std::string& path) {
  Fields f(j, path);
  if (f.has("builtin")) {
    const std::string name = f.string("builtin");
    f.finish();
    for (auto& c : catalog::builtin_chains())
      if (c.name == name) return {c.p, c.phi1};
    config_fail(f.at("builtin"), "unknown builtin chain '" + name + "' (identity, uniform, absorbing)");
  }
  const Matrix p = f.matrix("matrix");
  const std::vector<double> phi = f.numbers("phi1");
  f.finish();
  FiniteMarkovOperator op = rethrow_at(f.at("matrix"), [&] { return FiniteMarkovOperator(p); });
  if (phi.size() != op.states()) config_fail(f.at("phi1"), "phi1 needs one value per state");
  return {op, Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size()))};
}

}  // namespace rmlab
