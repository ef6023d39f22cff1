#pragma once

// Weighted small-step models in the d-dimensional orthant.

#include <algorithm>
#include <compare>
#include <map>
#include <numeric>
#include <set>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"
#include "walkgroups/rational.hpp"

namespace walkgroups {

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A step in {-1,0,1}^d \ {0}.
class Step {
 public:
  Step() = default;
  explicit Step(std::vector<int> coords) : coords_(std::move(coords)) {
    if (coords_.empty()) throw ModelError("step has no coordinates");
    bool nonzero = false;
    for (int c : coords_) {
      if (c < -1 || c > 1) throw ModelError("step " + str() + " outside {-1,0,1}^d");
      nonzero |= c != 0;
    }
    if (!nonzero) throw ModelError("zero step is not allowed");
  }
  Step(std::initializer_list<int> coords) : Step(std::vector<int>(coords)) {}

  /// "1,0,-1"
  static Step parse(std::string_view text) {
    std::vector<int> coords;
    std::string item;
    std::stringstream ss{std::string(text)};
    while (std::getline(ss, item, ',')) {
      try {
        size_t used = 0;
        int v = std::stoi(item, &used);
        while (used < item.size() && std::isspace(static_cast<unsigned char>(item[used]))) ++used;
        if (used != item.size()) throw ModelError("bad step coordinate '" + item + "'");
        coords.push_back(v);
      } catch (const std::logic_error&) {
        throw ModelError("bad step coordinate '" + item + "'");
      }
    }
    return Step(std::move(coords));
  }

  [[nodiscard]] int dim() const { return static_cast<int>(coords_.size()); }
  [[nodiscard]] int operator[](int i) const { return coords_[static_cast<size_t>(i)]; }
  [[nodiscard]] const std::vector<int>& coords() const { return coords_; }

  [[nodiscard]] std::string str() const {
    std::string s;
    for (size_t i = 0; i < coords_.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(coords_[i]);
    }
    return s;
  }

  friend auto operator<=>(const Step&, const Step&) = default;

 private:
  std::vector<int> coords_;
};

using WeightMap = std::map<Step, Rational>;

/// Model: dimension plus strictly positive exact weights. Zero weights are
/// dropped on construction; "step in S" means weight > 0.
class WeightedModel {
 public:
  WeightedModel() = default;
  WeightedModel(int dim, const WeightMap& weights) : dim_(dim) {
    if (dim < 1) throw ModelError("dimension must be >= 1");
    for (const auto& [step, w] : weights) {
      if (step.dim() != dim)
        throw ModelError("step " + step.str() + " has dimension " + std::to_string(step.dim()) +
                         ", model has " + std::to_string(dim));
      if (w < 0) throw ModelError("negative weight on step " + step.str());
      if (w == 0) continue;
      weights_.emplace(step, w);
    }
    if (weights_.empty()) throw ModelError("model has no step with positive weight");
  }

  [[nodiscard]] int dim() const { return dim_; }
  [[nodiscard]] const WeightMap& weights() const { return weights_; }
  [[nodiscard]] size_t size() const { return weights_.size(); }

  [[nodiscard]] Rational weight(const Step& s) const {
    auto it = weights_.find(s);
    return it == weights_.end() ? Rational(0) : it->second;
  }
  [[nodiscard]] bool contains(const Step& s) const { return weights_.count(s) != 0; }

  [[nodiscard]] Rational total_weight() const {
    Rational sum = 0;
    for (const auto& kv : weights_) sum += kv.second;
    return sum;
  }
  [[nodiscard]] bool normalized() const { return total_weight() == 1; }

  /// Canonical single-line description, e.g. "{1,0:1, 0,1:1}".
  [[nodiscard]] std::string str() const {
    std::string s = "{";
    bool first = true;
    for (const auto& [step, w] : weights_) {
      if (!first) s += ", ";
      first = false;
      s += step.str() + ":" + to_string(w);
    }
    return s + "}";
  }

  friend bool operator==(const WeightedModel&, const WeightedModel&) = default;

 private:
  int dim_ = 0;
  WeightMap weights_;
};

inline WeightedModel unweighted(int dim, const std::vector<Step>& steps) {
  WeightMap m;
  for (const auto& s : steps) {
    if (!m.emplace(s, Rational(1)).second) throw ModelError("duplicate step " + s.str());
  }
  return WeightedModel(dim, m);
}

// ---------------------------------------------------------------------------
// JSON model documents: {"d":2,"steps":[["1,0","1"],...],"normalized":false}

inline WeightedModel parse_model_json(const nlohmann::json& doc) {
  if (!doc.is_object()) throw ModelError("model document must be a JSON object");
  if (!doc.contains("d") || !doc["d"].is_number_integer()) throw ModelError("missing integer field 'd'");
  if (!doc.contains("steps") || !doc["steps"].is_array()) throw ModelError("missing array field 'steps'");
  const int d = doc["d"].get<int>();
  if (d < 1) throw ModelError("'d' must be positive");
  WeightMap weights;
  for (const auto& entry : doc["steps"]) {
    if (!entry.is_array() || entry.size() != 2 || !entry[0].is_string() || !entry[1].is_string())
      throw ModelError("each step entry must be [\"<coords>\", \"<p/q>\"]");
    Step s = Step::parse(entry[0].get<std::string>());
    if (s.dim() != d) throw ModelError("step " + s.str() + " does not have dimension " + std::to_string(d));
    Rational w;
    try {
      w = parse_rational(entry[1].get<std::string>());
    } catch (const ParseError& e) {
      throw ModelError(e.what());
    }
    if (w < 0) throw ModelError("non-positive weight on step " + s.str());
    if (weights.count(s)) throw ModelError("duplicate step " + s.str());
    weights.emplace(s, w);
  }
  WeightedModel m(d, weights);
  if (doc.contains("normalized")) {
    if (!doc["normalized"].is_boolean()) throw ModelError("'normalized' must be a boolean");
    if (doc["normalized"].get<bool>() && !m.normalized())
      throw ModelError("document claims normalized but weights sum to " + to_string(m.total_weight()));
  }
  return m;
}

inline WeightedModel parse_model(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ModelError(std::string("malformed model document: ") + e.what());
  }
  return parse_model_json(doc);
}

inline nlohmann::json model_to_json(const WeightedModel& m) {
  nlohmann::json steps = nlohmann::json::array();
  for (const auto& [s, w] : m.weights()) steps.push_back({s.str(), to_string(w)});
  return {{"d", m.dim()}, {"steps", steps}, {"normalized", m.normalized()}};
}

// ---------------------------------------------------------------------------

inline WeightedModel normalize(const WeightedModel& m) {
  const Rational total = m.total_weight();
  if (total == 1) return m;
  WeightMap w;
  for (const auto& [s, v] : m.weights()) w.emplace(s, Rational(v / total));
  return WeightedModel(m.dim(), w);
}

/// Sum of w(s) x^s. T is Rational or a floating type.
template <class T>
T inventory_eval(const WeightedModel& m, std::span<const T> point) {
  if (static_cast<int>(point.size()) != m.dim()) throw ModelError("point dimension mismatch");
  std::vector<T> inv(point.size());
  for (size_t i = 0; i < point.size(); ++i) {
    if (point[i] == 0) throw ModelError("inventory evaluated at a zero coordinate");
    inv[i] = T(1) / point[i];
  }
  T sum = 0;
  for (const auto& [s, w] : m.weights()) {
    T mon;
    if constexpr (std::is_same_v<T, Rational>) {
      mon = w;
    } else {
      mon = static_cast<T>(w.get_d());
    }
    for (int i = 0; i < m.dim(); ++i) {
      if (s[i] == 1) mon *= point[static_cast<size_t>(i)];
      else if (s[i] == -1) mon *= inv[static_cast<size_t>(i)];
    }
    sum += mon;
  }
  return sum;
}

template <class T>
T inventory_eval(const WeightedModel& m, const std::vector<T>& point) {
  return inventory_eval<T>(m, std::span<const T>(point));
}

inline std::vector<Rational> drift(const WeightedModel& m) {
  std::vector<Rational> v(static_cast<size_t>(m.dim()), Rational(0));
  for (const auto& [s, w] : m.weights())
    for (int i = 0; i < m.dim(); ++i) v[static_cast<size_t>(i)] += w * s[i];
  return v;
}

/// w(s) -> mu * w(s) * alpha^s.
inline WeightedModel central_weighting(const WeightedModel& m, const Rational& mu,
                                       const std::vector<Rational>& alpha) {
  if (mu <= 0) throw ModelError("central weighting requires mu > 0");
  if (static_cast<int>(alpha.size()) != m.dim()) throw ModelError("alpha dimension mismatch");
  for (const auto& a : alpha)
    if (a <= 0) throw ModelError("central weighting requires alpha_i > 0");
  WeightMap w;
  for (const auto& [s, v] : m.weights()) {
    Rational x = mu * v;
    for (int i = 0; i < m.dim(); ++i) x *= pow_int(alpha[static_cast<size_t>(i)], s[i]);
    w.emplace(s, x);
  }
  return WeightedModel(m.dim(), w);
}

/// New model whose coordinate k is the old coordinate perm[k].
inline WeightedModel permute_coordinates(const WeightedModel& m, const std::vector<int>& perm) {
  if (static_cast<int>(perm.size()) != m.dim()) throw ModelError("permutation size mismatch");
  WeightMap w;
  for (const auto& [s, v] : m.weights()) {
    std::vector<int> c(perm.size());
    for (size_t k = 0; k < perm.size(); ++k) c[k] = s[perm[k]];
    w.emplace(Step(c), v);
  }
  return WeightedModel(m.dim(), w);
}

/// Negates the given coordinate of every step (x_axis -> 1/x_axis).
inline WeightedModel reflect_axis(const WeightedModel& m, int axis) {
  WeightMap w;
  for (const auto& [s, v] : m.weights()) {
    std::vector<int> c = s.coords();
    c[static_cast<size_t>(axis)] = -c[static_cast<size_t>(axis)];
    w.emplace(Step(c), v);
  }
  return WeightedModel(m.dim(), w);
}

/// s -> -s for every step.
inline WeightedModel reflect_origin(const WeightedModel& m) {
  WeightedModel r = m;
  for (int i = 0; i < m.dim(); ++i) r = reflect_axis(r, i);
  return r;
}

// ---------------------------------------------------------------------------
// H1: not contained in any closed half-space through the origin.

struct H1Result {
  bool satisfied = false;
  std::vector<Rational> witness;  // nonzero x with <x,s> >= 0 for all steps, when violated
};

namespace detail {

/// Basis of the nullspace of the given rows (each of length n), exact.
inline std::vector<std::vector<Rational>> nullspace(std::vector<std::vector<Rational>> rows, size_t n) {
  std::vector<int> pivot_col;
  size_t r = 0;
  for (size_t c = 0; c < n && r < rows.size(); ++c) {
    size_t p = r;
    while (p < rows.size() && rows[p][c] == 0) ++p;
    if (p == rows.size()) continue;
    std::swap(rows[p], rows[r]);
    Rational inv = 1 / rows[r][c];
    for (auto& x : rows[r]) x *= inv;
    for (size_t i = 0; i < rows.size(); ++i) {
      if (i == r || rows[i][c] == 0) continue;
      Rational f = rows[i][c];
      for (size_t k = 0; k < n; ++k) rows[i][k] -= f * rows[r][k];
    }
    pivot_col.push_back(static_cast<int>(c));
    ++r;
  }
  std::vector<std::vector<Rational>> basis;
  for (size_t free = 0; free < n; ++free) {
    if (std::find(pivot_col.begin(), pivot_col.end(), static_cast<int>(free)) != pivot_col.end()) continue;
    std::vector<Rational> v(n, Rational(0));
    v[free] = 1;
    for (size_t i = 0; i < pivot_col.size(); ++i) v[static_cast<size_t>(pivot_col[i])] = -rows[i][free];
    basis.push_back(std::move(v));
  }
  return basis;
}

inline bool supports_all(const WeightedModel& m, const std::vector<Rational>& x) {
  for (const auto& kv : m.weights()) {
    Rational dot = 0;
    for (int i = 0; i < m.dim(); ++i) dot += x[static_cast<size_t>(i)] * kv.first[i];
    if (dot < 0) return false;
  }
  return true;
}

}  // namespace detail

namespace detail {

/// Integer vector with coprime entries on the same ray.
inline std::vector<Rational> primitive(std::vector<Rational> x) {
  Integer l = 1, g = 0;
  for (const auto& c : x) l = lcm(l, Integer(c.get_den()));
  for (auto& c : x) {
    c *= l;
    g = gcd(g, Integer(c.get_num()));
  }
  if (g != 0)
    for (auto& c : x) c /= g;
  return x;
}

}  // namespace detail

/// Decided exactly: candidate directions are normals of (d-1)-subsets of
/// steps (both signs) plus +-e_i; if the steps do not span R^d the
/// orthogonal complement of their span is a witness. The reported witness
/// is the sum of all supporting candidates, which lies inside the cone of
/// supporting directions.
inline H1Result check_h1(const WeightedModel& m) {
  const auto n = static_cast<size_t>(m.dim());
  std::vector<std::vector<Rational>> steps;
  for (const auto& kv : m.weights()) {
    std::vector<Rational> v;
    for (int c : kv.first.coords()) v.emplace_back(c);
    steps.push_back(std::move(v));
  }
  auto complement = detail::nullspace(steps, n);
  if (!complement.empty()) return {false, detail::primitive(complement.front())};

  std::set<std::vector<Rational>> found;
  auto try_dir = [&](std::vector<Rational> x) {
    if (detail::supports_all(m, x)) found.insert(detail::primitive(x));
    for (auto& c : x) c = -c;
    if (detail::supports_all(m, x)) found.insert(detail::primitive(x));
  };
  for (size_t i = 0; i < n; ++i) {
    std::vector<Rational> e(n, Rational(0));
    e[i] = 1;
    try_dir(e);
  }
  if (n >= 2) {
    const size_t k = n - 1;
    std::vector<size_t> idx(k);
    std::iota(idx.begin(), idx.end(), 0);
    while (k <= steps.size()) {
      std::vector<std::vector<Rational>> rows;
      for (size_t j : idx) rows.push_back(steps[j]);
      auto ns = detail::nullspace(rows, n);
      if (ns.size() == 1) try_dir(ns.front());
      // next combination
      size_t pos = k;
      while (pos > 0 && idx[pos - 1] == steps.size() - k + pos - 1) --pos;
      if (pos == 0) break;
      ++idx[pos - 1];
      for (size_t j = pos; j < k; ++j) idx[j] = idx[j - 1] + 1;
    }
  }
  if (found.empty()) return {true, {}};
  std::vector<Rational> sum(n, Rational(0));
  for (const auto& x : found)
    for (size_t i = 0; i < n; ++i) sum[i] += x[i];
  if (std::all_of(sum.begin(), sum.end(), [](const Rational& c) { return c == 0; })) return {false, *found.begin()};
  return {false, detail::primitive(sum)};
}

// ---------------------------------------------------------------------------
// Slices of 3D models: fix one coordinate at a positive rational value.

struct SliceModel {
  WeightedModel parent;
  int axis = 2;
  Rational value;
  WeightedModel model;  // 2D, remaining coordinates in increasing order
};

/// w'(i,j) = w(i,j,1) z + w(i,j,0) + w(i,j,-1)/z, with the axis-only steps dropped.
inline SliceModel slice_model(const WeightedModel& m, int axis, const Rational& z) {
  if (m.dim() != 3) throw ModelError("slice_model requires a 3D model");
  if (axis < 0 || axis > 2) throw ModelError("slice axis must be 0, 1 or 2");
  if (z <= 0) throw ModelError("slice value must be positive");
  std::map<std::pair<int, int>, Rational> acc;
  for (const auto& [s, w] : m.weights()) {
    std::vector<int> rest;
    for (int i = 0; i < 3; ++i)
      if (i != axis) rest.push_back(s[i]);
    if (rest[0] == 0 && rest[1] == 0) continue;
    acc[{rest[0], rest[1]}] += w * pow_int(z, s[axis]);
  }
  WeightMap w2;
  for (const auto& [ij, v] : acc) w2.emplace(Step({ij.first, ij.second}), v);
  if (w2.empty()) throw ModelError("slice is empty");
  return {m, axis, z, WeightedModel(2, w2)};
}

}  // namespace walkgroups
