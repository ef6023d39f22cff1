#pragma once

// 2D census, weighted family checks (orders 8 and 10), 3D Weyl-property
// reports, the A3/B3 families and a constrained 3D search.

#include <algorithm>
#include <array>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "walkgroups/elliptic.hpp"
#include "walkgroups/geometry.hpp"
#include "walkgroups/group.hpp"
#include "walkgroups/model.hpp"
#include "walkgroups/parallel.hpp"

namespace walkgroups {

class ClassifierError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline WeightedModel model_from(int d, const std::vector<std::pair<Step, Rational>>& entries) {
  WeightMap w;
  for (const auto& [s, v] : entries) w[s] += v;
  return WeightedModel(d, w);
}

// ---------------------------------------------------------------------------
// Named 2D models.

namespace models {

inline WeightedModel simple_walk() { return model_from(2, {{{1, 0}, 1}, {{-1, 0}, 1}, {{0, 1}, 1}, {{0, -1}, 1}}); }
inline WeightedModel kreweras() { return model_from(2, {{{1, 0}, 1}, {{0, 1}, 1}, {{-1, -1}, 1}}); }
inline WeightedModel gessel() { return model_from(2, {{{1, 0}, 1}, {{-1, 0}, 1}, {{1, 1}, 1}, {{-1, -1}, 1}}); }

/// The four weighted models of orders 4, 6, 8 and 10.
inline WeightedModel order4_example() {
  return model_from(2, {{{-1, 0}, 3}, {{1, 1}, 15}, {{-1, -1}, 2}, {{0, 1}, 13}, {{1, 0}, 9}, {{1, -1}, 6}, {{-1, 1}, 5}});
}
inline WeightedModel order6_example() {
  return model_from(2, {{{-1, -1}, 1}, {{1, 1}, 7}, {{0, -1}, 2}, {{0, 1}, 7}, {{1, 0}, 5}, {{1, -1}, 1}});
}
inline WeightedModel order8_example() { return model_from(2, {{{1, 1}, 4}, {{1, 0}, 2}, {{-1, 0}, 6}, {{-1, -1}, 3}}); }
inline WeightedModel order10_example() {
  return model_from(2, {{{-1, 0}, 1}, {{1, 1}, 1}, {{0, -1}, 1}, {{0, 1}, 2}, {{1, 0}, 2}, {{1, -1}, 1}, {{-1, 1}, 1}});
}

/// The order-10 models: the rightmost model, its vertical reflection and its
/// reflection through the origin.
inline std::vector<WeightedModel> order10_triple() {
  const auto f = order10_example();
  return {f, reflect_axis(f, 1), reflect_origin(f)};
}

}  // namespace models

// ---------------------------------------------------------------------------
// Weighted 2D families.

namespace detail {
inline Rational w2(const WeightedModel& m, int i, int j) { return m.weight(Step{i, j}); }
}  // namespace detail

/// w(1,1) = w(0,1) = w(0,-1) = w(-1,-1) = 0 and w(1,-1)w(-1,1) = w(1,0)w(-1,0) != 0.
inline bool verify_family_4a(const WeightedModel& m) {
  if (m.dim() != 2) throw ClassifierError("family 4a is two-dimensional");
  using detail::w2;
  if (w2(m, 1, 1) != 0 || w2(m, 0, 1) != 0 || w2(m, 0, -1) != 0 || w2(m, -1, -1) != 0) return false;
  const Rational p = w2(m, 1, -1) * w2(m, -1, 1);
  return p != 0 && p == w2(m, 1, 0) * w2(m, -1, 0);
}

/// Support in {(1,1),(1,0),(-1,0),(-1,-1)} with w(1,0)w(-1,0) = w(1,1)w(-1,-1) != 0.
inline bool verify_order8_family(const WeightedModel& m) {
  if (m.dim() != 2) throw ClassifierError("order-8 family is two-dimensional");
  static const std::set<Step> allowed{{1, 1}, {1, 0}, {-1, 0}, {-1, -1}};
  for (const auto& [s, w] : m.weights())
    if (!allowed.count(s)) return false;
  using detail::w2;
  const Rational p = w2(m, 1, 0) * w2(m, -1, 0);
  return p != 0 && p == w2(m, 1, 1) * w2(m, -1, -1);
}

/// Canonical order-10 patterns: the triple closed under the vertical and
/// central reflections (which adds the horizontal reflection).
inline std::vector<WeightedModel> order10_canonical() {
  const auto f = models::order10_example();
  return {f, reflect_axis(f, 1), reflect_origin(f), reflect_axis(f, 0)};
}

/// Is m = mu * c(s) * alpha^s for one of the canonical patterns c? Decided
/// exactly on squares: w(s)^2 = M c(s)^2 A^{s1} B^{s2} with M = mu^2,
/// A = alpha1^2, B = alpha2^2 (so irrational mu, alpha are allowed).
inline bool central_weighting_of(const WeightedModel& m, const WeightedModel& c) {
  if (m.dim() != c.dim()) return false;
  if (m.size() != c.size()) return false;
  for (const auto& [s, w] : c.weights())
    if (!m.contains(s)) return false;
  const Step e1{1, 0}, e1m{-1, 0}, e2{0, 1}, e2m{0, -1};
  for (const auto& s : {e1, e1m, e2, e2m})
    if (!c.contains(s)) throw ClassifierError("canonical pattern lacks an axis step");
  const Rational M = m.weight(e1) * m.weight(e1m) / (c.weight(e1) * c.weight(e1m));
  const Rational A = m.weight(e1) * c.weight(e1m) / (c.weight(e1) * m.weight(e1m));
  const Rational B = m.weight(e2) * c.weight(e2m) / (c.weight(e2) * m.weight(e2m));
  for (const auto& [s, cw] : c.weights()) {
    const Rational lhs = m.weight(s) * m.weight(s);
    const Rational rhs = M * cw * cw * pow_int(A, s[0]) * pow_int(B, s[1]);
    if (lhs != rhs) return false;
  }
  return true;
}

inline bool verify_order10_models(const WeightedModel& m) {
  if (m.dim() != 2) throw ClassifierError("order-10 models are two-dimensional");
  for (const auto& c : order10_canonical())
    if (central_weighting_of(m, c)) return true;
  return false;
}

// ---------------------------------------------------------------------------
// 2D unweighted census.

enum class CensusMode { raw, reduced };

struct CensusEntry {
  WeightedModel model;  // representative
  bool h1 = false;
  std::optional<int> order;  // finite order within the bound
  std::optional<Fraction> r;  // rational r(t) from the elliptic probe
  std::string elliptic;       // "rational", "non-constant", "agrees", or an error
  bool consistent = true;     // elliptic verdict agrees with the orbit verdict
};

struct FilterCount {
  std::string name;
  size_t remaining = 0;
};

struct Classify2DReport {
  CensusMode mode = CensusMode::raw;
  size_t total = 0;           // subsets examined
  std::vector<FilterCount> filters;
  size_t classes = 0;
  size_t singular = 0;
  size_t finite = 0;
  std::map<int, size_t> orders;
  std::vector<CensusEntry> entries;
};

namespace census {

inline std::vector<Step> all_steps_2d() {
  std::vector<Step> s;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      if (i || j) s.push_back(Step{i, j});
  return s;
}

inline std::vector<Step> subset(unsigned mask) {
  const auto all = all_steps_2d();
  std::vector<Step> out;
  for (size_t b = 0; b < all.size(); ++b)
    if (mask >> b & 1U) out.push_back(all[b]);
  return out;
}

/// every step s has n.s >= 0
inline bool contained_in(const std::vector<Step>& S, int n0, int n1) {
  return std::all_of(S.begin(), S.end(), [&](const Step& s) { return n0 * s[0] + n1 * s[1] >= 0; });
}

inline bool uses_all_four_directions(const std::vector<Step>& S) {
  auto has = [&](int axis, int v) { return std::any_of(S.begin(), S.end(), [&](const Step& s) { return s[axis] == v; }); };
  return has(0, 1) && has(0, -1) && has(1, 1) && has(1, -1);
}

inline bool one_dimensional(const std::vector<Step>& S) {
  return (contained_in(S, 1, 1) && contained_in(S, -1, -1)) || (contained_in(S, 1, -1) && contained_in(S, -1, 1));
}

/// Contained in {x + y <= 0}, {x >= y} or {y >= x}: the associated walks are
/// trivial or reduce to a one-constraint problem.
inline bool trivial_half_plane(const std::vector<Step>& S) {
  return contained_in(S, -1, -1) || contained_in(S, 1, -1) || contained_in(S, -1, 1);
}

inline std::vector<Step> swap_xy(const std::vector<Step>& S) {
  std::vector<Step> out;
  for (const auto& s : S) out.push_back(Step{s[1], s[0]});
  std::sort(out.begin(), out.end());
  return out;
}

struct Filter {
  std::string name;
  std::function<bool(const std::vector<Step>&)> keep;
};

inline std::vector<Filter> reduction_filters() {
  return {{"uses x=+1, x=-1, y=+1 and y=-1", uses_all_four_directions},
          {"not one-dimensional", [](const std::vector<Step>& S) { return !one_dimensional(S); }},
          {"not in a trivial half-plane", [](const std::vector<Step>& S) { return !trivial_half_plane(S); }}};
}

inline CensusEntry analyze(const std::vector<Step>& S, std::uint64_t seed) {
  CensusEntry e;
  e.model = unweighted(2, S);
  e.h1 = check_h1(e.model).satisfied;
  if (!e.h1) {
    e.elliptic = "singular";
    return e;
  }
  const auto v = group_order(e.model, {32, 3, seed, 4});
  e.order = v.order;
  try {
    const auto probe = rationality_probe(e.model);
    if (probe.rational) {
      e.r = probe.value;
      e.elliptic = "rational";
      e.consistent = e.order && *e.order == probe.predicted_order();
    } else {
      e.elliptic = "non-constant";
      e.consistent = !e.order;
    }
  } catch (const EllipticError& err) {
    e.elliptic = std::string("error: ") + err.what();
    e.consistent = false;
  }
  return e;
}

}  // namespace census

inline Classify2DReport enumerate_2d_unweighted(CensusMode mode, int jobs = 1, std::uint64_t seed = 1) {
  Classify2DReport rep;
  rep.mode = mode;
  std::vector<std::vector<Step>> work;
  for (unsigned mask = 1; mask < 256; ++mask) work.push_back(census::subset(mask));
  rep.total = work.size();
  if (mode == CensusMode::reduced) {
    for (const auto& f : census::reduction_filters()) {
      std::vector<std::vector<Step>> kept;
      for (auto& S : work)
        if (f.keep(S)) kept.push_back(std::move(S));
      work = std::move(kept);
      rep.filters.push_back({f.name, work.size()});
    }
    std::map<std::vector<Step>, std::vector<Step>> classes;
    for (auto& S : work) {
      std::vector<Step> sorted = S;
      std::sort(sorted.begin(), sorted.end());
      const auto key = std::min(sorted, census::swap_xy(S));
      classes.emplace(key, key);
    }
    work.clear();
    for (auto& [k, S] : classes) work.push_back(S);
    rep.filters.push_back({"quotient by x<->y", work.size()});
  }
  rep.entries = parallel_map(work.size(), jobs, [&](size_t i) { return census::analyze(work[i], seed); });
  rep.classes = rep.entries.size();
  for (const auto& e : rep.entries) {
    if (!e.h1) ++rep.singular;
    if (e.order) {
      ++rep.finite;
      ++rep.orders[*e.order];
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// 3D: Weyl reports.

struct SliceOrders {
  Rational z;
  std::optional<int> gx, gy, gz;  // |G| of the slices fixing x, y and z respectively
};

struct WeylReport3D {
  WeightedModel model;
  bool h1 = false;
  std::optional<std::array<int, 3>> triplet;  // (m12, m13, m23)
  std::array<double, 3> a{};                  // (a12, a13, a23)
  bool weyl = false;
  std::vector<std::string> reasons;
  std::vector<SliceOrders> slices;
  bool slices_consistent = false;
  std::optional<std::string> list_entry;  // e.g. "(D6,D4,D8)"
  std::optional<int> group_order;         // filled when requested
};

/// (|G_z|, |G_y|, |G_x|) multisets allowed for a finite group with the Weyl property.
inline std::optional<std::string> slice_list_entry(const std::array<int, 3>& t) {
  // slice orders are 2 m12, 2 m13, 2 m23; m = 5 is excluded at the slice level
  std::array<int, 3> g{2 * t[0], 2 * t[1], 2 * t[2]};
  std::array<int, 3> s = g;
  std::sort(s.begin(), s.end());
  const bool ok = (s[0] == 4 && s[1] == 4 && (s[2] == 4 || s[2] == 6 || s[2] == 8)) ||
                  (s[0] == 4 && s[1] == 6 && (s[2] == 6 || s[2] == 8));
  if (!ok) return std::nullopt;
  return "(D" + std::to_string(g[0]) + ",D" + std::to_string(g[1]) + ",D" + std::to_string(g[2]) + ")";
}

inline std::vector<Rational> default_slice_values() { return {Rational(1, 2), Rational(1), Rational(2)}; }

struct Classify3DOptions {
  int pair_bound = 32;
  int slice_bound = 32;
  int group_bound = 0;  // 0: do not compute |G|
  std::uint64_t seed = 1;
  double tol = 1e-9;
  std::vector<Rational> slice_values = default_slice_values();
};

inline std::optional<int> slice_order(const WeightedModel& m, int axis, const Rational& z, int bound,
                                      std::uint64_t seed) {
  try {
    const auto sl = slice_model(m, axis, z);
    return group_order(sl.model, {bound, 3, seed, 4}).order;
  } catch (const std::runtime_error&) {
    return std::nullopt;  // degenerate slice
  }
}

inline WeylReport3D classify3d_check(const WeightedModel& m, const Classify3DOptions& opt = {}) {
  if (m.dim() != 3) throw ClassifierError("classify3d_check requires d = 3");
  WeylReport3D rep;
  rep.model = m;
  rep.h1 = check_h1(m).satisfied;
  if (!rep.h1) {
    rep.reasons.emplace_back("H1 fails");
    return rep;
  }
  const auto cov = covariance(m, critical_point(m));
  rep.a = {cov.delta(0, 1), cov.delta(0, 2), cov.delta(1, 2)};
  try {
    rep.triplet = pair_triplet(m, {opt.pair_bound, 3, opt.seed, 4});
  } catch (const GeometryError& e) {
    rep.reasons.emplace_back(e.what());
    return rep;
  }
  const auto w = weyl_check(cov, *rep.triplet, opt.tol);
  rep.weyl = w.weyl;
  rep.reasons = w.reasons;
  const auto& t = *rep.triplet;
  rep.slices_consistent = true;
  for (const auto& z : opt.slice_values) {
    SliceOrders so{z, slice_order(m, 0, z, opt.slice_bound, opt.seed), slice_order(m, 1, z, opt.slice_bound, opt.seed),
                   slice_order(m, 2, z, opt.slice_bound, opt.seed)};
    if (so.gz != 2 * t[0] || so.gy != 2 * t[1] || so.gx != 2 * t[2]) rep.slices_consistent = false;
    rep.slices.push_back(so);
  }
  if (rep.weyl && rep.slices_consistent) rep.list_entry = slice_list_entry(t);
  if (opt.group_bound > 0) rep.group_order = group_order(m, {opt.group_bound, 3, opt.seed, 4}).order;
  return rep;
}

// ---------------------------------------------------------------------------
// Families.

struct FamilySpec {
  std::string id;
  std::string constraints;
  int expected_order = 0;
  std::optional<std::array<int, 3>> expected_triplet;
};

inline const std::vector<FamilySpec>& family_specs() {
  static const std::vector<FamilySpec> specs = {
      {"4a", "w(1,1)=w(0,1)=w(0,-1)=w(-1,-1)=0, w(1,-1)w(-1,1)=w(1,0)w(-1,0)!=0", 8, std::nullopt},
      {"order8-third-model", "support in {(1,1),(1,0),(-1,0),(-1,-1)}, w(1,0)w(-1,0)=w(1,1)w(-1,-1)!=0", 8,
       std::nullopt},
      {"order10-triple", "central weightings of the three order-10 patterns", 10, std::nullopt},
      {"A3-family1", "parameter c >= 0", 24, std::array<int, 3>{3, 2, 3}},
      {"A3-family2", "parameters a, b, c >= 0, not all zero", 24, std::array<int, 3>{3, 2, 3}},
      {"B3-model1", "unweighted", 48, std::array<int, 3>{3, 2, 4}},
      {"B3-model2", "unweighted", 48, std::array<int, 3>{3, 2, 4}},
      {"Z2xD2k", "k in {2,3,4}: a planar model of order 2k plus the steps (0,0,1), (0,0,-1)", 0, std::nullopt},
  };
  return specs;
}

inline const FamilySpec& family_spec(const std::string& id) {
  for (const auto& f : family_specs())
    if (f.id == id) return f;
  throw ClassifierError("unknown family id '" + id + "'");
}

namespace families {

inline WeightedModel a3_family1(const Rational& c) {
  if (c < 0) throw ClassifierError("A3 family 1 requires c >= 0");
  std::vector<std::pair<Step, Rational>> e = {{{0, -1, -1}, 1}, {{0, -1, 0}, 2}, {{0, -1, 1}, 1}, {{1, 0, -1}, 1},
                                              {{1, 0, 0}, 1},   {{-1, 1, -1}, 1}, {{-1, 1, 0}, 1}, {{0, 0, -1}, c}};
  return model_from(3, e);
}

inline WeightedModel a3_family2(const Rational& a, const Rational& b, const Rational& c) {
  if (a < 0 || b < 0 || c < 0 || (a == 0 && b == 0 && c == 0))
    throw ClassifierError("A3 family 2 requires a, b, c >= 0, not all zero");
  std::vector<std::pair<Step, Rational>> e;
  for (const Step& s : {Step{1, 0, 0}, Step{-1, 1, 0}, Step{0, -1, 1}, Step{0, 0, -1}}) e.emplace_back(s, a);
  for (const Step& s : {Step{-1, 0, 0}, Step{1, -1, 0}, Step{0, 1, -1}, Step{0, 0, 1}}) e.emplace_back(s, b);
  for (const Step& s : {Step{0, 1, 0}, Step{0, -1, 0}, Step{1, -1, 1}, Step{-1, 1, -1}, Step{-1, 0, 1}, Step{1, 0, -1}})
    e.emplace_back(s, c);
  return model_from(3, e);
}

inline WeightedModel b3_model1() {
  return unweighted(3, {{0, 1, -1}, {0, -1, 1}, {1, -1, 0}, {-1, 1, 0}, {-1, 0, 0}, {1, 0, 0}});
}

inline WeightedModel b3_model2() {
  return unweighted(3, {{1, 0, -1}, {-1, 0, 1}, {0, 1, -1}, {0, -1, 1}, {-1, 1, -1}, {1, -1, 1}, {0, 0, 1}, {0, 0, -1}});
}

/// Planar model with dihedral group of order 2k and Weyl chamber angle pi/k,
/// plus an independent vertical simple walk.
inline WeightedModel z2xd2k(int k) {
  std::vector<Step> planar;
  switch (k) {
    case 2: planar = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}}; break;
    case 3: planar = {{1, 0}, {-1, 1}, {0, -1}}; break;
    case 4: planar = {{1, 0}, {-1, 0}, {-1, 1}, {1, -1}}; break;
    default: throw ClassifierError("Z2xD2k is provided for k in {2, 3, 4}");
  }
  std::vector<Step> s;
  for (const auto& p : planar) s.push_back(Step{p[0], p[1], 0});
  s.push_back(Step{0, 0, 1});
  s.push_back(Step{0, 0, -1});
  return unweighted(3, s);
}

}  // namespace families

struct FamilyCheck {
  std::string label;  // instance description
  WeightedModel model;
  bool member = false;                 // accepted by the family predicate
  std::optional<int> order;            // orbit-search order
  std::optional<WeylReport3D> report;  // 3D families
  bool pass = false;
};

struct FamilyResult {
  std::string id;
  std::vector<FamilyCheck> checks;
  [[nodiscard]] bool pass() const {
    return !checks.empty() && std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  }
};

inline FamilyCheck check_3d_instance(const std::string& label, const WeightedModel& m, int expected_order,
                                     const std::array<int, 3>& triplet, std::uint64_t seed, double tol) {
  FamilyCheck c;
  c.label = label;
  c.model = m;
  Classify3DOptions opt;
  opt.group_bound = std::max(128, 2 * expected_order);
  opt.seed = seed;
  opt.tol = tol;
  const auto rep = classify3d_check(m, opt);
  c.report = rep;
  c.order = rep.group_order;
  c.member = rep.weyl;
  c.pass = rep.weyl && rep.triplet == triplet && rep.group_order == expected_order && rep.slices_consistent;
  return c;
}

/// Parameters: A3-family1 takes c values; A3-family2 takes (a,b,c) triples
/// flattened; Z2xD2k takes k values; 2D families take explicit models.
struct FamilyParams {
  std::vector<Rational> values;
  std::vector<WeightedModel> models;
};

inline FamilyResult verify_family(const std::string& id, const FamilyParams& p, std::uint64_t seed = 1,
                                  double tol = 1e-9) {
  const auto& spec = family_spec(id);
  FamilyResult res{id, {}};
  auto orbit = [&](const WeightedModel& m, int bound) { return group_order(m, {bound, 3, seed, 4}).order; };
  if (id == "4a" || id == "order8-third-model" || id == "order10-triple") {
    std::vector<WeightedModel> ms = p.models;
    if (ms.empty()) {
      if (id == "4a") ms = {model_from(2, {{{1, -1}, 2}, {{-1, 1}, 2}, {{1, 0}, 4}, {{-1, 0}, 1}})};
      else if (id == "order8-third-model") ms = {models::order8_example()};
      else ms = models::order10_triple();
    }
    for (const auto& m : ms) {
      FamilyCheck c;
      c.label = m.str();
      c.model = m;
      c.member = id == "4a" ? verify_family_4a(m) : id == "order8-third-model" ? verify_order8_family(m)
                                                                             : verify_order10_models(m);
      c.order = orbit(m, 32);
      c.pass = c.member && c.order == spec.expected_order;
      res.checks.push_back(std::move(c));
    }
    return res;
  }
  if (id == "A3-family1") {
    std::vector<Rational> cs = p.values.empty() ? std::vector<Rational>{0, 1, Rational(7, 2)} : p.values;
    for (const auto& cval : cs)
      res.checks.push_back(check_3d_instance("c=" + to_string(cval), families::a3_family1(cval), 24, {3, 2, 3}, seed, tol));
    return res;
  }
  if (id == "A3-family2") {
    std::vector<Rational> v = p.values.empty() ? std::vector<Rational>{1, 1, 1, 0, 0, 1, 2, 1, 0} : p.values;
    if (v.size() % 3) throw ClassifierError("A3-family2 parameters come in (a,b,c) triples");
    for (size_t i = 0; i < v.size(); i += 3)
      res.checks.push_back(check_3d_instance(
          "(a,b,c)=(" + to_string(v[i]) + "," + to_string(v[i + 1]) + "," + to_string(v[i + 2]) + ")",
          families::a3_family2(v[i], v[i + 1], v[i + 2]), 24, {3, 2, 3}, seed, tol));
    return res;
  }
  if (id == "B3-model1") {
    res.checks.push_back(check_3d_instance("B3 model 1", families::b3_model1(), 48, {3, 2, 4}, seed, tol));
    return res;
  }
  if (id == "B3-model2") {
    res.checks.push_back(check_3d_instance("B3 model 2", families::b3_model2(), 48, {3, 2, 4}, seed, tol));
    return res;
  }
  // Z2xD2k
  std::vector<Rational> ks = p.values.empty() ? std::vector<Rational>{2, 3, 4} : p.values;
  for (const auto& kq : ks) {
    if (kq.get_den() != 1) throw ClassifierError("k must be an integer");
    const int k = static_cast<int>(kq.get_num().get_si());
    res.checks.push_back(check_3d_instance("k=" + std::to_string(k), families::z2xd2k(k), 4 * k, {k, 2, 2}, seed, tol));
  }
  return res;
}

inline bool verify_A3_B3_families(const std::string& id, const FamilyParams& p = {}) {
  if (id != "A3-family1" && id != "A3-family2" && id != "B3-model1" && id != "B3-model2")
    throw ClassifierError("not an A3/B3 family id: '" + id + "'");
  return verify_family(id, p).pass();
}

// ---------------------------------------------------------------------------
// Constrained 3D search.

struct SearchConstraints {
  int max_steps = 0;                                   // 0: no limit
  std::vector<Step> support;                           // empty: all 26 steps
  std::map<Step, std::vector<Rational>> weight_options; // 0 means absent; default {0, 1}
  bool symmetry_quotient = true;                       // quotient by coordinate permutations
  size_t limit = 1000000;
};

struct SearchResult {
  size_t space = 0;      // models in the constrained space
  size_t examined = 0;   // after the symmetry quotient
  size_t h1_models = 0;
  size_t nonpositive = 0;  // with a_ij <= 0
  std::vector<WeylReport3D> hits;
};

inline std::vector<Step> all_steps_3d() {
  std::vector<Step> s;
  for (int i = -1; i <= 1; ++i)
    for (int j = -1; j <= 1; ++j)
      for (int k = -1; k <= 1; ++k)
        if (i || j || k) s.push_back(Step{i, j, k});
  return s;
}

inline std::string canonical_3d(const WeightedModel& m) {
  static const std::vector<std::vector<int>> perms = {{0, 1, 2}, {0, 2, 1}, {1, 0, 2}, {1, 2, 0}, {2, 0, 1}, {2, 1, 0}};
  std::string best;
  for (const auto& p : perms) {
    const auto s = permute_coordinates(m, p).str();
    if (best.empty() || s < best) best = s;
  }
  return best;
}

inline SearchResult search3d(const SearchConstraints& c, int jobs = 1, std::uint64_t seed = 1, double tol = 1e-9) {
  const std::vector<Step> support = c.support.empty() ? all_steps_3d() : c.support;
  for (const auto& s : support)
    if (s.dim() != 3) throw ClassifierError("search3d steps must be three-dimensional");
  std::vector<std::vector<Rational>> options;
  for (const auto& s : support) {
    auto it = c.weight_options.find(s);
    std::vector<Rational> o = it == c.weight_options.end() ? std::vector<Rational>{0, 1} : it->second;
    for (const auto& v : o)
      if (v < 0) throw ClassifierError("weight options must be non-negative");
    options.push_back(o);
  }
  // size of the space, respecting max_steps: dp over the number of present steps
  const size_t n = support.size();
  std::vector<long double> count(n + 1, 0);
  count[0] = 1;
  for (const auto& o : options) {
    const auto zeros = static_cast<long double>(std::count(o.begin(), o.end(), Rational(0)));
    const auto nonzeros = static_cast<long double>(o.size()) - zeros;
    std::vector<long double> next(n + 1, 0);
    for (size_t k = 0; k <= n; ++k) {
      next[k] += count[k] * zeros;
      if (k + 1 <= n) next[k + 1] += count[k] * nonzeros;
    }
    count = next;
  }
  long double space = 0;
  for (size_t k = 1; k <= n; ++k)
    if (c.max_steps <= 0 || static_cast<int>(k) <= c.max_steps) space += count[k];
  if (space > static_cast<long double>(c.limit))
    throw ClassifierError("search-space overflow: " + std::to_string(static_cast<double>(space)) + " models exceed limit " +
                          std::to_string(c.limit));
  SearchResult res;
  res.space = static_cast<size_t>(space);

  std::vector<WeightedModel> candidates;
  std::set<std::string> seen;
  std::vector<Rational> current(n);
  std::function<void(size_t, int)> rec = [&](size_t i, int present) {
    if (c.max_steps > 0 && present > c.max_steps) return;
    if (i == n) {
      if (present == 0) return;
      WeightMap w;
      for (size_t k = 0; k < n; ++k)
        if (current[k] != 0) w.emplace(support[k], current[k]);
      WeightedModel m(3, w);
      if (c.symmetry_quotient && !seen.insert(canonical_3d(m)).second) return;
      candidates.push_back(std::move(m));
      return;
    }
    for (const auto& v : options[i]) {
      current[i] = v;
      rec(i + 1, present + (v != 0));
    }
  };
  rec(0, 0);
  res.examined = candidates.size();

  struct Outcome {
    bool h1 = false, nonpositive = false;
    std::optional<WeylReport3D> hit;
  };
  const auto outcomes = parallel_map(candidates.size(), jobs, [&](size_t i) {
    Outcome o;
    const auto& m = candidates[i];
    if (!check_h1(m).satisfied) return o;
    o.h1 = true;
    const auto cov = covariance(m, critical_point(m));
    if (cov.delta(0, 1) > tol || cov.delta(0, 2) > tol || cov.delta(1, 2) > tol) return o;
    o.nonpositive = true;
    Classify3DOptions opt;
    opt.seed = seed;
    opt.tol = tol;
    auto rep = classify3d_check(m, opt);
    if (rep.weyl) o.hit = std::move(rep);
    return o;
  });
  for (const auto& o : outcomes) {
    res.h1_models += o.h1;
    res.nonpositive += o.nonpositive;
    if (o.hit) res.hits.push_back(*o.hit);
  }
  return res;
}

}  // namespace walkgroups
