#pragma once

// Shared fixtures for the unit tests and the acceptance runner: random models,
// golden sets and oracles that do not reuse library code paths.

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "walkgroups/classifiers.hpp"
#include "walkgroups/model.hpp"

namespace wgtest {

using namespace walkgroups;

inline std::vector<Step> small_steps(int d) {
  std::vector<Step> out;
  std::vector<int> c(d, -1);
  while (true) {
    if (std::any_of(c.begin(), c.end(), [](int v) { return v != 0; })) out.push_back(Step(c));
    int i = 0;
    while (i < d && c[i] == 1) c[i++] = -1;
    if (i == d) break;
    ++c[i];
  }
  return out;
}

// H1 by angles in 2D: the steps avoid a closed half-plane iff every angular
// gap between consecutive step directions is below pi.
inline bool h1_by_angles(const WeightedModel& m) {
  std::vector<double> ang;
  for (const auto& kv : m.weights()) ang.push_back(std::atan2(kv.first[1], kv.first[0]));
  std::sort(ang.begin(), ang.end());
  for (size_t i = 0; i < ang.size(); ++i) {
    const double next = i + 1 < ang.size() ? ang[i + 1] : ang[0] + 2 * M_PI;
    if (next - ang[i] >= M_PI - 1e-12) return false;
  }
  return true;
}

// H1 by scanning integer directions: extreme rays of the supporting cone of a
// small-step set are cross products of steps, so entries lie in [-2, 2].
inline bool h1_by_grid(const WeightedModel& m) {
  const int d = m.dim();
  std::vector<int> x(d, -2);
  while (true) {
    if (std::any_of(x.begin(), x.end(), [](int v) { return v != 0; })) {
      bool support = true;
      for (const auto& kv : m.weights()) {
        int dot = 0;
        for (int i = 0; i < d; ++i) dot += x[i] * kv.first[i];
        if (dot < 0) {
          support = false;
          break;
        }
      }
      if (support) return false;
    }
    int i = 0;
    while (i < d && x[i] == 2) x[i++] = -2;
    if (i == d) break;
    ++x[i];
  }
  return true;
}

inline WeightedModel random_model(std::mt19937_64& rng, int d, int max_weight = 9, double density = 0.5) {
  const auto steps = small_steps(d);
  std::uniform_real_distribution<double> coin(0, 1);
  std::uniform_int_distribution<int> wd(1, max_weight);
  while (true) {
    WeightMap w;
    for (const auto& s : steps)
      if (coin(rng) < density) {
        Rational r(wd(rng), wd(rng));
        r.canonicalize();
        w.emplace(s, r);
      }
    if (w.empty()) continue;
    WeightedModel m(d, w);
    if (check_h1(m).satisfied) return m;
  }
}

inline std::vector<Rational> random_alpha(std::mt19937_64& rng, int d, int max = 7) {
  std::vector<Rational> a;
  for (int i = 0; i < d; ++i) a.push_back(random_positive_rational(rng, max));
  return a;
}

struct Named {
  std::string name;
  WeightedModel model;
};

inline std::vector<Named> golden_2d_fixed() {
  return {{"order4-example", models::order4_example()},   {"order6-example", models::order6_example()},
          {"order8-example", models::order8_example()}, {"order10-example", models::order10_example()},
          {"kreweras", models::kreweras()},     {"simple-walk", models::simple_walk()}};
}

/// Random central weightings of the fixed finite models.
inline std::vector<Named> golden_2d_random_finite(std::uint64_t seed, int count) {
  std::mt19937_64 rng(seed);
  const auto base = golden_2d_fixed();
  std::vector<Named> out;
  for (int k = 0; k < count; ++k) {
    const auto& b = base[static_cast<size_t>(k) % base.size()];
    const Rational mu = random_positive_rational(rng, 9);
    out.push_back({b.name + "-cw" + std::to_string(k), central_weighting(b.model, mu, random_alpha(rng, 2))});
  }
  return out;
}

inline std::vector<Named> golden_3d() {
  using namespace families;
  return {{"A3-family1 c=0", a3_family1(0)},
          {"A3-family1 c=1", a3_family1(1)},
          {"A3-family1 c=7/2", a3_family1(Rational(7, 2))},
          {"A3-family2 (1,1,1)", a3_family2(1, 1, 1)},
          {"A3-family2 (0,0,1)", a3_family2(0, 0, 1)},
          {"A3-family2 (2,1,0)", a3_family2(2, 1, 0)},
          {"B3-model1", b3_model1()},
          {"B3-model2", b3_model2()},
          {"Z2xD4", z2xd2k(2)},
          {"Z2xD6", z2xd2k(3)},
          {"Z2xD8", z2xd2k(4)}};
}

// ---------------------------------------------------------------------------
// Walk counts by enumerating step sequences depth first; prefixes that leave
// the orthant are dropped together with all their extensions.

inline std::map<std::pair<int, std::vector<int>>, Rational> brute_force_counts(const WeightedModel& m,
                                                                               const std::vector<int>& P, int n) {
  std::map<std::pair<int, std::vector<int>>, Rational> out;
  std::vector<std::pair<std::vector<int>, Rational>> steps;
  for (const auto& [s, w] : m.weights()) steps.emplace_back(s.coords(), w);
  std::vector<int> pos = P;
  std::function<void(int, const Rational&)> rec = [&](int len, const Rational& weight) {
    out[{len, pos}] += weight;
    if (len == n) return;
    for (const auto& [s, w] : steps) {
      bool inside = true;
      for (size_t i = 0; i < pos.size(); ++i) inside = inside && pos[i] + s[i] >= 0;
      if (!inside) continue;
      for (size_t i = 0; i < pos.size(); ++i) pos[i] += s[i];
      rec(len + 1, weight * w);
      for (size_t i = 0; i < pos.size(); ++i) pos[i] -= s[i];
    }
  };
  rec(0, Rational(1));
  return out;
}

// ---------------------------------------------------------------------------
// Order of phi_2 o phi_1 by iterating the maps in long double at a random
// point: an oracle for the 2D group order (|G| = 2 * order) that shares no
// code with the exact orbit search.

inline long double eval_coeff(const WeightedModel& m, int axis, int e, long double other) {
  long double s = 0;
  for (const auto& [st, w] : m.weights())
    if (st[axis] == e) s += static_cast<long double>(w.get_d()) * std::pow(other, st[1 - axis]);
  return s;
}

inline int float_pair_order_2d(const WeightedModel& m, int max_order = 32) {
  const long double x0 = 0.7372L, y0 = 1.3119L;
  long double x = x0, y = y0;
  for (int k = 1; k <= max_order; ++k) {
    x = eval_coeff(m, 0, -1, y) / (eval_coeff(m, 0, 1, y) * x);
    y = eval_coeff(m, 1, -1, x) / (eval_coeff(m, 1, 1, x) * y);
    if (std::fabs(x - x0) < 1e-9L && std::fabs(y - y0) < 1e-9L) return k;
  }
  return 0;
}

}  // namespace wgtest
