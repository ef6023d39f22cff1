#pragma once

// The group of the walk: birational involutions phi_i, exact orbit search,
// pairwise product orders and the Jacobian representation at x0.

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "walkgroups/laurent.hpp"
#include "walkgroups/model.hpp"

namespace walkgroups {

class GroupError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Point = std::vector<Rational>;

/// chi = x_i A_i + B_i + C_i / x_i, with A_i, B_i, C_i free of x_i.
struct BirationalGenerator {
  int index = 0;
  LaurentPoly A, B, C;

  /// x_i -> C_i / (A_i x_i); exact.
  [[nodiscard]] Point apply(const Point& p) const {
    const Rational a = A.eval<Rational>(p);
    const auto i = static_cast<size_t>(index);
    if (a == 0 || p[i] == 0) throw GroupError("evaluation pole in generator " + std::to_string(index + 1));
    Point q = p;
    q[i] = C.eval<Rational>(p) / (a * p[i]);
    return q;
  }

  [[nodiscard]] std::vector<double> apply(const std::vector<double>& p) const {
    const auto i = static_cast<size_t>(index);
    std::vector<double> q = p;
    q[i] = C.eval<double>(p) / (A.eval<double>(p) * p[i]);
    return q;
  }
};

inline std::vector<BirationalGenerator> build_generators(const WeightedModel& m) {
  const int d = m.dim();
  std::vector<BirationalGenerator> gens;
  for (int i = 0; i < d; ++i) {
    BirationalGenerator g{i, LaurentPoly(d), LaurentPoly(d), LaurentPoly(d)};
    for (const auto& [s, w] : m.weights()) {
      std::vector<int> e = s.coords();
      e[static_cast<size_t>(i)] = 0;
      if (s[i] == 1) g.A.add_term(e, w);
      else if (s[i] == 0) g.B.add_term(e, w);
      else g.C.add_term(e, w);
    }
    if (g.A.is_zero() || g.C.is_zero())
      throw GroupError("generator " + std::to_string(i + 1) + " is degenerate (A or C vanishes; H1 fails)");
    gens.push_back(std::move(g));
  }
  return gens;
}

inline Point apply_generator(const BirationalGenerator& g, const Point& p) { return g.apply(p); }

// ---------------------------------------------------------------------------

struct Milestone {
  int word_length = 0;
  int orbit_size = 0;
};

struct GroupVerdict {
  std::optional<int> order;  // set iff finite within bound
  int bound = 0;
  std::vector<Milestone> certificate;

  [[nodiscard]] bool finite() const { return order.has_value(); }
  [[nodiscard]] std::string str() const {
    return order ? "Finite(" + std::to_string(*order) + ")" : "ExceedsBound(" + std::to_string(bound) + ")";
  }
};

struct OrbitOptions {
  int bound = 64;
  int test_points = 3;
  std::uint64_t seed = 1;
  int max_retries = 4;
};

inline std::uint64_t fnv1a(const std::string& s, std::uint64_t h = 1469598103934665603ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

/// Per-model seed: identical models get identical sample points.
inline std::uint64_t model_seed(const WeightedModel& m, std::uint64_t seed) {
  return fnv1a(m.str(), seed * 0x9E3779B97F4A7C15ULL + 1);
}

namespace detail {

inline std::vector<Point> sample_points(int d, int count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<Point> pts;
  while (static_cast<int>(pts.size()) < count) {
    Point p;
    for (int i = 0; i < d; ++i) p.push_back(random_positive_rational(rng, 50));
    if (std::find(pts.begin(), pts.end(), p) == pts.end()) pts.push_back(std::move(p));
  }
  return pts;
}

/// One BFS over reduced words; identification by images of the points.
inline GroupVerdict orbit_bfs(const std::vector<BirationalGenerator>& gens, const std::vector<Point>& pts,
                              int bound) {
  using Images = std::vector<Point>;
  struct Node {
    Images images;
    int last;
  };
  std::set<Images> seen{pts};
  std::vector<Node> frontier{{pts, -1}};
  GroupVerdict v;
  v.bound = bound;
  v.certificate.push_back({0, 1});
  for (int len = 1; !frontier.empty(); ++len) {
    std::vector<Node> next;
    for (const auto& node : frontier) {
      for (const auto& g : gens) {
        if (g.index == node.last) continue;
        Images img;
        img.reserve(node.images.size());
        for (const auto& p : node.images) img.push_back(g.apply(p));
        if (seen.insert(img).second) {
          if (static_cast<int>(seen.size()) > bound) {
            v.certificate.push_back({len, static_cast<int>(seen.size())});
            return v;
          }
          next.push_back({std::move(img), g.index});
        }
      }
    }
    if (!next.empty()) v.certificate.push_back({len, static_cast<int>(seen.size())});
    frontier = std::move(next);
  }
  v.order = static_cast<int>(seen.size());
  return v;
}

template <class Run>
GroupVerdict verified(Run run, int d, const OrbitOptions& opt) {
  std::uint64_t seed = opt.seed;
  for (int attempt = 0; attempt < opt.max_retries; ++attempt) {
    std::mt19937_64 seeder(seed + static_cast<std::uint64_t>(attempt) * 7919);
    const std::uint64_t s1 = seeder(), s2 = seeder();
    GroupVerdict a, b;
    try {
      a = run(sample_points(d, opt.test_points, s1));
      if (!a.finite()) return a;
      b = run(sample_points(d, opt.test_points, s2));
    } catch (const GroupError&) {
      continue;  // pole at a sampled point: resample
    }
    if (b.finite() && *a.order == *b.order) return a;
  }
  throw GroupError("inconsistent orders across independent point sets after " + std::to_string(opt.max_retries) +
                   " retries");
}

}  // namespace detail

inline GroupVerdict group_order(const WeightedModel& m, const OrbitOptions& opt = {}) {
  if (opt.bound < 2) throw GroupError("bound must be >= 2");
  if (opt.test_points < 3) throw GroupError("at least 3 test points are required");
  const auto gens = build_generators(m);
  OrbitOptions o = opt;
  o.seed = model_seed(m, opt.seed);
  return detail::verified([&](const std::vector<Point>& pts) { return detail::orbit_bfs(gens, pts, opt.bound); },
                          m.dim(), o);
}

/// Order of phi_i o phi_j (0-based indices).
inline GroupVerdict pair_order(const WeightedModel& m, int i, int j, const OrbitOptions& opt = {32, 3, 1, 4}) {
  if (i == j) throw GroupError("pair_order requires i != j");
  if (i < 0 || j < 0 || i >= m.dim() || j >= m.dim()) throw GroupError("generator index out of range");
  const auto gens = build_generators(m);
  const auto& gi = gens[static_cast<size_t>(i)];
  const auto& gj = gens[static_cast<size_t>(j)];
  OrbitOptions o = opt;
  o.seed = model_seed(m, opt.seed) ^ (static_cast<std::uint64_t>(i * 31 + j) << 32);
  auto run = [&](const std::vector<Point>& pts) {
    GroupVerdict v;
    v.bound = opt.bound;
    std::vector<Point> cur = pts;
    for (int n = 1; n <= opt.bound; ++n) {
      for (auto& p : cur) p = gi.apply(gj.apply(p));
      if (cur == pts) {
        v.order = n;
        v.certificate.push_back({2 * n, n});
        return v;
      }
    }
    v.certificate.push_back({2 * opt.bound, opt.bound});
    return v;
  };
  return detail::verified(run, m.dim(), o);
}

// ---------------------------------------------------------------------------
// Jacobian representation at the common fixed point x0.

struct JacobianRep {
  std::vector<double> x0;
  std::vector<Eigen::MatrixXd> matrices;
};

inline JacobianRep jacobians_at(const WeightedModel& m, const std::vector<double>& x0, double fixed_tol = 1e-8) {
  const int d = m.dim();
  if (static_cast<int>(x0.size()) != d) throw GroupError("x0 dimension mismatch");
  const auto gens = build_generators(m);
  JacobianRep rep{x0, {}};
  for (const auto& g : gens) {
    const auto i = static_cast<size_t>(g.index);
    const double a = g.A.eval<double>(x0);
    const double c = g.C.eval<double>(x0);
    const double image = c / (a * x0[i]);
    if (std::abs(image - x0[i]) > fixed_tol * (1 + std::abs(x0[i])))
      throw GroupError("x0 is not fixed by generator " + std::to_string(g.index + 1));
    Eigen::MatrixXd J = Eigen::MatrixXd::Identity(d, d);
    J(g.index, g.index) = -c / (a * x0[i] * x0[i]);
    for (int k = 0; k < d; ++k) {
      if (k == g.index) continue;
      const double da = g.A.derivative(k).eval<double>(x0);
      const double dc = g.C.derivative(k).eval<double>(x0);
      J(g.index, k) = (dc * a - c * da) / (a * a * x0[i]);
    }
    rep.matrices.push_back(std::move(J));
  }
  return rep;
}

/// Order of the group generated by the matrices, by BFS with entrywise dedup.
inline GroupVerdict matrix_group_order(const std::vector<Eigen::MatrixXd>& gens, int bound, double tol = 1e-8) {
  if (gens.empty()) throw GroupError("no generators");
  if (tol <= 0) throw GroupError("tolerance must be positive");
  const auto n = gens.front().rows();
  std::vector<Eigen::MatrixXd> elements{Eigen::MatrixXd::Identity(n, n)};
  struct Node {
    size_t idx;
    int last;
  };
  std::vector<Node> frontier{{0, -1}};
  GroupVerdict v;
  v.bound = bound;
  v.certificate.push_back({0, 1});
  auto find = [&](const Eigen::MatrixXd& M) -> std::optional<size_t> {
    std::optional<size_t> hit;
    for (size_t k = 0; k < elements.size(); ++k) {
      const double dist = (elements[k] - M).cwiseAbs().maxCoeff();
      if (dist < tol) {
        if (hit) throw GroupError("ambiguous matrix dedup; tighten tolerance");
        hit = k;
      } else if (dist < 2 * tol) {
        throw GroupError("ambiguous matrix dedup; tighten tolerance");
      }
    }
    return hit;
  };
  for (int len = 1; !frontier.empty(); ++len) {
    std::vector<Node> next;
    for (const auto& node : frontier) {
      for (int g = 0; g < static_cast<int>(gens.size()); ++g) {
        if (g == node.last) continue;
        Eigen::MatrixXd M = gens[static_cast<size_t>(g)] * elements[node.idx];
        if (find(M)) continue;
        elements.push_back(std::move(M));
        if (static_cast<int>(elements.size()) > bound) {
          v.certificate.push_back({len, static_cast<int>(elements.size())});
          return v;
        }
        next.push_back({elements.size() - 1, g});
      }
    }
    if (!next.empty()) v.certificate.push_back({len, static_cast<int>(elements.size())});
    frontier = std::move(next);
  }
  v.order = static_cast<int>(elements.size());
  return v;
}

inline GroupVerdict matrix_group_order(const JacobianRep& rep, int bound, double tol = 1e-8) {
  return matrix_group_order(rep.matrices, bound, tol);
}

}  // namespace walkgroups
