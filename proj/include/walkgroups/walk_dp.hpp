#pragma once

// Exact counts of walks confined to the nonnegative orthant, by forward
// dynamic programming over layers, and the zero-drift check of the
// x0-reweighted model.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <type_traits>
#include <vector>

#include "walkgroups/geometry.hpp"
#include "walkgroups/model.hpp"
#include "walkgroups/rational.hpp"

namespace walkgroups {

class WalkQueryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using LatticePoint = std::vector<int>;

/// Dense layers over the box [0, start_i + n * reach_i], flattened row-major.
struct CountTable {
  int dim = 0;
  LatticePoint start;
  std::vector<int> extent;           // box side lengths
  std::vector<std::vector<Rational>> layers;

  [[nodiscard]] bool inside(const LatticePoint& p) const {
    for (int i = 0; i < dim; ++i)
      if (p[i] < 0 || p[i] >= extent[i]) return false;
    return true;
  }
  [[nodiscard]] size_t index(const LatticePoint& p) const {
    size_t k = 0;
    for (int i = 0; i < dim; ++i) k = k * extent[i] + p[i];
    return k;
  }
  [[nodiscard]] Rational at(size_t n, const LatticePoint& p) const {
    if (n >= layers.size() || static_cast<int>(p.size()) != dim || !inside(p)) return 0;
    return layers[n][index(p)];
  }
  [[nodiscard]] Rational layer_sum(size_t n) const {
    Rational s = 0;
    for (const auto& v : layers.at(n)) s += v;
    return s;
  }
};

namespace detail {

inline void check_point(const WeightedModel& m, const LatticePoint& p, const char* what) {
  if (static_cast<int>(p.size()) != m.dim())
    throw WalkQueryError(std::string(what) + " has dimension " + std::to_string(p.size()) + ", model has " +
                         std::to_string(m.dim()));
  for (int c : p)
    if (c < 0) throw WalkQueryError(std::string(what) + " must have nonnegative coordinates");
}

inline bool integer_weights(const WeightedModel& m) {
  return std::all_of(m.weights().begin(), m.weights().end(), [](const auto& kv) { return kv.second.get_den() == 1; });
}

// One DP over value type V (Integer or Rational).
template <class V>
std::vector<std::vector<V>> run_layers(const WeightedModel& m, const CountTable& shape, int n) {
  const int d = m.dim();
  size_t total = 1;
  for (int e : shape.extent) total *= static_cast<size_t>(e);

  struct Move {
    std::vector<int> delta;
    std::ptrdiff_t offset;
    V weight;
  };
  std::vector<Move> moves;
  for (const auto& [s, w] : m.weights()) {
    Move mv{s.coords(), 0, V(0)};
    std::ptrdiff_t stride = 1;
    for (int i = d - 1; i >= 0; --i) {
      mv.offset += stride * s[i];
      stride *= shape.extent[i];
    }
    if constexpr (std::is_same_v<V, Integer>) mv.weight = w.get_num();
    else mv.weight = w;
    moves.push_back(std::move(mv));
  }

  std::vector<std::vector<V>> layers;
  layers.emplace_back(total, V(0));
  layers[0][shape.index(shape.start)] = 1;
  LatticePoint p(d);
  for (int k = 0; k < n; ++k) {
    const auto& cur = layers.back();
    std::vector<V> next(total, V(0));
    for (size_t idx = 0; idx < total; ++idx) {
      if (cur[idx] == 0) continue;
      size_t rest = idx;
      for (int i = d - 1; i >= 0; --i) {
        p[i] = static_cast<int>(rest % shape.extent[i]);
        rest /= shape.extent[i];
      }
      for (const auto& mv : moves) {
        bool ok = true;
        for (int i = 0; i < d && ok; ++i) {
          const int c = p[i] + mv.delta[i];
          ok = c >= 0 && c < shape.extent[i];
        }
        if (ok) next[idx + mv.offset] += cur[idx] * mv.weight;
      }
    }
    layers.push_back(std::move(next));
  }
  return layers;
}

}  // namespace detail

/// Layers 0..n of walks from P that stay in the orthant.
inline CountTable count_table(const WeightedModel& m, const LatticePoint& P, int n) {
  if (n < 0) throw WalkQueryError("length must be >= 0");
  detail::check_point(m, P, "start point");
  CountTable t;
  t.dim = m.dim();
  t.start = P;
  for (int i = 0; i < t.dim; ++i) {
    int reach = 0;
    for (const auto& kv : m.weights()) reach = std::max(reach, kv.first[i]);
    t.extent.push_back(P[i] + n * reach + 1);
  }
  if (detail::integer_weights(m)) {
    for (auto& layer : detail::run_layers<Integer>(m, t, n)) {
      std::vector<Rational> row(layer.begin(), layer.end());
      t.layers.push_back(std::move(row));
    }
  } else {
    t.layers = detail::run_layers<Rational>(m, t, n);
  }
  return t;
}

/// Coefficients of t^0..t^N of sum_n e(P,Q;n) t^n.
inline std::vector<Rational> series_terms(const WeightedModel& m, const LatticePoint& P, const LatticePoint& Q, int N) {
  detail::check_point(m, Q, "end point");
  const auto table = count_table(m, P, N);
  std::vector<Rational> out;
  for (int k = 0; k <= N; ++k) out.push_back(table.at(k, Q));
  return out;
}

inline Rational count_walks(const WeightedModel& m, const LatticePoint& P, const LatticePoint& Q, int n) {
  return series_terms(m, P, Q, n).back();
}

/// Total weight of walks of each length 0..n from P (all endpoints).
inline std::vector<Rational> layer_sums(const WeightedModel& m, const LatticePoint& P, int n) {
  const auto table = count_table(m, P, n);
  std::vector<Rational> out;
  for (int k = 0; k <= n; ++k) out.push_back(table.layer_sum(k));
  return out;
}

// ---------------------------------------------------------------------------

struct ZeroDriftResult {
  Eigen::VectorXd x0;
  double drift = 0;                 // norm of the drift after reweighting at x0
  Eigen::MatrixXd covariance;       // of the transformed steps
  double covariance_residual = 0;   // max |C - I|
  bool identity = false;
};

/// Reweights w(s) x0^s / chi(x0), then standardizes the steps by the axis
/// variances and applies Delta^{-1/2}; the resulting covariance should be I.
inline ZeroDriftResult zero_drift_check(const WeightedModel& m, double tol = 1e-8) {
  const auto cp = critical_point(m);
  const auto cov = covariance(m, cp);
  const int d = m.dim();
  ZeroDriftResult res;
  res.x0 = cp.x0;

  std::vector<double> p;
  std::vector<Eigen::VectorXd> steps;
  double chi = 0;
  for (const auto& [s, w] : m.weights()) {
    double mon = w.get_d();
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) {
      mon *= std::pow(cp.x0[i], s[i]);
      v[i] = s[i];
    }
    p.push_back(mon);
    steps.push_back(v);
    chi += mon;
  }
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
  for (size_t k = 0; k < p.size(); ++k) mean += (p[k] /= chi) * steps[k];
  res.drift = mean.norm();

  Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(d, d);
  for (size_t k = 0; k < p.size(); ++k) {
    const Eigen::VectorXd c = steps[k] - mean;
    sigma += p[k] * c * c.transpose();
  }
  const Eigen::VectorXd scale = sigma.diagonal().array().rsqrt();
  const Eigen::MatrixXd T = cov.inv_sqrt * scale.asDiagonal();
  res.covariance = T * sigma * T.transpose();
  res.covariance_residual = (res.covariance - Eigen::MatrixXd::Identity(d, d)).cwiseAbs().maxCoeff();
  res.identity = res.covariance_residual <= tol;
  return res;
}

}  // namespace walkgroups
