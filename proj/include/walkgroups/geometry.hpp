#pragma once

// Critical point x0, covariance matrix Delta and Delta^{-1/2}, the
// reflection group of the cone Delta^{-1/2} R_+^d and the Weyl-property check.

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "walkgroups/group.hpp"
#include "walkgroups/model.hpp"

namespace walkgroups {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

namespace detail {

struct StepTable {
  std::vector<Eigen::VectorXd> steps;
  std::vector<double> weights;
};

inline StepTable step_table(const WeightedModel& m) {
  StepTable t;
  for (const auto& [s, w] : m.weights()) {
    Eigen::VectorXd v(m.dim());
    for (int i = 0; i < m.dim(); ++i) v[i] = s[i];
    t.steps.push_back(v);
    t.weights.push_back(w.get_d());
  }
  return t;
}

}  // namespace detail

/// Gradient of chi in x coordinates.
inline Eigen::VectorXd chi_gradient(const WeightedModel& m, const Eigen::VectorXd& x) {
  const int d = m.dim();
  Eigen::VectorXd g = Eigen::VectorXd::Zero(d);
  for (const auto& [s, w] : m.weights()) {
    double mon = w.get_d();
    for (int i = 0; i < d; ++i) mon *= std::pow(x[i], s[i]);
    for (int i = 0; i < d; ++i) g[i] += s[i] * mon / x[i];
  }
  return g;
}

/// Hessian of chi in x coordinates.
inline Eigen::MatrixXd chi_hessian(const WeightedModel& m, const Eigen::VectorXd& x) {
  const int d = m.dim();
  Eigen::MatrixXd H = Eigen::MatrixXd::Zero(d, d);
  for (const auto& [s, w] : m.weights()) {
    double mon = w.get_d();
    for (int i = 0; i < d; ++i) mon *= std::pow(x[i], s[i]);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) {
        const double f = i == j ? s[i] * (s[i] - 1) : s[i] * s[j];
        H(i, j) += f * mon / (x[i] * x[j]);
      }
  }
  return H;
}

inline double chi_value(const WeightedModel& m, const Eigen::VectorXd& x) {
  std::vector<double> p(x.data(), x.data() + x.size());
  return inventory_eval<double>(m, p);
}

struct CriticalPoint {
  Eigen::VectorXd x0;
  double residual = 0;  // |x . grad chi(x)| / chi(x), i.e. the drift after reweighting at x
  int iterations = 0;
};

/// Minimizes log chi(e^u) by damped Newton from u = 0. Strictly convex under H1.
inline CriticalPoint critical_point(const WeightedModel& m, double tol = 1e-12, int max_iter = 100) {
  if (tol <= 0) throw GeometryError("tolerance must be positive");
  const auto table = detail::step_table(m);
  const int d = m.dim();
  auto evaluate = [&](const Eigen::VectorXd& u, Eigen::VectorXd* grad, Eigen::MatrixXd* hess) {
    // log-sum-exp with a shift for stability
    std::vector<double> ex(table.steps.size());
    double shift = -HUGE_VAL;
    for (size_t k = 0; k < ex.size(); ++k) {
      ex[k] = std::log(table.weights[k]) + table.steps[k].dot(u);
      shift = std::max(shift, ex[k]);
    }
    double z = 0;
    for (auto& e : ex) z += (e = std::exp(e - shift));
    if (grad) {
      Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
      for (size_t k = 0; k < ex.size(); ++k) mean += ex[k] / z * table.steps[k];
      *grad = mean;
      if (hess) {
        Eigen::MatrixXd second = Eigen::MatrixXd::Zero(d, d);
        for (size_t k = 0; k < ex.size(); ++k) second += ex[k] / z * table.steps[k] * table.steps[k].transpose();
        *hess = second - mean * mean.transpose();
      }
    }
    return shift + std::log(z);
  };

  Eigen::VectorXd u = Eigen::VectorXd::Zero(d);
  Eigen::VectorXd g;
  Eigen::MatrixXd H;
  double f = evaluate(u, &g, &H);
  int it = 0;
  for (; it < max_iter && g.norm() > tol; ++it) {
    Eigen::LLT<Eigen::MatrixXd> llt(H);
    if (llt.info() != Eigen::Success) throw GeometryError("Hessian not positive definite (H1 fails?)");
    const Eigen::VectorXd step = -llt.solve(g);
    double lambda = 1;
    const double slope = g.dot(step);
    Eigen::VectorXd trial;
    double ft = 0;
    // once the predicted decrease is below the rounding of f, Armijo cannot
    // discriminate; take the full Newton step
    const bool polish = -slope < 1e-13 * std::max(1.0, std::abs(f));
    for (int k = 0; k < 60; ++k) {
      trial = u + lambda * step;
      if (polish) break;
      ft = evaluate(trial, nullptr, nullptr);
      if (ft <= f + 1e-4 * lambda * slope) break;
      lambda /= 2;
    }
    u = trial;
    f = evaluate(u, &g, &H);
  }
  if (g.norm() > tol) throw GeometryError("critical point: no convergence after " + std::to_string(it) + " iterations");
  return {u.array().exp().matrix(), g.norm(), it};
}

// ---------------------------------------------------------------------------

inline Eigen::MatrixXd inv_sqrt(const Eigen::MatrixXd& delta) {
  if ((delta - delta.transpose()).cwiseAbs().maxCoeff() > 1e-12) throw GeometryError("inv_sqrt: matrix not symmetric");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(delta);
  const auto& ev = es.eigenvalues();
  if (ev.minCoeff() <= 0) throw GeometryError("inv_sqrt: matrix not positive definite");
  const Eigen::VectorXd s = ev.array().rsqrt();
  Eigen::MatrixXd r = es.eigenvectors() * s.asDiagonal() * es.eigenvectors().transpose();
  return (r + r.transpose()) / 2;
}

struct CovarianceData {
  Eigen::MatrixXd delta;     // unit diagonal
  Eigen::MatrixXd inv_sqrt;  // Delta^{-1/2}
  [[nodiscard]] double a(int i, int j) const { return delta(i, j); }
};

inline CovarianceData covariance(const WeightedModel& m, const CriticalPoint& cp) {
  const Eigen::MatrixXd H = chi_hessian(m, cp.x0);
  const int d = m.dim();
  for (int i = 0; i < d; ++i)
    if (!(H(i, i) > 0)) throw GeometryError("vanishing second derivative along axis " + std::to_string(i + 1));
  Eigen::MatrixXd delta(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) delta(i, j) = i == j ? 1.0 : H(i, j) / std::sqrt(H(i, i) * H(j, j));
  return {delta, inv_sqrt(delta)};
}

// ---------------------------------------------------------------------------

/// Angle between facets i and j as a fraction of pi: theta = acos(-a_ij)/pi.
struct DihedralOrder {
  double theta = 0;
  std::optional<int> m;             // theta = 1/m, 2 <= m <= qmax
  std::optional<Fraction> rational; // theta = p/q, q <= qmax (diagnostic)
  /// order of r_i r_j when the angle is rational
  [[nodiscard]] std::optional<int> rotation_order() const {
    if (m) return m;
    if (rational) return static_cast<int>(rational->den);
    return std::nullopt;
  }
};

using PairKey = std::pair<int, int>;

inline std::map<PairKey, DihedralOrder> dihedral_orders(const CovarianceData& cov, int qmax = 16, double tol = 1e-9) {
  if (qmax < 2) throw GeometryError("qmax must be >= 2");
  std::map<PairKey, DihedralOrder> out;
  const auto d = static_cast<int>(cov.delta.rows());
  for (int i = 0; i < d; ++i)
    for (int j = i + 1; j < d; ++j) {
      DihedralOrder o;
      const double a = std::clamp(cov.delta(i, j), -1.0, 1.0);
      o.theta = std::acos(-a) / M_PI;
      const int mm = static_cast<int>(std::lround(1.0 / o.theta));
      if (mm >= 2 && mm <= qmax && std::abs(o.theta - 1.0 / mm) <= tol) {
        o.m = mm;
      } else {
        const Fraction f = best_rational(o.theta, qmax);
        if (std::abs(o.theta - f.value()) <= tol) o.rational = f;
      }
      out.emplace(PairKey{i, j}, o);
    }
  return out;
}

struct ReflectionData {
  std::vector<Eigen::VectorXd> normals;  // unit normals of H_i = Delta^{-1/2} G_i
  std::vector<Eigen::MatrixXd> reflections;
  std::map<PairKey, DihedralOrder> orders;
  std::string label = "unrecognized";
  std::optional<int> order;  // |H| when finite within the search bound
};

/// Coxeter label of a rank-3 group from its (unordered) pairwise orders.
inline std::optional<std::pair<std::string, int>> coxeter_label3(std::array<int, 3> t) {
  std::sort(t.begin(), t.end());
  if (t[0] == 2 && t[1] == 2) return std::make_pair("Z2xD" + std::to_string(2 * t[2]), 4 * t[2]);
  if (t[0] == 2 && t[1] == 3 && t[2] == 3) return std::make_pair(std::string("A3"), 24);
  if (t[0] == 2 && t[1] == 3 && t[2] == 4) return std::make_pair(std::string("B3"), 48);
  if (t[0] == 2 && t[1] == 3 && t[2] == 5) return std::make_pair(std::string("H3"), 120);
  return std::nullopt;
}

inline ReflectionData reflection_group(const CovarianceData& cov, const std::map<PairKey, DihedralOrder>& orders,
                                       int bound = 240) {
  ReflectionData rd;
  rd.orders = orders;
  const auto d = static_cast<int>(cov.delta.rows());
  const Eigen::MatrixXd sqrt_delta = cov.inv_sqrt.inverse();
  for (int i = 0; i < d; ++i) {
    Eigen::VectorXd n = sqrt_delta.col(i);
    n.normalize();
    rd.normals.push_back(n);
    rd.reflections.push_back(Eigen::MatrixXd::Identity(d, d) - 2 * n * n.transpose());
  }
  const GroupVerdict v = matrix_group_order(rd.reflections, bound, 1e-8);
  rd.order = v.order;
  if (d == 2) {
    const auto& o = orders.at({0, 1});
    if (auto q = o.rotation_order()) rd.label = "D" + std::to_string(2 * *q);
  } else if (d == 3) {
    std::array<int, 3> t{};
    bool all = true;
    int k = 0;
    for (const auto& key : {PairKey{0, 1}, PairKey{0, 2}, PairKey{1, 2}}) {
      const auto& o = orders.at(key);
      if (!o.m) all = false;
      else t[static_cast<size_t>(k)] = *o.m;
      ++k;
    }
    if (all)
      if (auto lab = coxeter_label3(t)) rd.label = lab->first;
  }
  return rd;
}

// ---------------------------------------------------------------------------

struct WeylCheck {
  bool weyl = false;
  std::array<int, 3> triplet{};  // (m12, m13, m23)
  bool condition1 = false;       // triplet in the finite Coxeter list
  bool condition2 = false;       // a_ij = -cos(pi/m_ij)
  std::array<double, 3> a{};     // (a12, a13, a23)
  std::vector<std::string> reasons;
};

inline bool triplet_in_list(std::array<int, 3> t) {
  std::sort(t.begin(), t.end());
  if (t[0] == 2 && t[1] == 2 && t[2] >= 2) return true;
  if (t[0] == 2 && t[1] == 3 && (t[2] == 3 || t[2] == 4 || t[2] == 5)) return true;
  // (2,2,1) is impossible for distinct involutions; (1,...) never occurs
  return false;
}

/// triplet = (m12, m13, m23) from the exact pair orders.
inline WeylCheck weyl_check(const CovarianceData& cov, std::array<int, 3> triplet, double tol = 1e-9) {
  if (cov.delta.rows() != 3) throw GeometryError("weyl_check requires d = 3");
  WeylCheck w;
  w.triplet = triplet;
  w.a = {cov.delta(0, 1), cov.delta(0, 2), cov.delta(1, 2)};
  w.condition1 = triplet_in_list(triplet);
  if (!w.condition1) w.reasons.emplace_back("condition 1: triplet not in the finite Coxeter list");
  w.condition2 = true;
  const char* names[3] = {"a12", "a13", "a23"};
  for (size_t k = 0; k < 3; ++k) {
    const double target = -std::cos(M_PI / triplet[k]);
    if (std::abs(w.a[k] - target) > tol) {
      w.condition2 = false;
      w.reasons.push_back(std::string("condition 2: ") + names[k] + " != -cos(pi/" + std::to_string(triplet[k]) + ")");
    }
  }
  w.weyl = w.condition1 && w.condition2;
  return w;
}

inline std::array<int, 3> pair_triplet(const WeightedModel& m, const OrbitOptions& opt = {32, 3, 1, 4}) {
  if (m.dim() != 3) throw GeometryError("pair triplet requires d = 3");
  std::array<int, 3> t{};
  const PairKey keys[3] = {{0, 1}, {0, 2}, {1, 2}};
  for (size_t k = 0; k < 3; ++k) {
    const auto v = pair_order(m, keys[k].first, keys[k].second, opt);
    if (!v.finite())
      throw GeometryError("pair order of (" + std::to_string(keys[k].first + 1) + "," +
                          std::to_string(keys[k].second + 1) + ") exceeds bound " + std::to_string(opt.bound));
    t[k] = *v.order;
  }
  return t;
}

inline WeylCheck weyl_check(const WeightedModel& m, std::array<int, 3> triplet, double tol = 1e-9) {
  if (m.dim() != 3) throw GeometryError("weyl_check requires d = 3");
  const auto cp = critical_point(m);
  return weyl_check(covariance(m, cp), triplet, tol);
}

}  // namespace walkgroups
