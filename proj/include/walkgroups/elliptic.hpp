#pragma once

// Kernel curve of a 2D model, its periods and the ratio r(t) = w3/w2,
// rationality probes, the small-t limit r0, theta identities and the
// order-10 residual.
//
// All period integrals are taken in the coordinate u = 1/(x - 1), where the
// discriminant becomes a genuine quartic P(u) = u^4 D(1 + 1/u) with four
// finite real roots e1 < e2 < e3 < e4 and P > 0 on (e2, e3).

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "walkgroups/model.hpp"
#include "walkgroups/special.hpp"

namespace walkgroups {

using Quadratic = std::array<Rational, 3>;  // coefficients low -> high
using Quartic = std::array<Rational, 5>;

namespace detail {

inline Quartic times(const Quadratic& a, const Quadratic& b) {
  Quartic r{0, 0, 0, 0, 0};
  for (size_t i = 0; i < 3; ++i)
    for (size_t j = 0; j < 3; ++j) r[i + j] += a[i] * b[j];
  return r;
}

/// v^4 p(1 + 1/v), i.e. sum_i p_i v^(4-i) (v+1)^i.
inline Quartic mobius4(const Quartic& p) {
  static const int binom[5][5] = {{1}, {1, 1}, {1, 2, 1}, {1, 3, 3, 1}, {1, 4, 6, 4, 1}};
  Quartic r{0, 0, 0, 0, 0};
  for (size_t i = 0; i < 5; ++i)
    for (size_t k = 0; k <= i; ++k) r[4 - i + k] += p[i] * binom[i][k];
  return r;
}

inline Quadratic mobius2(const Quadratic& p) {
  static const int binom[3][3] = {{1}, {1, 1}, {1, 2, 1}};
  Quadratic r{0, 0, 0};
  for (size_t i = 0; i < 3; ++i)
    for (size_t k = 0; k <= i; ++k) r[2 - i + k] += p[i] * binom[i][k];
  return r;
}

/// y-quadratic coefficients of x y (1 - t chi) as polynomials in x.
inline std::array<Quadratic, 3> y_quadratic(const WeightedModel& m, const Rational& t) {
  Quadratic a{0, 0, 0}, b{0, 0, 0}, c{0, 0, 0};
  for (const auto& [s, w] : m.weights()) {
    auto& slot = s[1] == 1 ? a : s[1] == 0 ? b : c;
    slot[static_cast<size_t>(s[0] + 1)] -= t * w;
  }
  b[1] += 1;
  return {a, b, c};
}

inline Quartic discriminant(const std::array<Quadratic, 3>& q) {
  Quartic b2 = times(q[1], q[1]);
  Quartic ac = times(q[0], q[2]);
  for (size_t i = 0; i < 5; ++i) b2[i] -= 4 * ac[i];
  return b2;
}

template <class Real, size_t N>
std::array<Real, N> to_real_array(const std::array<Rational, N>& a) {
  std::array<Real, N> r;
  for (size_t i = 0; i < N; ++i) r[i] = special::to_real<Real>(a[i]);
  return r;
}

}  // namespace detail

template <class Real = double>
struct KernelCurve {
  Rational t;
  WeightedModel model;                 // normalized
  std::array<Quadratic, 3> xside;      // alpha(x), beta(x), gamma(x)
  std::array<Quadratic, 3> yside;      // alpha~(y), beta~(y), gamma~(y)
  Quartic D, E;                        // discriminants in x and in y
  Quartic P, Q;                        // Moebius transforms u^4 D(1+1/u), v^4 E(1+1/v)
  std::array<Real, 4> e;               // sorted roots of P
  std::array<Real, 4> f;               // sorted roots of Q
  double root_residual = 0;

  /// Branch points x_i = 1 + 1/e_i, sorted ascending; +inf when e_i = 0.
  [[nodiscard]] std::array<Real, 4> branch_x() const { return to_plane(e); }
  [[nodiscard]] std::array<Real, 4> branch_y() const { return to_plane(f); }

 private:
  static std::array<Real, 4> to_plane(const std::array<Real, 4>& r) {
    std::array<Real, 4> x;
    for (size_t i = 0; i < 4; ++i) x[i] = r[i] == 0 ? std::numeric_limits<Real>::infinity() : Real(1 + 1 / r[i]);
    std::sort(x.begin(), x.end());
    return x;
  }
};

template <class Real = double>
KernelCurve<Real> kernel_curve(const WeightedModel& model, const Rational& t) {
  if (model.dim() != 2) throw EllipticError("kernel curve requires d = 2");
  if (!(t > 0 && t < 1)) throw EllipticError("t must lie in (0, 1)");
  const auto h1 = check_h1(model);
  if (!h1.satisfied) throw EllipticError("H1 fails: no genus-1 kernel curve");
  KernelCurve<Real> c;
  c.t = t;
  c.model = normalize(model);
  c.xside = detail::y_quadratic(c.model, t);
  c.yside = detail::y_quadratic(permute_coordinates(c.model, {1, 0}), t);
  c.D = detail::discriminant(c.xside);
  c.E = detail::discriminant(c.yside);
  c.P = detail::mobius4(c.D);
  c.Q = detail::mobius4(c.E);
  if (c.P[4] <= 0 || c.Q[4] <= 0) throw EllipticError("discriminant not positive at 1: t outside the genus-1 regime");
  double r1 = 0, r2 = 0;
  c.e = special::quartic_real_roots<Real>(c.P, &r1);
  c.f = special::quartic_real_roots<Real>(c.Q, &r2);
  c.root_residual = std::max(r1, r2);
  return c;
}

template <class Real = double>
struct EllipticInvariants {
  Real k2, kp2;        // modulus squared and its complement, both from cross-ratios
  Real K, Kp;          // K(k), K(k') by AGM
  Real alpha;          // w2 = alpha K(k)
  Real omega1;         // imaginary part of the first period
  Real omega2, omega3;
  Real r;              // folded into (0, 1/2]
  Real r_raw;          // w3 / w2 before folding
  Real w;              // sn(r K, k)
  Real one_minus_w2;   // cn(r K, k)^2
  Real nome;           // exp(-pi K / K')
  Real tau;            // imaginary part of tau = i K / K'
  int y_branch = 0;    // index of the y-branch point used for w3
};

template <class Real>
Real quadratic_eval(const Quadratic& q, const Real& v) {
  return special::to_real<Real>(q[0]) + v * (special::to_real<Real>(q[1]) + v * special::to_real<Real>(q[2]));
}

template <class Real = double>
EllipticInvariants<Real> periods(const KernelCurve<Real>& c) {
  using special::sqrt;
  const auto& e = c.e;
  const Real lead = special::to_real<Real>(c.P[4]);
  EllipticInvariants<Real> inv;
  inv.omega2 = special::quartic_integral(e, lead, e[1], e[2]);
  inv.omega1 = special::quartic_integral(e, lead, e[0], e[1]);
  const Real den = (e[3] - e[1]) * (e[2] - e[0]);
  inv.k2 = (e[2] - e[1]) * (e[3] - e[0]) / den;
  inv.kp2 = (e[1] - e[0]) * (e[3] - e[2]) / den;
  inv.alpha = 2 / sqrt(lead * den);
  inv.K = special::ellint_k_agm(inv.kp2);
  inv.Kp = special::ellint_k_agm(inv.k2);

  // w3: from the start of a real oval to the double root X(y1). The curve has
  // two real ovals, (e2, e3) and (e4, +inf) u (-inf, e1), with equal half periods.
  const Quadratic ah = detail::mobius2(c.yside[0]);
  const Quadratic bh = detail::mobius2(c.yside[1]);
  bool found = false;
  for (int idx : {0, 3}) {
    const Real v = c.f[static_cast<size_t>(idx)];
    const Real a = quadratic_eval(ah, v), b = quadratic_eval(bh, v);
    const Real denom = -b - 2 * a;
    if (denom == 0) continue;
    const Real ux = 2 * a / denom;
    if (ux > e[1] && ux < e[2]) inv.omega3 = special::quartic_integral(e, lead, e[1], ux);
    else if (ux > e[3]) inv.omega3 = special::quartic_integral(e, lead, e[3], ux);
    else if (ux < e[0]) inv.omega3 = inv.omega2 - special::quartic_integral(e, lead, ux, e[0]);
    else continue;
    inv.y_branch = idx;
    found = true;
    break;
  }
  if (!found) throw EllipticError("X(y1) outside the expected real segment");
  inv.r_raw = inv.omega3 / inv.omega2;
  inv.r = inv.r_raw <= Real(1) / 2 ? inv.r_raw : Real(1 - inv.r_raw);
  const auto [sn, cn] = special::jacobi_sn_cn(Real(inv.r * inv.K), inv.k2, inv.kp2);
  inv.w = sn;
  inv.one_minus_w2 = cn * cn;
  inv.tau = inv.K / inv.Kp;
  using special::exp;
  inv.nome = exp(-special::pi<Real>() * inv.tau);
  return inv;
}

inline double r_of_t(const WeightedModel& m, const Rational& t) { return periods(kernel_curve<double>(m, t)).r; }

// Clustered branch points lose digits in double; recompute in mpfr.
inline double r_of_t_high_precision(const WeightedModel& m, const Rational& t) {
  use_high_precision(high_precision_digits());
  return special::to_double(periods(kernel_curve<HighPrecision>(m, t)).r);
}

// ---------------------------------------------------------------------------

struct RationalityVerdict {
  bool rational = false;
  Fraction value;                 // meaningful when rational
  std::vector<Rational> t;
  std::vector<double> r;
  std::vector<Fraction> approximations;
  double spread = 0;              // max r - min r
  [[nodiscard]] std::optional<int> predicted_order() const {
    if (!rational) return std::nullopt;
    return static_cast<int>(2 * value.den);
  }
};

inline std::vector<Rational> default_t_samples() { return {Rational(1, 20), Rational(1, 10), Rational(1, 5)}; }

inline RationalityVerdict rationality_probe(const WeightedModel& m, const std::vector<Rational>& ts = default_t_samples(),
                                            int qmax = 16, double tol = 1e-9) {
  if (ts.size() < 3) throw EllipticError("rationality probe needs at least 3 t samples");
  if (qmax < 2) throw EllipticError("qmax must be >= 2");
  RationalityVerdict v;
  v.t = ts;
  bool agree = true;
  for (const auto& t : ts) {
    if (!(t > 0 && t <= Rational(1, 4))) throw EllipticError("t samples must lie in (0, 1/4]");
    double r = r_of_t(m, t);
    Fraction f = best_rational(r, qmax);
    if (std::abs(r - f.value()) > tol) {
      r = r_of_t_high_precision(m, t);
      f = best_rational(r, qmax);
    }
    v.r.push_back(r);
    v.approximations.push_back(f);
    if (std::abs(r - f.value()) > tol || !(f == v.approximations.front())) agree = false;
  }
  const auto [lo, hi] = std::minmax_element(v.r.begin(), v.r.end());
  v.spread = *hi - *lo;
  v.rational = agree;
  if (agree) v.value = v.approximations.front();
  return v;
}

// ---------------------------------------------------------------------------

inline const std::vector<Fraction>& r0_candidates() {
  static const std::vector<Fraction> list = {{1, 2}, {1, 3}, {1, 4}, {2, 3}, {2, 5}, {2, 7}, {3, 4},
                                             {3, 5}, {3, 7}, {3, 8}, {4, 7}, {5, 7}, {5, 8}};
  return list;
}

struct R0Estimate {
  double estimate = 0;
  Fraction nearest;
  double distance = 0;
  std::vector<Rational> t;
  std::vector<double> ratios;      // log(1 - w^2) / log(1 - k^2) per sample
  bool high_precision = false;
  unsigned digits = 0;
};

template <class Real>
R0Estimate estimate_r0_impl(const WeightedModel& m, const std::vector<Rational>& ts) {
  using special::log;
  R0Estimate est;
  est.t = ts;
  std::vector<Real> N, L;
  for (const auto& t : ts) {
    const auto inv = periods(kernel_curve<Real>(m, t));
    if (!(inv.kp2 > 0) || !(inv.one_minus_w2 > 0)) throw EllipticError("1 - k^2 underflow: escalate precision");
    N.push_back(log(inv.one_minus_w2));
    L.push_back(log(inv.kp2));
    est.ratios.push_back(special::to_double(Real(N.back() / L.back())));
  }
  const size_t n = ts.size();
  // N = r L + c + O(k'^(2r)) for r <= 1/2: the two-point slope removes c; with a
  // third sample the leading correction is fitted as well.
  Real r = (N[n - 2] - N[n - 1]) / (L[n - 2] - L[n - 1]);
  if (n >= 3 && r > 0 && r < 1) {
    using special::exp;
    const Real p = r;
    Eigen::Matrix<Real, 3, 3> A;
    Eigen::Matrix<Real, 3, 1> b;
    for (int i = 0; i < 3; ++i) {
      const size_t j = n - 3 + static_cast<size_t>(i);
      A(i, 0) = L[j];
      A(i, 1) = 1;
      A(i, 2) = exp(p * L[j]);
      b(i) = N[j];
    }
    r = A.fullPivLu().solve(b)(0);
  }
  est.estimate = special::to_double(r);
  double best = HUGE_VAL;
  for (const auto& f : r0_candidates()) {
    const double d = std::abs(est.estimate - f.value());
    if (d < best) {
      best = d;
      est.nearest = f;
    }
  }
  est.distance = best;
  return est;
}

/// Two-point extrapolation of log(1 - w^2)/log(1 - k^2) toward t = 0.
/// Multiprecision is used when the smallest t is <= 1e-4 or when forced.
inline R0Estimate estimate_r0(const WeightedModel& m,
                              const std::vector<Rational>& ts = {Rational(1, 100), Rational(1, 1000),
                                                                 Rational(1, 10000)},
                              std::optional<bool> high_precision = std::nullopt) {
  if (ts.size() < 2) throw EllipticError("estimate_r0 needs at least 2 t samples");
  for (size_t i = 0; i < ts.size(); ++i) {
    if (!(ts[i] > 0 && ts[i] < 1)) throw EllipticError("t samples must lie in (0, 1)");
    if (i > 0 && !(ts[i] < ts[i - 1])) throw EllipticError("t samples must be strictly decreasing");
  }
  const bool hp = high_precision.value_or(ts.back() <= Rational(1, 10000) ||
                                          std::getenv("WALKGROUPS_PRECISION") != nullptr);
  if (!hp) {
    try {
      return estimate_r0_impl<double>(m, ts);
    } catch (const EllipticError&) {
      if (high_precision.has_value()) throw;
    }
  }
  const unsigned digits = high_precision_digits();
  use_high_precision(digits);
  auto est = estimate_r0_impl<HighPrecision>(m, ts);
  est.high_precision = true;
  est.digits = digits;
  return est;
}

// ---------------------------------------------------------------------------

inline double theta(int kind, double z, double q, int N = 0) { return special::theta(kind, z, q, N); }

struct ThetaCheck {
  double k2_residual = 0;
  double w2_residual = 0;
  std::string convention;  // "standard" (q = exp(-pi K'/K)) or "complementary" (q = exp(-pi K/K'))
};

/// Checks k^2 = th4^4/th3^4 and w^2 = -th3^2 th1(z)^2 / (th4^2 th2(z)^2) with
/// z = pi r tau / 2, trying the standard nome first.
template <class Real = double>
ThetaCheck verify_theta_identities(const EllipticInvariants<Real>& inv, double tol = 1e-8) {
  using special::abs;
  using special::exp;
  const Real pi = special::pi<Real>();
  ThetaCheck best;
  best.k2_residual = HUGE_VAL;
  for (const bool complementary : {false, true}) {
    const Real tau = complementary ? Real(inv.K / inv.Kp) : Real(inv.Kp / inv.K);
    const Real q = exp(-pi * tau);
    const Real t3 = special::theta(3, Real(0), q), t4 = special::theta(4, Real(0), q);
    const Real k2 = t4 * t4 * t4 * t4 / (t3 * t3 * t3 * t3);
    ThetaCheck c;
    c.convention = complementary ? "complementary" : "standard";
    c.k2_residual = special::to_double(Real(abs(inv.k2 - k2)));
    const Real y = pi * inv.r * tau / 2;  // z = i y
    const Real s1 = special::theta_imag(1, y, q), s2 = special::theta_imag(2, y, q);
    // th1(iy)^2 = -s1^2, so the leading minus sign cancels
    const Real w2 = t3 * t3 * s1 * s1 / (t4 * t4 * s2 * s2);
    c.w2_residual = special::to_double(Real(abs(inv.w * inv.w - w2)));
    if (c.k2_residual <= tol) return c;
    if (c.k2_residual < best.k2_residual) best = c;
  }
  throw EllipticError("no nome convention satisfies the k^2 theta identity (best residual " +
                      std::to_string(best.k2_residual) + ")");
}

inline ThetaCheck verify_theta_identities(const WeightedModel& m, const Rational& t, double tol = 1e-8) {
  return verify_theta_identities(periods(kernel_curve<double>(m, t)), tol);
}

// ---------------------------------------------------------------------------
// Order-10 residual. In terms of y = w^2 - 1 and kappa = k^2 - 1 it reads
//   (385 W^3 - 1415 W^2 + 1835 W - 869)/y^3 + 32 kappa (8W - 13)/y^4 - 256 kappa^2/y^8.

template <class Real>
Real order10_residual_deficits(const Real& y, const Real& kappa) {
  if (y == 0) throw EllipticError("order10_residual: pole at w^2 = 1");
  const Real y2 = y * y, y4 = y2 * y2;
  const Real num = -64 + y * (160 + y * (-260 + 385 * y));  // 385W^3 - 1415W^2 + 1835W - 869 at W = 1 + y
  return num / (y2 * y) + 32 * kappa * (8 * y - 5) / y4 - 256 * kappa * kappa / (y4 * y4);
}

inline double order10_residual(double w, double k2) { return order10_residual_deficits(w * w - 1, k2 - 1); }

/// Residual at t computed from cn^2 and k'^2 directly, in multiprecision.
inline double order10_residual_at(const WeightedModel& m, const Rational& t) {
  use_high_precision(high_precision_digits());
  const auto inv = periods(kernel_curve<HighPrecision>(m, t));
  return special::to_double(order10_residual_deficits<HighPrecision>(-inv.one_minus_w2, -inv.kp2));
}

}  // namespace walkgroups
