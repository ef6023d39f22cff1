#pragma once

// Elliptic special functions templated on the real type, so the same code
// runs in double and in MPFR-backed multiprecision.

#include <boost/multiprecision/mpfr.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "walkgroups/rational.hpp"

namespace walkgroups {

class EllipticError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using HighPrecision =
    boost::multiprecision::number<boost::multiprecision::mpfr_float_backend<0>, boost::multiprecision::et_off>;

/// Decimal digits for HighPrecision: WALKGROUPS_PRECISION or 100.
inline unsigned high_precision_digits() {
  if (const char* env = std::getenv("WALKGROUPS_PRECISION")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 20 && v <= 10000) return static_cast<unsigned>(v);
    throw EllipticError(std::string("WALKGROUPS_PRECISION must be an integer in [20, 10000], got '") + env + "'");
  }
  return 100;
}

inline void use_high_precision(unsigned digits) { HighPrecision::default_precision(digits); }

namespace special {

using std::abs;
using std::acos;
using std::asin;
using std::cos;
using std::cosh;
using std::exp;
using std::log;
using std::pow;
using std::sin;
using std::sinh;
using std::sqrt;

template <class Real>
Real eps() {
  return std::numeric_limits<Real>::epsilon();
}

template <class Real>
Real pi() {
  return acos(Real(-1));
}

template <class Real>
Real to_real(const Rational& q) {
  if constexpr (std::is_same_v<Real, double>) {
    return q.get_d();
  } else {
    return Real(q.get_num().get_str()) / Real(q.get_den().get_str());
  }
}

template <class Real>
double to_double(const Real& x) {
  if constexpr (std::is_same_v<Real, double>) return x;
  else return x.template convert_to<double>();
}

/// Carlson's R_F by duplication; at most one argument may vanish.
template <class Real>
Real carlson_rf(Real x, Real y, Real z) {
  if (x < 0 || y < 0 || z < 0) throw EllipticError("carlson_rf: negative argument");
  if ((x == 0) + (y == 0) + (z == 0) > 1) throw EllipticError("carlson_rf: more than one zero argument");
  const Real x0 = x, y0 = y;
  const Real a0 = (x + y + z) / 3;
  Real a = a0;
  const Real q = pow(3 * eps<Real>(), Real(-1) / 6) * std::max({abs(a0 - x), abs(a0 - y), abs(a0 - z)});
  Real scale = 1;
  int n = 0;
  for (; n < 400 && q * scale >= abs(a); ++n) {
    const Real sx = sqrt(x), sy = sqrt(y), sz = sqrt(z);
    const Real lam = sx * sy + sx * sz + sy * sz;
    a = (a + lam) / 4;
    x = (x + lam) / 4;
    y = (y + lam) / 4;
    z = (z + lam) / 4;
    scale /= 4;
  }
  if (n == 400) throw EllipticError("carlson_rf: no convergence");
  const Real X = (a0 - x0) * scale / a;
  const Real Y = (a0 - y0) * scale / a;
  const Real Z = -X - Y;
  const Real e2 = X * Y - Z * Z;
  const Real e3 = X * Y * Z;
  return (1 - e2 / 10 + e3 / 14 + e2 * e2 / 24 - 3 * e2 * e3 / 44) / sqrt(a);
}

template <class Real>
Real agm(Real a, Real b) {
  for (int i = 0; i < 200; ++i) {
    if (abs(a - b) <= 4 * eps<Real>() * abs(a)) return (a + b) / 2;
    const Real an = (a + b) / 2;
    b = sqrt(a * b);
    a = an;
  }
  throw EllipticError("agm: no convergence");
}

/// K(k) from the complementary parameter k'^2 (no cancellation near k = 1).
template <class Real>
Real ellint_k_agm(const Real& kp2) {
  return pi<Real>() / (2 * agm(Real(1), sqrt(kp2)));
}

template <class Real>
Real ellint_k_carlson(const Real& kp2) {
  return carlson_rf(Real(0), kp2, Real(1));
}

/// Incomplete integral over (lo, hi) of 1/sqrt(|c * prod(s - e_i)|), the
/// four roots e sorted and no root strictly inside (lo, hi).
template <class Real>
Real quartic_integral(const std::array<Real, 4>& e, const Real& c, const Real& lo, const Real& hi) {
  if (!(hi > lo)) throw EllipticError("quartic_integral: empty interval");
  std::array<Real, 4> X, Y;
  for (size_t i = 0; i < 4; ++i) {
    if (e[i] > lo && e[i] < hi) throw EllipticError("quartic_integral: root inside the interval");
    // factor (s - e_i) if the root lies at or below the interval, else (e_i - s)
    if (e[i] <= lo) {
      X[i] = sqrt(std::max(Real(hi - e[i]), Real(0)));
      Y[i] = sqrt(std::max(Real(lo - e[i]), Real(0)));
    } else {
      X[i] = sqrt(std::max(Real(e[i] - hi), Real(0)));
      Y[i] = sqrt(std::max(Real(e[i] - lo), Real(0)));
    }
  }
  const Real h = hi - lo;
  const Real u12 = (X[0] * X[1] * Y[2] * Y[3] + Y[0] * Y[1] * X[2] * X[3]) / h;
  const Real u13 = (X[0] * X[2] * Y[1] * Y[3] + Y[0] * Y[2] * X[1] * X[3]) / h;
  const Real u14 = (X[0] * X[3] * Y[1] * Y[2] + Y[0] * Y[3] * X[1] * X[2]) / h;
  return 2 * carlson_rf(Real(u12 * u12), Real(u13 * u13), Real(u14 * u14)) / sqrt(abs(c));
}

/// sn and cn by the descending AGM sequence; k^2 and k'^2 are passed separately.
template <class Real>
std::pair<Real, Real> jacobi_sn_cn(const Real& u, const Real& k2, const Real& kp2) {
  std::vector<Real> a{Real(1)}, c{sqrt(k2)};
  Real b = sqrt(kp2);
  while (abs(c.back()) > 4 * eps<Real>() && a.size() < 200) {
    const Real an = (a.back() + b) / 2;
    const Real cn = (a.back() - b) / 2;
    b = sqrt(a.back() * b);
    a.push_back(an);
    c.push_back(cn);
  }
  const size_t n = a.size() - 1;
  Real phi = pow(Real(2), static_cast<int>(n)) * a[n] * u;
  for (size_t j = n; j >= 1; --j) phi = (phi + asin(c[j] * sin(phi) / a[j])) / 2;
  return {sin(phi), cos(phi)};
}

// ---------------------------------------------------------------------------
// Theta functions (nome convention q = exp(i pi tau)).

/// theta_kind(z | q) for real z; N = 0 sums until the terms drop below eps.
template <class Real>
Real theta(int kind, const Real& z, const Real& q, int N = 0) {
  if (kind < 1 || kind > 4) throw EllipticError("theta: kind must be 1..4");
  if (!(q >= 0 && q < 1)) throw EllipticError("theta: nome must lie in [0, 1)");
  if (q == 0) return kind == 3 || kind == 4 ? Real(1) : Real(0);
  const Real lq = log(q);
  const int nmax = N > 0 ? N : 100000;
  Real sum = 0;
  if (kind <= 2) {
    for (int n = 0; n <= nmax; ++n) {
      const Real h = Real(n) + Real(1) / 2;
      const Real w = exp(lq * h * h);
      const Real term = kind == 1 ? Real((n % 2 ? -1 : 1) * w * sin((2 * n + 1) * z)) : Real(w * cos((2 * n + 1) * z));
      sum += term;
      if (N == 0 && w < eps<Real>() * (abs(sum) + eps<Real>())) break;
    }
    return 2 * sum;
  }
  for (int n = 1; n <= nmax; ++n) {
    const Real w = exp(lq * n * n);
    sum += (kind == 4 && n % 2 ? -1 : 1) * w * cos(2 * n * z);
    if (N == 0 && w < eps<Real>()) break;
  }
  return 1 + 2 * sum;
}

/// theta at the purely imaginary argument z = i y; theta_1 is returned
/// divided by i so that every value is real.
template <class Real>
Real theta_imag(int kind, const Real& y, const Real& q) {
  if (kind < 1 || kind > 4) throw EllipticError("theta: kind must be 1..4");
  if (!(q > 0 && q < 1)) throw EllipticError("theta: nome must lie in (0, 1)");
  const Real lq = log(q);
  Real sum = 0;
  if (kind <= 2) {
    for (int n = 0; n < 100000; ++n) {
      const Real h = Real(n) + Real(1) / 2;
      const Real arg = (2 * n + 1) * y;
      const Real w = exp(lq * h * h);
      const Real term = kind == 1 ? Real((n % 2 ? -1 : 1) * w * sinh(arg)) : Real(w * cosh(arg));
      sum += term;
      if (abs(term) < eps<Real>() * abs(sum) && -lq * h > y) break;  // past the peak and negligible
    }
    return 2 * sum;
  }
  for (int n = 1; n < 100000; ++n) {
    const Real term = (kind == 4 && n % 2 ? -1 : 1) * exp(lq * n * n) * cosh(2 * n * y);
    sum += term;
    if (abs(term) < eps<Real>() * (1 + abs(sum)) && -lq * n > y) break;
  }
  return 1 + 2 * sum;
}

// ---------------------------------------------------------------------------
// Real roots of a quartic.

template <class Real>
Real poly_eval(const std::array<Real, 5>& c, const Real& x) {
  Real v = c[4];
  for (int i = 3; i >= 0; --i) v = v * x + c[static_cast<size_t>(i)];
  return v;
}

namespace detail {

using RPoly = std::vector<Rational>;  // low -> high, no trailing zeros

inline void trim(RPoly& p) {
  while (!p.empty() && p.back() == 0) p.pop_back();
}

inline Rational eval(const RPoly& p, const Rational& x) {
  Rational v = 0;
  for (auto it = p.rbegin(); it != p.rend(); ++it) v = v * x + *it;
  return v;
}

inline RPoly remainder(RPoly a, const RPoly& b) {
  while (a.size() >= b.size() && !a.empty()) {
    const Rational f = a.back() / b.back();
    const size_t shift = a.size() - b.size();
    for (size_t i = 0; i < b.size(); ++i) a[shift + i] -= f * b[i];
    a.pop_back();
    trim(a);
  }
  return a;
}

inline std::vector<RPoly> sturm_chain(const RPoly& p) {
  std::vector<RPoly> chain{p};
  RPoly d;
  for (size_t i = 1; i < p.size(); ++i) d.push_back(p[i] * static_cast<int>(i));
  trim(d);
  chain.push_back(d);
  while (chain.back().size() > 1) {
    RPoly r = remainder(chain[chain.size() - 2], chain.back());
    if (r.empty()) break;
    for (auto& c : r) c = -c;
    chain.push_back(std::move(r));
  }
  return chain;
}

inline int sign_changes(const std::vector<RPoly>& chain, const Rational& x) {
  int changes = 0, last = 0;
  for (const auto& p : chain) {
    const int s = sgn(eval(p, x));
    if (s == 0) continue;
    if (last != 0 && s != last) ++changes;
    last = s;
  }
  return changes;
}

}  // namespace detail

/// Four simple real roots of an exact quartic, sorted. Roots are isolated
/// with a Sturm sequence in exact arithmetic and refined in Real by
/// safeguarded Newton inside the isolating intervals.
template <class Real>
std::array<Real, 4> quartic_real_roots(const std::array<Rational, 5>& c, double* residual = nullptr) {
  detail::RPoly p(c.begin(), c.end());
  detail::trim(p);
  if (p.size() != 5) throw EllipticError("quartic has degree < 4");
  const auto chain = detail::sturm_chain(p);
  if (chain.back().size() > 1) throw EllipticError("branch-point collision (repeated root)");
  Rational bound = 1;  // Cauchy bound
  for (size_t i = 0; i < 4; ++i) bound = std::max(bound, Rational(1 + abs(p[i] / p[4])));
  if (detail::sign_changes(chain, -bound) - detail::sign_changes(chain, bound) != 4)
    throw EllipticError("complex branch points");
  std::vector<std::pair<Rational, Rational>> isolated;
  std::vector<std::pair<Rational, Rational>> work{{-bound, bound}};
  int guard = 0;
  while (!work.empty()) {
    if (++guard > 20000) throw EllipticError("branch-point collision (isolation did not terminate)");
    auto [a, b] = work.back();
    work.pop_back();
    const int n = detail::sign_changes(chain, a) - detail::sign_changes(chain, b);
    if (n == 0) continue;
    if (n == 1) {
      isolated.emplace_back(a, b);
      continue;
    }
    Rational mid = (a + b) / 2;
    work.emplace_back(mid, b);
    work.emplace_back(a, mid);
  }
  std::sort(isolated.begin(), isolated.end());
  std::array<Real, 5> cr;
  for (size_t i = 0; i < 5; ++i) cr[i] = to_real<Real>(c[i]);
  std::array<Real, 5> dc{};
  for (size_t i = 1; i < 5; ++i) dc[i - 1] = cr[i] * static_cast<int>(i);
  std::array<Real, 4> roots;
  double worst = 0;
  for (size_t k = 0; k < 4; ++k) {
    // root in (a, b]; shrink until P(a) P(b) < 0 in exact arithmetic
    auto [a, b] = isolated[k];
    if (detail::eval(p, b) == 0) {
      roots[k] = to_real<Real>(b);
      continue;
    }
    Real lo = to_real<Real>(a), hi = to_real<Real>(b);
    if (detail::eval(p, a) > 0) std::swap(lo, hi);  // now P(lo) < 0 < P(hi)
    Real x = (lo + hi) / 2;
    for (int it = 0; it < 4000; ++it) {
      const Real f = poly_eval(cr, x);
      if (f == 0) break;
      if (f < 0) lo = x;
      else hi = x;
      const Real df = poly_eval(dc, x);
      Real next = df != 0 ? Real(x - f / df) : Real((lo + hi) / 2);
      const Real l = lo < hi ? lo : hi, u = lo < hi ? hi : lo;
      if (!(next > l && next < u)) next = (lo + hi) / 2;
      const Real step = abs(next - x);
      x = next;
      if (step <= 2 * eps<Real>() * abs(x) || abs(hi - lo) <= 2 * eps<Real>() * abs(x)) break;
    }
    roots[k] = x;
    Real mag = 0, xp = 1;
    for (size_t i = 0; i < 5; ++i, xp *= abs(x)) mag += abs(cr[i]) * xp;
    worst = std::max(worst, to_double(Real(abs(poly_eval(cr, x)) / mag)));
  }
  for (size_t k = 0; k + 1 < 4; ++k)
    if (!(roots[k + 1] > roots[k])) throw EllipticError("branch-point collision at working precision");
  if (residual) *residual = worst;
  return roots;
}

}  // namespace special
}  // namespace walkgroups
