#pragma once

// Exact rational helpers shared by every module.

#include <gmpxx.h>

#include <cctype>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>

namespace walkgroups {

using Rational = mpq_class;
using Integer = mpz_class;

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Parses "p", "p/q" or "-p/q". Decimal points are rejected.
inline Rational parse_rational(std::string_view text) {
  std::string s(text);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.pop_back();
  size_t start = 0;
  while (start < s.size() && std::isspace(static_cast<unsigned char>(s[start]))) ++start;
  s = s.substr(start);
  if (s.empty()) throw ParseError("empty rational");
  for (char c : s) {
    if (!(std::isdigit(static_cast<unsigned char>(c)) || c == '/' || c == '-' || c == '+'))
      throw ParseError("not a rational string: '" + s + "'");
  }
  if (s.front() == '+') s = s.substr(1);
  Rational r;
  if (r.set_str(s, 10) != 0) throw ParseError("not a rational string: '" + s + "'");
  if (r.get_den() == 0) throw ParseError("zero denominator: '" + s + "'");
  r.canonicalize();
  return r;
}

/// Like parse_rational but also accepts finite decimals ("3.5" -> 7/2).
inline Rational parse_decimal(std::string_view text) {
  std::string s(text);
  auto dot = s.find('.');
  if (dot == std::string::npos) return parse_rational(s);
  std::string intpart = s.substr(0, dot);
  std::string frac = s.substr(dot + 1);
  bool neg = !intpart.empty() && intpart[0] == '-';
  if (neg) intpart = intpart.substr(1);
  if (intpart.empty()) intpart = "0";
  for (char c : intpart + frac)
    if (!std::isdigit(static_cast<unsigned char>(c))) throw ParseError("not a decimal: '" + s + "'");
  Integer num(intpart + frac, 10);
  Integer den;
  mpz_ui_pow_ui(den.get_mpz_t(), 10, frac.size());
  Rational r(num, den);
  r.canonicalize();
  return neg ? Rational(-r) : r;
}

inline std::string to_string(const Rational& r) {
  if (r.get_den() == 1) return r.get_num().get_str();
  return r.get_num().get_str() + "/" + r.get_den().get_str();
}

/// x^e for small integer e (negative allowed, x nonzero).
inline Rational pow_int(const Rational& x, int e) {
  Rational result = 1;
  Rational base = e < 0 ? Rational(1 / x) : x;
  for (int k = 0; k < std::abs(e); ++k) result *= base;
  return result;
}

/// Uniform draw from {p/q : 1 <= p,q <= max}.
template <class Rng>
Rational random_positive_rational(Rng& rng, int max = 50) {
  std::uniform_int_distribution<int> dist(1, max);
  Rational r(dist(rng), dist(rng));
  r.canonicalize();
  return r;
}

struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  [[nodiscard]] double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

inline std::string to_string(const Fraction& f) {
  return std::to_string(f.num) + "/" + std::to_string(f.den);
}

/// Best rational approximation of x with denominator <= max_den, from the
/// continued fraction expansion including semiconvergents.
inline Fraction best_rational(double x, std::int64_t max_den) {
  if (max_den < 1) throw std::invalid_argument("best_rational: max_den < 1");
  const bool neg = x < 0;
  long double y = std::fabs(static_cast<long double>(x));
  std::int64_t p0 = 0, q0 = 1, p1 = 1, q1 = 0;
  Fraction best{static_cast<std::int64_t>(std::llround(static_cast<double>(y))), 1};
  long double best_err = std::fabs(y - best.num);
  long double rem = y;
  for (int iter = 0; iter < 64; ++iter) {
    const long double a_ld = std::floor(rem);
    if (a_ld > 1e15L) break;
    const auto a = static_cast<std::int64_t>(a_ld);
    std::int64_t p2 = a * p1 + p0;
    std::int64_t q2 = a * q1 + q0;
    if (q2 > max_den) {
      // largest semiconvergent that still fits
      const std::int64_t k = (max_den - q0) / q1;
      if (k > 0) {
        const std::int64_t ps = k * p1 + p0, qs = k * q1 + q0;
        const long double err = std::fabs(y - static_cast<long double>(ps) / qs);
        if (err < best_err) {
          best = {ps, qs};
          best_err = err;
        }
      }
      break;
    }
    const long double err = std::fabs(y - static_cast<long double>(p2) / q2);
    if (err < best_err || (err == best_err && q2 < best.den)) {
      best = {p2, q2};
      best_err = err;
    }
    p0 = p1;
    q0 = q1;
    p1 = p2;
    q1 = q2;
    const long double frac = rem - a_ld;
    if (frac < 1e-18L) break;
    rem = 1.0L / frac;
  }
  if (neg) best.num = -best.num;
  return best;
}

}  // namespace walkgroups
