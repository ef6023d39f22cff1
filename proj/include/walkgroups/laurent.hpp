#pragma once

// Sparse Laurent polynomials in d variables with exact coefficients.

#include <map>
#include <span>
#include <string>
#include <vector>

#include "walkgroups/rational.hpp"

namespace walkgroups {

class LaurentPoly {
 public:
  using Exponent = std::vector<int>;

  LaurentPoly() = default;
  explicit LaurentPoly(int nvars) : nvars_(nvars) {}

  void add_term(const Exponent& e, const Rational& c) {
    if (c == 0) return;
    auto& slot = terms_[e];
    slot += c;
    if (slot == 0) terms_.erase(e);
  }

  [[nodiscard]] int nvars() const { return nvars_; }
  [[nodiscard]] bool is_zero() const { return terms_.empty(); }
  [[nodiscard]] const std::map<Exponent, Rational>& terms() const { return terms_; }

  /// Exact or floating evaluation; zero coordinates with negative
  /// exponents are the caller's problem (division by zero).
  template <class T>
  [[nodiscard]] T eval(std::span<const T> x) const {
    T sum = 0;
    for (const auto& [e, c] : terms_) {
      T mon;
      if constexpr (std::is_same_v<T, Rational>) mon = c;
      else mon = static_cast<T>(c.get_d());
      for (size_t i = 0; i < e.size(); ++i) {
        int k = e[i];
        if (k > 0)
          for (int j = 0; j < k; ++j) mon *= x[i];
        else
          for (int j = 0; j < -k; ++j) mon /= x[i];
      }
      sum += mon;
    }
    return sum;
  }

  [[nodiscard]] LaurentPoly derivative(int var) const {
    LaurentPoly d(nvars_);
    for (const auto& [e, c] : terms_) {
      const int k = e[static_cast<size_t>(var)];
      if (k == 0) continue;
      Exponent e2 = e;
      e2[static_cast<size_t>(var)] -= 1;
      d.add_term(e2, c * k);
    }
    return d;
  }

  [[nodiscard]] std::string str() const {
    if (terms_.empty()) return "0";
    std::string s;
    for (const auto& [e, c] : terms_) {
      if (!s.empty()) s += " + ";
      s += to_string(c);
      for (size_t i = 0; i < e.size(); ++i) {
        if (e[i] == 0) continue;
        s += "*x" + std::to_string(i + 1);
        if (e[i] != 1) s += "^" + std::to_string(e[i]);
      }
    }
    return s;
  }

 private:
  int nvars_ = 0;
  std::map<Exponent, Rational> terms_;
};

}  // namespace walkgroups
