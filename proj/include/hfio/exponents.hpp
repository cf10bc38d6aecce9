#pragma once

#include <cstdint>
#include <numeric>
#include <ostream>
#include <string>

#include "hfio/errors.hpp"

namespace hfio {

/// Exact rational number with normalized sign and reduced terms.
class Rational {
public:
  constexpr Rational(std::int64_t num = 0, std::int64_t den = 1) : num_(num), den_(den) {
    if (den_ == 0) throw DomainError("Rational: zero denominator");
    normalize();
  }
  constexpr std::int64_t num() const { return num_; }
  constexpr std::int64_t den() const { return den_; }
  double value() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  friend constexpr Rational operator+(Rational a, Rational b) { return {a.num_ * b.den_ + b.num_ * a.den_, a.den_ * b.den_}; }
  friend constexpr Rational operator-(Rational a, Rational b) { return {a.num_ * b.den_ - b.num_ * a.den_, a.den_ * b.den_}; }
  friend constexpr Rational operator*(Rational a, Rational b) { return {a.num_ * b.num_, a.den_ * b.den_}; }
  friend constexpr Rational operator/(Rational a, Rational b) { return {a.num_ * b.den_, a.den_ * b.num_}; }
  friend constexpr bool operator==(Rational a, Rational b) { return a.num_ == b.num_ && a.den_ == b.den_; }
  friend constexpr bool operator<(Rational a, Rational b) { return a.num_ * b.den_ < b.num_ * a.den_; }
  friend constexpr bool operator<=(Rational a, Rational b) { return !(b < a); }
  friend constexpr bool operator>(Rational a, Rational b) { return b < a; }
  friend constexpr bool operator>=(Rational a, Rational b) { return !(a < b); }
  friend constexpr Rational abs(Rational a) { return a.num_ < 0 ? Rational(-a.num_, a.den_) : a; }

  std::string str() const { return den_ == 1 ? std::to_string(num_) : std::to_string(num_) + "/" + std::to_string(den_); }
  friend std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.str(); }

private:
  constexpr void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const std::int64_t g = std::gcd(num_ < 0 ? -num_ : num_, den_);
    if (g > 1) {
      num_ /= g;
      den_ /= g;
    }
  }
  std::int64_t num_;
  std::int64_t den_;
};

/// Fixed-time, decoupling and local-smoothing exponents for (n, p).
///
/// s(p) = (n-1)/2 |1/p - 1/2|;
/// d(p) = s(p) for 2 <= p < 2(n+1)/(n-1), 2 s(p) - 1/p for p >= 2(n+1)/(n-1);
/// sigma(p) = 0 for 2 < p <= 2n/(n-1), 2 s(p) - 1/p beyond.
/// For 1 < p < 2 the table sets d(p) = s(p) and sigma(p) = 0.
struct ExponentTable {
  int n = 2;
  Rational p;
  Rational s;
  Rational d;
  Rational sigma;
  Rational d_minus_s;
};

inline ExponentTable exponents(int n, Rational p) {
  require(n >= 2, "exponents: dimension must be >= 2");
  require(p > Rational(1), "exponents: p must exceed 1 (finite p only)");
  ExponentTable t;
  t.n = n;
  t.p = p;
  const Rational inv_p = Rational(1) / p;
  t.s = Rational(n - 1, 2) * abs(inv_p - Rational(1, 2));
  const Rational decoupling_threshold(2 * (n + 1), n - 1);
  const Rational smoothing_threshold(2 * n, n - 1);
  if (p >= decoupling_threshold)
    t.d = Rational(2) * t.s - inv_p;
  else
    t.d = t.s;
  if (p > smoothing_threshold)
    t.sigma = Rational(2) * t.s - inv_p;
  else
    t.sigma = Rational(0);
  t.d_minus_s = t.d - t.s;
  return t;
}

/// Convenience for integer exponents.
inline ExponentTable exponents(int n, int p) { return exponents(n, Rational(p)); }

/// Parses "6", "10/3" or a finite decimal such as "2.5" into a Rational.
inline Rational parse_rational(const std::string& text) {
  if (auto slash = text.find('/'); slash != std::string::npos)
    return Rational(std::stoll(text.substr(0, slash)), std::stoll(text.substr(slash + 1)));
  if (auto dot = text.find('.'); dot != std::string::npos) {
    const std::string frac = text.substr(dot + 1);
    std::int64_t den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) den *= 10;
    const std::int64_t whole = text.substr(0, dot).empty() ? 0 : std::stoll(text.substr(0, dot));
    const std::int64_t part = frac.empty() ? 0 : std::stoll(frac);
    return Rational(whole * den + (text[0] == '-' ? -part : part), den);
  }
  return Rational(std::stoll(text));
}

}  // namespace hfio
