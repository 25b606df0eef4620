#pragma once

#include <compare>
#include <cstdint>
#include <numeric>
#include <stdexcept>
#include <string>

namespace nesy::cost {

__extension__ using int128 = __int128;

class RationalOverflow : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// Exact fraction over 128-bit integers, always in lowest terms with a
/// positive denominator. Every operation checks for overflow and throws
/// RationalOverflow rather than wrapping.
class Rational {
 public:
  constexpr Rational() = default;
  constexpr Rational(std::int64_t n) : num_(n) {}  // NOLINT: implicit by design
  Rational(int128 n, int128 d) : num_(n), den_(d) {
    if (den_ == 0) throw std::domain_error("zero denominator");
    normalize();
  }

  int128 num() const noexcept { return num_; }
  int128 den() const noexcept { return den_; }
  bool is_integer() const noexcept { return den_ == 1; }

  long double to_long_double() const noexcept {
    return static_cast<long double>(num_) / static_cast<long double>(den_);
  }

  friend Rational operator+(const Rational& a, const Rational& b) {
    const int128 g = gcd(a.den_, b.den_);
    const int128 da = b.den_ / g;
    const int128 db = a.den_ / g;
    return Rational(add(mul(a.num_, da), mul(b.num_, db)), mul(a.den_, da));
  }
  friend Rational operator-(const Rational& a) { return Rational(-a.num_, a.den_); }
  friend Rational operator-(const Rational& a, const Rational& b) { return a + (-b); }
  friend Rational operator*(const Rational& a, const Rational& b) {
    const int128 g1 = gcd(a.num_, b.den_);
    const int128 g2 = gcd(b.num_, a.den_);
    return Rational(mul(a.num_ / g1, b.num_ / g2), mul(a.den_ / g2, b.den_ / g1));
  }
  friend Rational operator/(const Rational& a, const Rational& b) {
    if (b.num_ == 0) throw std::domain_error("division by zero");
    return a * Rational(b.den_, b.num_);
  }
  Rational& operator+=(const Rational& o) { return *this = *this + o; }
  Rational& operator*=(const Rational& o) { return *this = *this * o; }

  friend bool operator==(const Rational&, const Rational&) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
    return mul(a.num_, b.den_) <=> mul(b.num_, a.den_);
  }

  /// Decimal text of the numerator, and "/den" if not an integer.
  std::string str() const;

 private:
  static int128 abs(int128 v) { return v < 0 ? -v : v; }
  static int128 gcd(int128 a, int128 b) {
    a = abs(a);
    b = abs(b);
    while (b != 0) {
      const int128 t = a % b;
      a = b;
      b = t;
    }
    return a == 0 ? 1 : a;
  }
  static int128 mul(int128 a, int128 b) {
    int128 r;
    if (__builtin_mul_overflow(a, b, &r)) throw RationalOverflow("rational multiply overflows 128 bits");
    return r;
  }
  static int128 add(int128 a, int128 b) {
    int128 r;
    if (__builtin_add_overflow(a, b, &r)) throw RationalOverflow("rational add overflows 128 bits");
    return r;
  }
  void normalize() {
    if (den_ < 0) {
      num_ = -num_;
      den_ = -den_;
    }
    const int128 g = gcd(num_, den_);
    num_ /= g;
    den_ /= g;
  }

  int128 num_ = 0;
  int128 den_ = 1;
};

inline std::string to_decimal(int128 v) {
  if (v == 0) return "0";
  const bool neg = v < 0;
  std::string s;
  while (v != 0) {
    const int digit = static_cast<int>(v % 10);
    s.insert(s.begin(), static_cast<char>('0' + (digit < 0 ? -digit : digit)));
    v /= 10;
  }
  return neg ? "-" + s : s;
}

inline std::string Rational::str() const {
  return den_ == 1 ? to_decimal(num_) : to_decimal(num_) + "/" + to_decimal(den_);
}

}  // namespace nesy::cost
