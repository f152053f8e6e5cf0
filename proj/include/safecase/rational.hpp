#pragma once

#include <compare>
#include <cstdint>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>

namespace safecase {

__extension__ typedef __int128 int128_t;

/// Exact fraction of two 64-bit integers, always kept in lowest terms with a
/// positive denominator. Intermediate products are formed in 128 bits; a
/// result that does not fit back into 64 bits throws std::overflow_error
/// rather than silently losing precision.
class Rational {
 public:
  constexpr Rational() = default;
  Rational(std::int64_t value) : num_(value), den_(1) {}  // NOLINT: implicit by design of the arithmetic
  Rational(std::int64_t num, std::int64_t den);

  /// Parses "12", "-0.005", "1e-8", "2.5E3", "175/9", with optional `_`
  /// digit separators. Throws std::invalid_argument on malformed text.
  static Rational parse(std::string_view text);

  std::int64_t num() const { return num_; }
  std::int64_t den() const { return den_; }

  bool is_integer() const { return den_ == 1; }
  bool is_zero() const { return num_ == 0; }
  int sign() const { return (num_ > 0) - (num_ < 0); }

  std::int64_t floor() const;
  std::int64_t ceil() const;
  double to_double() const { return static_cast<double>(num_) / static_cast<double>(den_); }

  /// Terminating decimal when the denominator is 2^a 5^b ("0.005"),
  /// otherwise "n/d".
  std::string to_string() const;

  Rational operator-() const;
  Rational& operator+=(const Rational& rhs);
  Rational& operator-=(const Rational& rhs);
  Rational& operator*=(const Rational& rhs);
  Rational& operator/=(const Rational& rhs);

  friend Rational operator+(Rational lhs, const Rational& rhs) { return lhs += rhs; }
  friend Rational operator-(Rational lhs, const Rational& rhs) { return lhs -= rhs; }
  friend Rational operator*(Rational lhs, const Rational& rhs) { return lhs *= rhs; }
  friend Rational operator/(Rational lhs, const Rational& rhs) { return lhs /= rhs; }

  friend bool operator==(const Rational& a, const Rational& b) = default;
  friend std::strong_ordering operator<=>(const Rational& a, const Rational& b);

 private:
  static Rational from_wide(int128_t num, int128_t den);

  std::int64_t num_ = 0;
  std::int64_t den_ = 1;
};

std::ostream& operator<<(std::ostream& os, const Rational& r);

Rational abs(const Rational& r);
Rational min(const Rational& a, const Rational& b);
Rational max(const Rational& a, const Rational& b);

/// Smallest integer s >= 0 with s*s >= r (r >= 0).
std::int64_t ceil_sqrt(const Rational& r);
/// Largest integer s >= 0 with s*s <= r (r >= 0).
std::int64_t floor_sqrt(const Rational& r);

}  // namespace safecase
