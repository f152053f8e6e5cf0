#include "safecase/rational.hpp"

#include <cctype>
#include <limits>
#include <numeric>

namespace safecase {

namespace {

using Wide = int128_t;

Wide wide_gcd(Wide a, Wide b) {
  if (a < 0) a = -a;
  if (b < 0) b = -b;
  while (b != 0) {
    Wide t = a % b;
    a = b;
    b = t;
  }
  return a;
}

bool fits(Wide v) {
  return v >= std::numeric_limits<std::int64_t>::min() &&
         v <= std::numeric_limits<std::int64_t>::max();
}

Wide floor_div(Wide a, Wide b) {
  Wide q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

}  // namespace

Rational::Rational(std::int64_t num, std::int64_t den) {
  *this = from_wide(num, den);
}

Rational Rational::from_wide(Wide num, Wide den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  Wide g = wide_gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  if (!fits(num) || !fits(den)) throw std::overflow_error("rational overflow");
  Rational r;
  r.num_ = static_cast<std::int64_t>(num);
  r.den_ = static_cast<std::int64_t>(den);
  return r;
}

Rational Rational::parse(std::string_view text) {
  std::string s;
  for (char c : text)
    if (c != '_') s.push_back(c);
  if (s.empty()) throw std::invalid_argument("empty number");

  if (auto slash = s.find('/'); slash != std::string::npos) {
    Rational n = parse(s.substr(0, slash));
    Rational d = parse(s.substr(slash + 1));
    if (d.is_zero()) throw std::invalid_argument("zero denominator in '" + s + "'");
    return n / d;
  }

  std::size_t i = 0;
  bool negative = false;
  if (s[i] == '+' || s[i] == '-') {
    negative = s[i] == '-';
    ++i;
  }
  Wide num = 0;
  Wide den = 1;
  bool digits = false;
  bool in_fraction = false;
  for (; i < s.size(); ++i) {
    char c = s[i];
    if (std::isdigit(static_cast<unsigned char>(c))) {
      digits = true;
      num = num * 10 + (c - '0');
      if (in_fraction) den *= 10;
      if (!fits(num) || !fits(den)) throw std::overflow_error("number too long: '" + s + "'");
    } else if (c == '.' && !in_fraction) {
      in_fraction = true;
    } else {
      break;
    }
  }
  if (!digits) throw std::invalid_argument("not a number: '" + s + "'");

  int exponent = 0;
  if (i < s.size()) {
    if (s[i] != 'e' && s[i] != 'E') throw std::invalid_argument("not a number: '" + s + "'");
    ++i;
    bool exp_negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
      exp_negative = s[i] == '-';
      ++i;
    }
    if (i == s.size()) throw std::invalid_argument("missing exponent: '" + s + "'");
    for (; i < s.size(); ++i) {
      if (!std::isdigit(static_cast<unsigned char>(s[i])))
        throw std::invalid_argument("not a number: '" + s + "'");
      exponent = exponent * 10 + (s[i] - '0');
      if (exponent > 30) throw std::overflow_error("exponent out of range: '" + s + "'");
    }
    if (exp_negative) exponent = -exponent;
  }
  for (; exponent > 0; --exponent) num *= 10;
  for (; exponent < 0; ++exponent) den *= 10;
  if (negative) num = -num;
  return from_wide(num, den);
}

std::int64_t Rational::floor() const {
  return static_cast<std::int64_t>(floor_div(num_, den_));
}

std::int64_t Rational::ceil() const {
  return static_cast<std::int64_t>(-floor_div(-static_cast<Wide>(num_), den_));
}

std::string Rational::to_string() const {
  std::int64_t d = den_;
  int twos = 0;
  int fives = 0;
  while (d % 2 == 0) {
    d /= 2;
    ++twos;
  }
  while (d % 5 == 0) {
    d /= 5;
    ++fives;
  }
  if (d != 1) return std::to_string(num_) + "/" + std::to_string(den_);

  // value * 10^places is an integer
  int places = std::max(twos, fives);
  Wide pow10 = 1;
  for (int k = 0; k < places; ++k) pow10 *= 10;
  Wide scaled = static_cast<Wide>(num_) * (pow10 / den_);

  bool negative = scaled < 0;
  if (negative) scaled = -scaled;
  std::string digits;
  do {
    digits.insert(digits.begin(), static_cast<char>('0' + static_cast<int>(scaled % 10)));
    scaled /= 10;
  } while (scaled != 0);
  if (places > 0) {
    while (static_cast<int>(digits.size()) <= places) digits.insert(digits.begin(), '0');
    digits.insert(digits.end() - places, '.');
  }
  return negative ? "-" + digits : digits;
}

Rational Rational::operator-() const { return from_wide(-static_cast<Wide>(num_), den_); }

Rational& Rational::operator+=(const Rational& rhs) {
  *this = from_wide(static_cast<Wide>(num_) * rhs.den_ + static_cast<Wide>(rhs.num_) * den_,
                    static_cast<Wide>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator-=(const Rational& rhs) {
  *this = from_wide(static_cast<Wide>(num_) * rhs.den_ - static_cast<Wide>(rhs.num_) * den_,
                    static_cast<Wide>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator*=(const Rational& rhs) {
  *this = from_wide(static_cast<Wide>(num_) * rhs.num_, static_cast<Wide>(den_) * rhs.den_);
  return *this;
}

Rational& Rational::operator/=(const Rational& rhs) {
  if (rhs.num_ == 0) throw std::domain_error("division by zero");
  *this = from_wide(static_cast<Wide>(num_) * rhs.den_, static_cast<Wide>(den_) * rhs.num_);
  return *this;
}

std::strong_ordering operator<=>(const Rational& a, const Rational& b) {
  Wide lhs = static_cast<Wide>(a.num_) * b.den_;
  Wide rhs = static_cast<Wide>(b.num_) * a.den_;
  return lhs <=> rhs;
}

std::ostream& operator<<(std::ostream& os, const Rational& r) { return os << r.to_string(); }

Rational abs(const Rational& r) { return r.sign() < 0 ? -r : r; }
Rational min(const Rational& a, const Rational& b) { return b < a ? b : a; }
Rational max(const Rational& a, const Rational& b) { return a < b ? b : a; }

namespace {

// Integer square root of a non-negative 128-bit value.
Wide isqrt(Wide n) {
  if (n < 2) return n;
  Wide x = static_cast<Wide>(__builtin_sqrtl(static_cast<long double>(n)));
  while (x * x > n) --x;
  while ((x + 1) * (x + 1) <= n) ++x;
  return x;
}

}  // namespace

std::int64_t floor_sqrt(const Rational& r) {
  if (r.sign() < 0) throw std::domain_error("square root of negative value");
  // s*s <= n/d  <=>  s*s*d <= n  <=>  s <= sqrt(n*d)/d
  Wide n = r.num();
  Wide d = r.den();
  Wide s = isqrt(n / d);
  while ((s + 1) * (s + 1) * d <= n) ++s;
  while (s > 0 && s * s * d > n) --s;
  return static_cast<std::int64_t>(s);
}

std::int64_t ceil_sqrt(const Rational& r) {
  std::int64_t s = floor_sqrt(r);
  if (static_cast<Wide>(s) * s * r.den() < r.num()) ++s;
  return s;
}

}  // namespace safecase
