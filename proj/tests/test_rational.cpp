#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>

#include "safecase/rational.hpp"

using safecase::Rational;

TEST(Rational, ParsesDecimalsFractionsAndExponents) {
  EXPECT_EQ(Rational::parse("12"), Rational(12));
  EXPECT_EQ(Rational::parse("-0.005"), Rational(-1, 200));
  EXPECT_EQ(Rational::parse("1e-8"), Rational(1, 100'000'000));
  EXPECT_EQ(Rational::parse("2.5E3"), Rational(2500));
  EXPECT_EQ(Rational::parse("175/9"), Rational(175, 9));
  EXPECT_EQ(Rational::parse("1_000_000"), Rational(1'000'000));
  EXPECT_EQ(Rational::parse("+.5"), Rational(1, 2));
}

TEST(Rational, RejectsMalformedText) {
  for (const char* bad : {"", "abc", "1.2.3", "1e", "1/0", "--1", "1 2", "e5"})
    EXPECT_ANY_THROW(Rational::parse(bad)) << bad;
}

TEST(Rational, RendersTerminatingDecimalsExactly) {
  EXPECT_EQ(Rational(1, 100).to_string(), "0.01");
  EXPECT_EQ(Rational(-1, 1000).to_string(), "-0.001");
  EXPECT_EQ(Rational(200000).to_string(), "200000");
  EXPECT_EQ(Rational(1, 100'000'000).to_string(), "0.00000001");
  EXPECT_EQ(Rational(175, 9).to_string(), "175/9");
  EXPECT_EQ(Rational(0).to_string(), "0");
}

TEST(Rational, ToStringRoundTrips) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> num(-1'000'000, 1'000'000);
  std::uniform_int_distribution<std::int64_t> den(1, 5000);
  for (int i = 0; i < 2000; ++i) {
    Rational r(num(rng), den(rng));
    EXPECT_EQ(Rational::parse(r.to_string()), r);
  }
}

TEST(Rational, FloorAndCeilFollowTheNumberLine) {
  EXPECT_EQ(Rational(7, 2).floor(), 3);
  EXPECT_EQ(Rational(7, 2).ceil(), 4);
  EXPECT_EQ(Rational(-7, 2).floor(), -4);
  EXPECT_EQ(Rational(-7, 2).ceil(), -3);
  EXPECT_EQ(Rational(4).floor(), 4);
  EXPECT_EQ(Rational(4).ceil(), 4);
}

TEST(Rational, ArithmeticMatchesCrossMultiplicationOracle) {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<std::int64_t> num(-100'000, 100'000);
  std::uniform_int_distribution<std::int64_t> den(1, 1000);
  for (int i = 0; i < 5000; ++i) {
    std::int64_t a = num(rng), b = den(rng), c = num(rng), d = den(rng);
    Rational x(a, b), y(c, d);
    EXPECT_EQ(x + y, Rational(a * d + c * b, b * d));
    EXPECT_EQ(x - y, Rational(a * d - c * b, b * d));
    EXPECT_EQ(x * y, Rational(a * c, b * d));
    if (c != 0) {
      EXPECT_EQ(x / y, Rational(a * d, b * c));
    }
    EXPECT_EQ(x < y, a * d < c * b);
  }
}

TEST(Rational, OverflowThrowsInsteadOfWrapping) {
  Rational big(std::numeric_limits<std::int64_t>::max() / 2);
  EXPECT_THROW(big * Rational(3), std::overflow_error);
  EXPECT_THROW(Rational(1) / Rational(0), std::domain_error);
}

TEST(Rational, SquareRootsBracketTheValue) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::int64_t> num(0, 4'000'000'000);
  std::uniform_int_distribution<std::int64_t> den(1, 100);
  for (int i = 0; i < 3000; ++i) {
    Rational r(num(rng), den(rng));
    std::int64_t lo = safecase::floor_sqrt(r);
    std::int64_t hi = safecase::ceil_sqrt(r);
    EXPECT_LE(Rational(lo) * Rational(lo), r);
    EXPECT_GT(Rational(lo + 1) * Rational(lo + 1), r);
    EXPECT_GE(Rational(hi) * Rational(hi), r);
    if (hi > 0) {
      EXPECT_LT(Rational(hi - 1) * Rational(hi - 1), r);
    }
  }
  EXPECT_EQ(safecase::ceil_sqrt(Rational(100'000'000)), 10'000);
  EXPECT_THROW(safecase::floor_sqrt(Rational(-1)), std::domain_error);
}
