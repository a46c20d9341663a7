#include "doctest.h"
#include "ood/decimal.hpp"
#include "ood/error.hpp"
#include "ood/random.hpp"

using ood::Decimal;

TEST_CASE("decimal parsing") {
  CHECK(Decimal::parse("1.2").mantissa() == 12);
  CHECK(Decimal::parse("1.2").scale() == 1);
  CHECK(Decimal::parse("1.20") == Decimal::parse("1.2"));
  CHECK(Decimal::parse("2.5e-1") == Decimal::parse("0.25"));
  CHECK(Decimal::parse("3e2").to_string() == "300");
  CHECK(Decimal::parse("0.05").to_string() == "0.05");
  CHECK(Decimal::parse("+7").to_string() == "7");
  CHECK_THROWS_AS(Decimal::parse(""), ood::ConfigError);
  CHECK_THROWS_AS(Decimal::parse("-1"), ood::ConfigError);
  CHECK_THROWS_AS(Decimal::parse("1.2.3"), ood::ConfigError);
  CHECK_THROWS_AS(Decimal::parse("abc"), ood::ConfigError);
}

TEST_CASE("from_double uses the shortest round-trip digits") {
  CHECK(Decimal::from_double(1.2) == Decimal::parse("1.2"));
  CHECK(Decimal::from_double(0.7) == Decimal::parse("0.7"));
  CHECK(Decimal::from_double(1.2).to_double() == 1.2);
  CHECK_THROWS_AS(Decimal::from_double(-0.5), ood::ConfigError);
}

TEST_CASE("ratio comparison is exact at the boundary") {
  // mean 6, alpha 1.2: threshold 7.2
  const auto alpha = Decimal::parse("1.2");
  CHECK(alpha.compare_ratio(7, 3, 18) < 0);
  CHECK(alpha.compare_ratio(8, 3, 18) > 0);
  // ratio exactly 1.2
  CHECK(alpha.compare_ratio(6, 2, 10) == 0);
  CHECK(Decimal::parse("0.3").compare_ratio(3, 1, 10) == 0);
}

TEST_CASE("ratio comparison agrees with a rational brute force") {
  ood::Rng rng(11);
  for (int i = 0; i < 5000; ++i) {
    const std::uint64_t num = rng.between(1, 500);
    const auto alpha = Decimal::parse(std::to_string(num / 100) + "." +
                                      std::to_string(num % 100 / 10) + std::to_string(num % 10));
    const std::uint64_t count = rng.between(0, 200);
    const std::uint64_t d = rng.between(1, 20);
    const std::uint64_t total = rng.between(count + d - 1, count + 400);
    // count*d vs (num/100)*total  <=>  100*count*d vs num*total
    const auto lhs = 100 * count * d;
    const auto rhs = num * total;
    CHECK((alpha.compare_ratio(count, d, total) == (lhs <=> rhs)));
  }
}
