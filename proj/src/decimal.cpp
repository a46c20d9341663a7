#include "ood/decimal.hpp"

#include <algorithm>
#include <array>
#include <charconv>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ood/error.hpp"

namespace ood {

namespace {

__extension__ typedef unsigned __int128 u128;

constexpr int kMaxScale = 18;

u128 pow10(int n) {
  u128 r = 1;
  for (int i = 0; i < n; ++i) r *= 10;
  return r;
}

}  // namespace

Decimal Decimal::parse(std::string_view text) {
  const std::string original(text);
  auto fail = [&]() -> ConfigError {
    return ConfigError("invalid decimal '" + original + "'");
  };
  if (text.empty()) throw fail();
  if (text.front() == '+') text.remove_prefix(1);
  if (text.empty() || text.front() == '-') throw fail();

  int exponent = 0;
  if (auto e = text.find_first_of("eE"); e != std::string_view::npos) {
    std::string_view exp_text = text.substr(e + 1);
    if (!exp_text.empty() && exp_text.front() == '+') exp_text.remove_prefix(1);
    auto [ptr, ec] = std::from_chars(exp_text.data(), exp_text.data() + exp_text.size(), exponent);
    if (ec != std::errc() || ptr != exp_text.data() + exp_text.size()) throw fail();
    text = text.substr(0, e);
  }

  std::int64_t mantissa = 0;
  int scale = 0;
  bool seen_point = false;
  bool seen_digit = false;
  for (char c : text) {
    if (c == '.') {
      if (seen_point) throw fail();
      seen_point = true;
      continue;
    }
    if (c < '0' || c > '9') throw fail();
    seen_digit = true;
    if (mantissa > (std::numeric_limits<std::int64_t>::max() - 9) / 10) {
      // Drop digits beyond int64 precision only if they are past the point.
      if (!seen_point) throw fail();
      continue;
    }
    mantissa = mantissa * 10 + (c - '0');
    if (seen_point) ++scale;
  }
  if (!seen_digit) throw fail();

  scale -= exponent;
  while (scale < 0) {
    if (mantissa > std::numeric_limits<std::int64_t>::max() / 10) throw fail();
    mantissa *= 10;
    ++scale;
  }
  if (scale > kMaxScale) throw fail();
  Decimal d(mantissa, scale);
  d.canonicalize();
  return d;
}

Decimal Decimal::from_double(double value) {
  if (!std::isfinite(value) || value < 0) {
    throw ConfigError("decimal value must be finite and non-negative");
  }
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), value);
  if (ec != std::errc()) throw ConfigError("cannot format decimal value");
  return parse(std::string_view(buf.data(), static_cast<std::size_t>(ptr - buf.data())));
}

void Decimal::canonicalize() {
  while (scale_ > 0 && mantissa_ % 10 == 0) {
    mantissa_ /= 10;
    --scale_;
  }
  if (mantissa_ == 0) scale_ = 0;
}

double Decimal::to_double() const {
  double value = 0;
  const std::string s = to_string();
  std::from_chars(s.data(), s.data() + s.size(), value);
  return value;
}

std::string Decimal::to_string() const {
  std::string digits = std::to_string(mantissa_);
  if (scale_ == 0) return digits;
  if (static_cast<int>(digits.size()) <= scale_) {
    digits.insert(0, static_cast<std::size_t>(scale_ - static_cast<int>(digits.size()) + 1), '0');
  }
  digits.insert(digits.size() - static_cast<std::size_t>(scale_), ".");
  return digits;
}

std::strong_ordering Decimal::compare_ratio(std::uint64_t count, std::uint64_t d,
                                            std::uint64_t total) const {
  const u128 lhs = static_cast<u128>(count) * d * pow10(scale_);
  const u128 rhs = static_cast<u128>(mantissa_) * total;
  return lhs <=> rhs;
}

std::strong_ordering operator<=>(const Decimal& a, const Decimal& b) {
  const int scale = std::max(a.scale_, b.scale_);
  const u128 lhs = static_cast<u128>(a.mantissa_) * pow10(scale - a.scale_);
  const u128 rhs = static_cast<u128>(b.mantissa_) * pow10(scale - b.scale_);
  return lhs <=> rhs;
}

}  // namespace ood
