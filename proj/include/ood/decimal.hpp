#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <string_view>

namespace ood {

// A finite non-negative decimal `mantissa * 10^-scale`, used for the tail
// factor and the rareness bounds so that threshold comparisons against
// integer counts are exact and platform independent.
class Decimal {
 public:
  Decimal() = default;

  // Accepts plain and exponent notation ("1.2", "0.3", "5", "2.5e-1").
  static Decimal parse(std::string_view text);
  // Uses the shortest decimal string that round-trips the double, so
  // Decimal::from_double(1.2) is exactly 12/10.
  static Decimal from_double(double value);

  std::int64_t mantissa() const noexcept { return mantissa_; }
  int scale() const noexcept { return scale_; }
  double to_double() const;
  std::string to_string() const;

  // count * d compared against this * total, i.e. count/mean vs this.
  // Returns the ordering of (count * d) relative to (this * total).
  std::strong_ordering compare_ratio(std::uint64_t count, std::uint64_t d,
                                     std::uint64_t total) const;

  friend std::strong_ordering operator<=>(const Decimal& a, const Decimal& b);
  friend bool operator==(const Decimal& a, const Decimal& b) {
    return (a <=> b) == std::strong_ordering::equal;
  }

 private:
  Decimal(std::int64_t mantissa, int scale) : mantissa_(mantissa), scale_(scale) {}
  void canonicalize();

  std::int64_t mantissa_ = 0;
  int scale_ = 0;
};

}  // namespace ood
