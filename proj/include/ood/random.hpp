#pragma once

#include <cstdint>
#include <string_view>

namespace ood {

// Platform-independent randomness. Everything here is defined bit-for-bit
// (no std::*_distribution, whose outputs vary between standard libraries).

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// 64-bit FNV-1a.
constexpr std::uint64_t fnv1a64(std::string_view s) noexcept {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

// Uniform in [0, 1) with 53 random bits.
constexpr double unit_interval(std::uint64_t bits) noexcept {
  return static_cast<double>(bits >> 11) * 0x1.0p-53;
}

// Counter-based draw keyed by (seed, key): the same question always gets the
// same number regardless of iteration order.
inline double keyed_uniform(std::uint64_t seed, std::string_view key) noexcept {
  return unit_interval(splitmix64(seed ^ splitmix64(fnv1a64(key))));
}

// Sequential generator (splitmix64 stream).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next() noexcept {
    const std::uint64_t s = state_;
    state_ += 0x9e3779b97f4a7c15ULL;
    return splitmix64(s);
  }

  double uniform() noexcept { return unit_interval(next()); }

  // Uniform integer in [lo, hi], rejection sampled.
  std::uint64_t between(std::uint64_t lo, std::uint64_t hi) noexcept {
    const std::uint64_t span = hi - lo;
    if (span == ~0ULL) return next();
    const std::uint64_t range = span + 1;
    const std::uint64_t limit = ~0ULL - (~0ULL % range);
    std::uint64_t x = next();
    while (x >= limit) x = next();
    return lo + x % range;
  }

 private:
  std::uint64_t state_;
};

}  // namespace ood
