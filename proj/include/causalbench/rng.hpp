#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <string_view>
#include <utility>
#include <vector>

namespace causalbench {

/// SplitMix64 (Steele, Lea, Flood 2014). The whole state is one 64-bit word,
/// so a seed fully determines every downstream draw in any language:
///
///   state += 0x9E3779B97F4A7C15
///   z = state
///   z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9
///   z = (z ^ (z >> 27)) * 0x94D049BB133111EB
///   return z ^ (z >> 31)
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit SplitMix64(std::uint64_t seed = 0) noexcept : state_(seed) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return ~result_type{0}; }

  result_type operator()() noexcept {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t state() const noexcept { return state_; }

  /// Independent child stream; the parent advances by one draw.
  SplitMix64 split() noexcept { return SplitMix64((*this)() ^ 0x6A09E667F3BCC909ULL); }

  /// Uniform on [0, 1) with 53 bits of precision.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }

  /// Uniform on (0, 1); never returns 0 so logs are safe.
  double uniform_open() noexcept {
    return (static_cast<double>((*this)() >> 11) + 0.5) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Unbiased integer in [0, bound) by rejection.
  std::uint64_t below(std::uint64_t bound) noexcept {
    if (bound <= 1) return 0;
    const std::uint64_t limit = max() - max() % bound;
    std::uint64_t x;
    do {
      x = (*this)();
    } while (x >= limit);
    return x % bound;
  }

  /// Box-Muller; one pair per call, the second value is discarded so the
  /// stream position depends only on the number of calls.
  double normal() noexcept {
    const double u1 = uniform_open();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  double gumbel(double location, double scale) noexcept {
    return location - scale * std::log(-std::log(uniform_open()));
  }

  double laplace(double scale) noexcept {
    const double u = uniform_open() - 0.5;
    return (u < 0 ? 1.0 : -1.0) * scale * std::log(1.0 - 2.0 * std::abs(u));
  }

  /// Uniform random permutation of 0..n-1 (Fisher-Yates).
  std::vector<int> permutation(int n) {
    std::vector<int> perm(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) perm[static_cast<std::size_t>(i)] = i;
    for (int i = n - 1; i > 0; --i) {
      const auto j = static_cast<int>(below(static_cast<std::uint64_t>(i) + 1));
      std::swap(perm[static_cast<std::size_t>(i)], perm[static_cast<std::size_t>(j)]);
    }
    return perm;
  }

 private:
  std::uint64_t state_;
};

/// FNV-1a, used to derive seeds and ids from descriptor strings.
constexpr std::uint64_t fnv1a64(std::string_view text,
                                std::uint64_t hash = 0xCBF29CE484222325ULL) noexcept {
  for (unsigned char c : text) {
    hash ^= c;
    hash *= 0x100000001B3ULL;
  }
  return hash;
}

/// Seed for a named sub-stream of a base seed.
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view label) noexcept {
  SplitMix64 mix(base ^ fnv1a64(label));
  return mix();
}

}  // namespace causalbench
