#pragma once

#include <concepts>
#include <cstdint>
#include <limits>
#include <random>
#include <span>
#include <utility>

#include "trigfit/error.hpp"

namespace trigfit {

/// Anything that can hand out uniform integers in [0, n).
template <class S>
concept UniformSource = requires(S s, std::uint64_t n) {
  { s.below(n) } -> std::convertible_to<std::uint64_t>;
};

/// Seedable, platform-independent generator.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. Integer draws do not go through std::uniform_int_distribution
/// (its mapping is implementation-defined); `below` rejects the top partial
/// block of the 64-bit range and reduces modulo n, so draws are unbiased and
/// identical on every conforming platform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw InvalidArgument("Rng::below requires n >= 1");
    constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
    // Largest multiple of n that fits, minus one.
    const std::uint64_t limit = kMax - (kMax % n + 1) % n;
    std::uint64_t r = engine_();
    while (r > limit) r = engine_();
    return r % n;
  }

  /// Uniform integer in [lo, hi], inclusive.
  std::int64_t between(std::int64_t lo, std::int64_t hi) {
    if (hi < lo) throw InvalidArgument("Rng::between requires lo <= hi");
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<std::int64_t>(below(span));
  }

  /// Uniform real in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * unit(); }

 private:
  std::mt19937_64 engine_;
};

/// Fisher-Yates shuffle driven by a UniformSource.
template <class T, UniformSource S>
void shuffle(std::span<T> items, S& source) {
  for (std::size_t i = items.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(source.below(i));
    std::swap(items[i - 1], items[j]);
  }
}

}  // namespace trigfit
