#pragma once

#include <array>
#include <cmath>
#include <cstdint>

// Counter-based random numbers (Philox4x32-10) with splitmix64-style key
// derivation. Every Gaussian draw is addressed by (stream key, row, pair),
// so parallel consumers produce identical values regardless of scheduling.

namespace medmod {

/// splitmix64 output function applied to an explicit state word.
inline std::uint64_t splitmix64_mix(std::uint64_t state) {
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Key for the `index`-th substream of `parent`: the (index+1)-th output of a
/// splitmix64 sequence seeded at `parent` (its state advances additively, so
/// arbitrary elements are O(1)).
inline std::uint64_t derive_stream(std::uint64_t parent, std::uint64_t index) {
  return splitmix64_mix(parent + (index + 1) * 0x9E3779B97F4A7C15ULL);
}

namespace detail {

inline void philox_round(std::array<std::uint32_t, 4>& ctr,
                         const std::array<std::uint32_t, 2>& key) {
  const std::uint64_t p0 = 0xD2511F53ULL * ctr[0];
  const std::uint64_t p1 = 0xCD9E8D57ULL * ctr[2];
  const auto lo0 = static_cast<std::uint32_t>(p0);
  const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const auto lo1 = static_cast<std::uint32_t>(p1);
  const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
  ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
}

}  // namespace detail

/// One 128-bit Philox4x32-10 block for the given counter and key.
inline std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                               std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    detail::philox_round(counter, key);
    key[0] += 0x9E3779B9u;
    key[1] += 0xBB67AE85u;
  }
  return counter;
}

/// Stateless Gaussian source: normal_pair(row, pair) is a fixed function of
/// (key, row, pair), usable from any thread in any order.
class NormalStream {
 public:
  explicit NormalStream(std::uint64_t key)
      : key_{static_cast<std::uint32_t>(key), static_cast<std::uint32_t>(key >> 32)} {}

  /// Box-Muller pair from the Philox block addressed by (row, pair_index).
  std::array<double, 2> normal_pair(std::uint64_t row, std::uint32_t pair_index) const {
    const std::array<std::uint32_t, 4> words = philox4x32(
        {static_cast<std::uint32_t>(row), static_cast<std::uint32_t>(row >> 32),
         pair_index, 0u},
        key_);
    const double u1 = to_unit(words[0], words[1]);
    const double u2 = to_unit(words[2], words[3]);
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * 3.14159265358979323846 * u2;
    return {radius * std::cos(angle), radius * std::sin(angle)};
  }

 private:
  // 53-bit uniform in (0, 1]; never 0, so log(u1) is safe.
  static double to_unit(std::uint32_t lo, std::uint32_t hi) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32) | lo;
    return static_cast<double>((bits >> 11) + 1) * 0x1.0p-53;
  }

  std::array<std::uint32_t, 2> key_;
};

}  // namespace medmod
