#pragma once

// Reproducible pseudo-random streams.
//
// The algorithms are fixed so that ports in other languages reproduce the
// same fixtures bit for bit:
//   * seeding: four successive SplitMix64 outputs starting from `seed`
//     fill the xoshiro256** state s[0..3];
//   * core: xoshiro256** (Blackman & Vigna, 2018);
//   * uniform(): (next() >> 11) * 2^-53, a double in [0, 1);
//   * gaussian(): Box-Muller using two fresh uniforms u1, u2 and returning
//     sqrt(-2 ln(1 - u1)) * cos(2 pi u2). The sine branch is discarded, so
//     every gaussian consumes exactly two uniforms.

#include <cmath>
#include <cstdint>
#include <numbers>

namespace specgeo {

/// One SplitMix64 step. Advances `state` and returns the mixed output.
constexpr std::uint64_t splitmix64_next(std::uint64_t& state) noexcept {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// Seed for shard `index` of a run seeded with `root`.
constexpr std::uint64_t derive_seed(std::uint64_t root, std::uint64_t index) noexcept {
  std::uint64_t s = root + index;
  return splitmix64_next(s);
}

class Rng {
 public:
  explicit constexpr Rng(std::uint64_t seed = 0) noexcept : seed_(seed) {
    std::uint64_t sm = seed;
    for (auto& word : s_) word = splitmix64_next(sm);
  }

  constexpr std::uint64_t seed() const noexcept { return seed_; }

  constexpr std::uint64_t next_u64() noexcept {
    const std::uint64_t result = rotl(s_[1] * 5, 7) * 9;
    const std::uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  constexpr double uniform() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  double gaussian() noexcept {
    const double u1 = uniform();
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(1.0 - u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  /// Uniform index in [0, n). Uses the multiply-high reduction of one draw.
  constexpr std::uint64_t below(std::uint64_t n) noexcept {
    const unsigned __int128 product = static_cast<unsigned __int128>(next_u64()) * n;
    return static_cast<std::uint64_t>(product >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) noexcept {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t seed_;
  std::uint64_t s_[4]{};
};

}  // namespace specgeo
