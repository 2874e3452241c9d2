#ifndef MLCORE_RNG_HPP
#define MLCORE_RNG_HPP

#include <cstdint>

namespace mlcore {

/// Deterministic 64-bit generator: xoshiro256** (Blackman & Vigna, public
/// domain), seeded through splitmix64.  The same seed produces the same
/// sequence on every platform, which is what makes seeded datasets and
/// "same starting centroids" runs reproducible bit-for-bit.
class SeededRng {
 public:
  explicit SeededRng(std::uint64_t seed) {
    std::uint64_t x = seed;
    for (auto& word : state_) {
      // splitmix64 step
      x += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = x;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      word = z ^ (z >> 31);
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform integer in [0, bound).  bound must be >= 1.
  std::uint64_t next_below(std::uint64_t bound) {
    // multiply-shift reduction; bias is < 2^-64 per draw
    return static_cast<std::uint64_t>(
        (static_cast<unsigned __int128>(next_u64()) * bound) >> 64);
  }

 private:
  static std::uint64_t rotl(std::uint64_t v, int k) {
    return (v << k) | (v >> (64 - k));
  }

  std::uint64_t state_[4];
};

}  // namespace mlcore

#endif  // MLCORE_RNG_HPP
