#ifndef FLUCT_RNG_HPP
#define FLUCT_RNG_HPP

#include <cstdint>

namespace fluct {

/// Counter-based seeded stream: xoshiro256** state derived from
/// (root_seed, stream_index) via SplitMix64. One stream per worker; the
/// derivation is a pure function, so layouts are reproducible.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed, std::uint64_t stream_index = 0) {
    std::uint64_t x = root_seed ^ (0x9E3779B97F4A7C15ULL * (stream_index + 1));
    for (auto& w : s_) w = splitmix64(x);
  }

  std::uint64_t next_u64() {
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

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform double in (0, 1]; safe as a log() argument.
  double next_double_pos() { return 1.0 - next_double(); }

 private:
  static std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9E3779B97F4A7C15ULL;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }
  static std::uint64_t rotl(std::uint64_t v, int k) { return (v << k) | (v >> (64 - k)); }

  std::uint64_t s_[4];
};

}  // namespace fluct

#endif
