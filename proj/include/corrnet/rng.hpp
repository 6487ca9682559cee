#pragma once

#include <cstdint>
#include <vector>

namespace corrnet {

/// splitmix64. Chosen over std::mt19937 + distributions because the standard
/// distributions are implementation-defined; seeded results here are stable
/// across platforms and standard libraries.
class SplitMix64 {
 public:
  explicit SplitMix64(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random mantissa bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [0, bound), unbiased (rejection sampling). bound must be > 0.
  uint64_t next_below(uint64_t bound) {
    const uint64_t threshold = -bound % bound;
    for (;;) {
      uint64_t r = next_u64();
      if (r >= threshold) return r % bound;
    }
  }

  /// Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(next_below(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  uint64_t state_;
};

/// Derives an independent seed for a numbered stream. Plain `seed + stream`
/// would make splitmix streams overlap, so both inputs go through the mixer.
inline uint64_t mix_seed(uint64_t seed, uint64_t stream) {
  SplitMix64 a(seed);
  SplitMix64 b(stream ^ 0xA02BDBF7BB3C0A7ULL);
  uint64_t x = a.next_u64();
  uint64_t y = b.next_u64();
  return SplitMix64(x ^ (y + 0x9E3779B97F4A7C15ULL)).next_u64();
}

}  // namespace corrnet
