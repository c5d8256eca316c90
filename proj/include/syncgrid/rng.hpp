#pragma once

#include <cstdint>
#include <random>

namespace syncgrid {

// Seedable 64-bit PRNG used wherever the project needs randomness.
//
// The raw stream is std::mt19937_64, whose output sequence is fixed by the
// C++ standard. Bounded integers and unit doubles are derived here by hand
// because the <random> distributions are not portable across standard
// library implementations.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(seed) {}

  uint64_t next_u64() { return gen_(); }

  // Unbiased integer in [0, n). Rejection sampling on the top of the range.
  uint64_t below(uint64_t n) {
    if (n == 0) return 0;
    const uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  int below_int(int n) { return static_cast<int>(below(static_cast<uint64_t>(n))); }

  // Double in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double range(double lo, double hi) { return lo + (hi - lo) * unit(); }

  // Hash-derive an independent child seed for a named substream.
  static uint64_t derive(uint64_t seed, uint64_t stream) {
    uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace syncgrid
