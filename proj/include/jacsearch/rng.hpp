#pragma once

#include <cstdint>

namespace jacsearch {

inline uint64_t mix64(uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

struct SplitMix64 {
  uint64_t state = 0;

  SplitMix64() = default;
  explicit SplitMix64(uint64_t seed) : state(seed) {}

  uint64_t next() { return mix64(state += 0x9E3779B97F4A7C15ull); }

  // Uniform in [0, bound), bound > 0, by rejection.
  uint64_t next_below(uint64_t bound) {
    uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      uint64_t r = next();
      if (r >= threshold) return r % bound;
    }
  }

  // Uniform in [lo, hi] inclusive.
  uint64_t next_range(uint64_t lo, uint64_t hi) {
    return lo + next_below(hi - lo + 1);
  }
};

// Stream for one work item. Depends only on (seed, tag), so results are
// identical no matter how items are sharded across workers or runs.
inline SplitMix64 rng_for(uint64_t seed, uint64_t tag) {
  return SplitMix64(mix64(seed ^ 0x9E3779B97F4A7C15ull) ^
                    mix64(tag + 0x632BE59BD9B4E019ull));
}

}  // namespace jacsearch
