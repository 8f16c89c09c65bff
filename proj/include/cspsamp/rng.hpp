#pragma once

#include <cassert>
#include <cstdint>
#include <random>

namespace cspsamp {

inline uint64_t splitmix64(uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// mt19937_64 behind a fixed drawing interface. Seeds are mixed through
// splitmix64 so that low-entropy seeds (0, 1, 2, ...) still start the
// generator in unrelated states.
class Rng {
 public:
  explicit Rng(uint64_t seed) : gen_(splitmix64(seed)) {}

  uint64_t next() { return gen_(); }

  // Uniform over {0, ..., n-1} without modulo bias: draws below the largest
  // multiple of n are rejected.
  uint64_t below(uint64_t n) {
    assert(n > 0);
    const uint64_t threshold = (0 - n) % n;
    for (;;) {
      const uint64_t r = gen_();
      if (r >= threshold) return r % n;
    }
  }

  // Uniform in [0,1) with 53-bit resolution.
  double unit() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Seed for stream `index` of a run keyed by `master`. Injective in `index`
  // for a fixed master: index |-> splitmix64(mix ^ odd*index) composes
  // bijections on 64-bit words.
  static uint64_t stream_seed(uint64_t master, uint64_t index) {
    return splitmix64(splitmix64(master) ^ (0x9e3779b97f4a7c15ull * (index + 1)));
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace cspsamp
