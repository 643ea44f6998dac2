#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace lexis {

// Deterministic randomness layer: a fixed engine plus hand-written scalar
// transforms. Standard-library distributions are implementation-defined, so
// every draw here is spelled out to keep streams bit-identical across
// toolchains and across runs.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform on [0,1) with 53 random bits.
  double uniform01() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) {
    return lo + (hi - lo) * uniform01();
  }

  // Exponential waiting time with the given rate (rate > 0).
  double exponential(double rate) {
    return -std::log1p(-uniform01()) / rate;
  }

  // Uniform integer in [0, n), n >= 1, by masked rejection (exact, unbiased).
  std::uint64_t uniform_below(std::uint64_t n) {
    if (n <= 1) return 0;
    std::uint64_t mask = n - 1;
    mask |= mask >> 1;
    mask |= mask >> 2;
    mask |= mask >> 4;
    mask |= mask >> 8;
    mask |= mask >> 16;
    mask |= mask >> 32;
    for (;;) {
      std::uint64_t v = engine_() & mask;
      if (v < n) return v;
    }
  }

 private:
  std::mt19937_64 engine_;
};

// splitmix64 finalizer.
inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

// Seed for replication stream `index` under a root seed. Documented rule:
// the root is XORed with the golden-ratio multiple of (index+1) and passed
// through the splitmix64 finalizer. Distinct indices give distinct streams.
inline std::uint64_t derive_stream(std::uint64_t root, std::uint64_t index) {
  return mix64(root ^ (0x9E3779B97F4A7C15ull * (index + 1)));
}

}  // namespace lexis
