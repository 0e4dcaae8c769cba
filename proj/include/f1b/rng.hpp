#pragma once

#include <cstdint>

namespace f1b {

// SplitMix64 finalizer (Steele/Lea/Vigna). Doubles as the hash used to
// derive independent child seeds.
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

// Child seed for stream `key` under `seed`. Every random quantity in the
// project is reached from one master seed through chains of derive_seed,
// so results are independent of execution order and worker count.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key) noexcept {
  return mix64(seed + kGoldenGamma * (key + 1));
}

// Counter-based generator: output i is mix64(seed + (i+1)*gamma). Cheap to
// construct, so one instance per sample path is the normal usage.
class SplitMix64 {
 public:
  using result_type = std::uint64_t;

  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  // Uniform on [0, bound). Rejection keeps the draw exactly uniform.
  constexpr std::uint64_t next_below(std::uint64_t bound) noexcept {
    const std::uint64_t threshold = (0 - bound) % bound;
    for (;;) {
      const std::uint64_t x = next();
      if (x >= threshold) return x % bound;
    }
  }

  // +1 or -1 with equal probability, taken from the top (best mixed) bit.
  constexpr int next_sign() noexcept { return (next() >> 63) ? +1 : -1; }

  // Uniform double in [0, 1).
  constexpr double next_unit() noexcept {
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  constexpr double next_uniform(double lo, double hi) noexcept {
    return lo + (hi - lo) * next_unit();
  }

 private:
  std::uint64_t state_;
};

}  // namespace f1b
