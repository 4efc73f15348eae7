#pragma once

#include <cstdint>

namespace tailatlas {

/// Counter-based generator: every draw is a stateless hash of
/// (seed, stream, substream, counter), so stream i can be regenerated in
/// isolation and results do not depend on which thread consumed which draw.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0,
             std::uint64_t substream = 0)
      : base_(mix(mix(mix(seed + kGamma) ^ stream) ^ substream)) {}

  std::uint64_t next_u64() { return mix(base_ + (++counter_) * kGamma); }

  /// Uniform on [0, 1) with 53 significant bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform on [lo, hi).
  double next_double(double lo, double hi) {
    return lo + (hi - lo) * next_double();
  }

  /// Uniform on {0, ..., n-1} by rejection, exact for any n >= 1.
  std::uint64_t next_below(std::uint64_t n) {
    const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
    std::uint64_t x = next_u64();
    while (x >= limit) x = next_u64();
    return x % n;
  }

 private:
  static constexpr std::uint64_t kGamma = 0x9E3779B97F4A7C15ull;

  static std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
  }

  std::uint64_t base_ = 0;
  std::uint64_t counter_ = 0;
};

}  // namespace tailatlas
