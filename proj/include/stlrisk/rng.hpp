#pragma once

#include <cstdint>

namespace stlrisk {

/// Counter-based random stream: value i of stream s under a seed is a pure
/// function of (seed, s, i), so trace generation is reproducible regardless
/// of evaluation order or parallelism.
class CounterRng {
public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t bits(std::uint64_t stream, std::uint64_t index) const {
    return mix(seed_ ^ mix(stream ^ mix(index)));
  }

  /// Uniform draw strictly inside (0, 1); safe for inverse-CDF sampling.
  double uniform01(std::uint64_t stream, std::uint64_t index) const {
    const std::uint64_t b = bits(stream, index);
    return (static_cast<double>(b >> 11) + 0.5) * 0x1.0p-53;
  }

private:
  // splitmix64 finalizer
  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

  std::uint64_t seed_;
};

} // namespace stlrisk
