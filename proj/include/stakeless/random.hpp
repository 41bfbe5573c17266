#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace stakeless {

/// Seedable uniform stream with a portable Poisson sampler.
///
/// Only the raw 64-bit engine output is consumed, so sequences are identical
/// across standard library implementations. Independent streams for parallel
/// work are derived from (seed, index).
class RandomStream {
 public:
  explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

  static RandomStream derived(std::uint64_t seed, std::uint64_t index) {
    return RandomStream(mix(seed ^ mix(index + 0x9E3779B97F4A7C15ULL)));
  }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) { return static_cast<std::uint64_t>(uniform() * static_cast<double>(n)); }

  /// Poisson draw by sequential inversion of the CDF.
  int poisson(double lambda) {
    if (!(lambda > 0.0)) return 0;
    const double u = uniform();
    double p = std::exp(-lambda);
    double cdf = p;
    int k = 0;
    while (u >= cdf && k < 1000) {
      ++k;
      p *= lambda / k;
      cdf += p;
      if (p == 0.0 && cdf < u) break;  // tail underflow; u sits in rounding slack
    }
    return k;
  }

 private:
  // SplitMix64 finaliser.
  static constexpr std::uint64_t mix(std::uint64_t z) {
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::mt19937_64 engine_;
};

}  // namespace stakeless
