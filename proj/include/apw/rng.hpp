#pragma once

// Deterministic random streams. The engine is std::mt19937_64 (bit-exact by
// the standard); every distribution transform is spelled out here because
// the <random> distribution classes are implementation-defined and would
// break the byte-identical-artifacts contract across toolchains.

#include <cstdint>
#include <random>
#include <vector>

#include "apw/util.hpp"

namespace apw {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t raw() { return engine_(); }

  // Uniform on [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n) via rejection.
  std::size_t index(std::size_t n) {
    require(n > 0, "Rng::index: empty range");
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return static_cast<std::size_t>(x % n);
  }

  // Standard normal via Box-Muller; no cached spare so the draw count per
  // call is fixed.
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    return r * std::cos(6.283185307179586476925286766559 * u2);
  }

  // Marsaglia-Tsang; shapes below one are boosted through shape+1.
  double gamma(double shape) {
    require(shape > 0.0, "Rng::gamma: shape must be positive");
    if (shape < 1.0) {
      const double g = gamma(shape + 1.0);
      double u = uniform();
      while (u <= 0.0) u = uniform();
      return g * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double v = 1.0 + c * x;
      if (v <= 0.0) continue;
      v = v * v * v;
      const double u = uniform();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v;
      if (u > 0.0 && std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v)))
        return d * v;
    }
  }

  double beta(double a, double b) {
    const double ga = gamma(a);
    const double gb = gamma(b);
    return ga / (ga + gb);
  }

  // Fisher-Yates.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = index(i);
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
};

// Independent per-purpose streams derived from one run seed by fixed
// offsets, so enabling one consumer (say mixup pairing) never perturbs
// another (say data generation).
struct SeedStreams {
  explicit SeedStreams(std::uint64_t seed)
      : data(splitmix64(seed + 1)),
        shuffle(splitmix64(seed + 2)),
        mixup(splitmix64(seed + 3)),
        init(splitmix64(seed + 4)) {}

  Rng data;
  Rng shuffle;
  Rng mixup;
  Rng init;
};

}  // namespace apw
