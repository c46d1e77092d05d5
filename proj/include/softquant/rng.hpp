#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace softquant {

// Counter-based pseudo-random generator.
//
// Every (seed, stream, counter) triple maps to one 64-bit word through a
// stateless mixing function, so disjoint streams can be consumed in any
// order -- or concurrently -- and still reproduce bit-identically.  This is
// what makes sampling reproducible across runs and across batch/thread
// partitionings: stream identity is data, not hidden generator state.
class Rng {
 public:
  explicit Rng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(derive_key(seed, stream)) {}

  // Child generator with its own decorrelated stream, independent of how
  // many values the parent has produced.
  Rng substream(std::uint64_t index) const {
    Rng child(*this);
    child.key_ = mix(key_ ^ mix(index + 0x632be59bd9b4e019ULL));
    child.counter_ = 0;
    child.has_cached_normal_ = false;
    return child;
  }

  std::uint64_t next_u64() { return mix(key_ + (++counter_) * kGolden); }

  // Uniform on [0, 1), 53-bit resolution.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform on (0, 1]; safe to pass through log().
  double uniform_positive() {
    return static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;
  }

  // Standard normal via Box-Muller; generates pairs and caches the spare.
  double normal() {
    if (has_cached_normal_) {
      has_cached_normal_ = false;
      return cached_normal_;
    }
    const double u = uniform_positive();
    const double v = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u));
    const double angle = 2.0 * kPi * v;
    cached_normal_ = radius * std::sin(angle);
    has_cached_normal_ = true;
    return radius * std::cos(angle);
  }

  // Exponential with the given rate, by inverse CDF.
  double exponential(double rate) { return -std::log(uniform_positive()) / rate; }

  // Gamma(shape, scale) via Marsaglia-Tsang squeeze; the shape < 1 case is
  // boosted through Gamma(shape + 1) * U^{1/shape}.
  double gamma(double shape, double scale) {
    if (shape < 1.0) {
      const double boost = std::pow(uniform_positive(), 1.0 / shape);
      return gamma(shape + 1.0, scale) * boost;
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
      double x = normal();
      double t = 1.0 + c * x;
      if (t <= 0.0) continue;
      const double v = t * t * t;
      const double u = uniform_positive();
      const double x2 = x * x;
      if (u < 1.0 - 0.0331 * x2 * x2) return d * v * scale;
      if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v * scale;
    }
  }

  // Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) throw std::invalid_argument("below: empty range");
    // Multiply-shift rejection-free mapping; bias is < 2^-53 for desk-scale n.
    return static_cast<std::uint64_t>(uniform() * static_cast<double>(n));
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr double kPi = 3.14159265358979323846;

  // SplitMix64 finalizer: full-avalanche 64-bit mix.
  static std::uint64_t mix(std::uint64_t z) {
    z ^= z >> 30;
    z *= 0xbf58476d1ce4e5b9ULL;
    z ^= z >> 27;
    z *= 0x94d049bb133111ebULL;
    z ^= z >> 31;
    return z;
  }

  static std::uint64_t derive_key(std::uint64_t seed, std::uint64_t stream) {
    return mix(mix(seed + kGolden) ^ mix(stream + 0xd1b54a32d192ed03ULL));
  }

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  double cached_normal_ = 0.0;
  bool has_cached_normal_ = false;
};

}  // namespace softquant
