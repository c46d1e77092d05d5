#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "softquant/geometry.hpp"
#include "softquant/matrix.hpp"
#include "softquant/rng.hpp"

namespace softquant {

using Point = std::vector<double>;

// ---------------------------------------------------------------------------
// Source distributions the sampler understands.

struct Normal1d {
  double mean = 0.0;
  double stddev = 1.0;
};

struct Exponential {
  double rate = 1.0;
};

struct GammaDist {
  double shape = 1.0;  // mean = shape * scale
  double scale = 1.0;
};

struct UniformBox {
  std::vector<double> lo, hi;  // axis-aligned box, lo[l] < hi[l]
};

struct MvNormal {
  std::vector<double> mean;
  Matrix cov;  // symmetric positive definite
};

struct Empirical {
  std::vector<Point> points;  // sampled uniformly with replacement
};

// A sampleable source measure.  Validation happens at construction; the
// factory helpers are the usual way to build one.
class SourceSpec {
 public:
  using Dist = std::variant<Normal1d, Exponential, GammaDist, UniformBox,
                            MvNormal, Empirical>;

  SourceSpec() : SourceSpec(Normal1d{}) {}
  explicit SourceSpec(Dist dist);  // throws std::invalid_argument on bad params

  static SourceSpec normal1d(double mean, double stddev);
  static SourceSpec exponential(double rate);
  static SourceSpec gamma(double shape, double scale);
  static SourceSpec uniform_box(std::vector<double> lo, std::vector<double> hi);
  static SourceSpec mvnormal(std::vector<double> mean, Matrix cov);
  static SourceSpec empirical(std::vector<Point> points);

  const Dist& dist() const { return dist_; }
  std::size_t dim() const { return dim_; }

  // Trace of the covariance (closed form per family; computed for
  // empirical).  Drives default step sizes and merge radii.
  double total_variance() const;

  // One draw written to `out` (size dim()), consuming `rng` as needed.
  void sample_point(Rng& rng, std::span<double> out) const;

 private:
  Dist dist_;
  std::size_t dim_ = 1;
  Matrix chol_;  // cached Cholesky factor for MvNormal
};

// Stream-offset base for public sampling: draw i of sample(spec, n, seed)
// uses Rng(seed, kSampleStream + i), so any prefix or partition of the
// sample reproduces bit-identically.
inline constexpr std::uint64_t kSampleStream = 1ULL << 56;

// n i.i.d. draws; bit-identical for identical (spec, n, seed).
std::vector<Point> sample(const SourceSpec& spec, std::size_t n,
                          std::uint64_t seed);

// Minimizer of E dist(y, xi)^r over a single point y, estimated from n
// draws.  For r == 2 with the unweighted Euclidean metric this is the
// sample mean in closed form; other (p, r) run the one-atom stochastic
// optimizer on the same budget.
Point center_of_measure(const SourceSpec& spec, const DistanceSpec& dspec,
                        std::size_t n, std::uint64_t seed);

// Generic one-atom stochastic minimizer (no closed-form shortcut); exposed
// so the shortcut can be cross-checked against it.
Point center_of_measure_generic(const SourceSpec& spec, const DistanceSpec& dspec,
                                std::size_t n, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Finitely supported measures (quantizer outputs, plan marginals).

struct DiscreteMeasure {
  std::vector<Point> atoms;
  std::vector<double> weights;

  std::size_t size() const { return atoms.size(); }
  // Throws std::invalid_argument on empty/mismatched atoms, non-finite
  // entries, negative weights, or weights not summing to 1 (1e-10).
  void validate() const;
};

// Right-continuous CDF knots of a one-dimensional discrete measure:
// (location, cumulative weight) sorted by location, duplicates merged.
std::vector<std::pair<double, double>> empirical_cdf(const DiscreteMeasure& m);

// One-line human-readable description, e.g. "normal1d mean=0 stddev=1".
std::string describe(const SourceSpec& spec);

}  // namespace softquant
