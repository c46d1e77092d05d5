#pragma once

#include <cstdint>
#include <vector>

#include "softquant/geometry.hpp"
#include "softquant/matrix.hpp"
#include "softquant/measures.hpp"
#include "softquant/quantizer_state.hpp"

namespace softquant {

// Monte Carlo estimate of the regularized quantization error
//   E_xi smooth_min_lambda( dist(xi, y_1)^r, ..., dist(xi, y_m)^r ; weights )
// (plain nearest-atom error at lambda == 0).
struct SoftObjectiveEstimate {
  double value = 0.0;
  double std_error = 0.0;
  std::size_t samples = 0;
};

SoftObjectiveEstimate soft_objective(const QuantizerState& state,
                                     const SourceSpec& source,
                                     const DistanceSpec& dspec, double lambda,
                                     std::size_t n, std::uint64_t seed);

// Weight vector that is optimal for fixed locations: the expected softmin
// response q_j = E_xi sigma_lambda(dist(xi, y)^r)_j, estimated from n draws.
// The reweighted vector (w_j * q_j) sums to 1.  Requires lambda > 0.
std::vector<double> optimal_weights(const QuantizerState& state,
                                    const SourceSpec& source,
                                    const DistanceSpec& dspec, double lambda,
                                    std::size_t n, std::uint64_t seed);

// Fraction of samples hard-assigned to each atom (the Voronoi cell masses
// under the ground distance, tie going to the lowest index).
std::vector<double> voronoi_weights(const QuantizerState& state,
                                    const SourceSpec& source,
                                    const DistanceSpec& dspec, std::size_t n,
                                    std::uint64_t seed);

// Row i holds the soft assignment of points[i] over the m atoms:
// w_j * sigma_j for lambda > 0, a one-hot row at the hard assignment for
// lambda == 0.  Every row sums to 1.
Matrix tessellation_probabilities(const std::vector<Point>& points,
                                  const QuantizerState& state,
                                  const DistanceSpec& dspec, double lambda);

// Kullback-Leibler divergence value that may be infinite (support
// violation); kept as an explicit variant so +inf never leaks into
// arithmetic unnoticed.
class Divergence {
 public:
  static Divergence finite(double v) { return Divergence(v, false); }
  static Divergence infinite() { return Divergence(0.0, true); }

  bool is_infinite() const { return infinite_; }
  // Throws std::logic_error when infinite.
  double value() const;

 private:
  Divergence(double v, bool inf) : value_(v), infinite_(inf) {}
  double value_;
  bool infinite_;
};

// D(q || p) over a shared ground set (atoms matched by index; they must
// coincide).  Infinite when q puts mass where p has none.
Divergence kl_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p);

// Shannon entropy H(p) = -sum p log p  (0 log 0 = 0); always >= 0.
double entropy(const DiscreteMeasure& p);

// Cross entropy H(q, p) = -sum q log p; +inf on support violation, and
// H(q, p) = H(q) + D(q||p) when the divergence is finite.
double cross_entropy(const DiscreteMeasure& q, const DiscreteMeasure& p);

}  // namespace softquant
