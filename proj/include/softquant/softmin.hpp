#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "softquant/matrix.hpp"

namespace softquant {

// A finite list of real values with a probability weight per entry.
// Weights must be non-negative and sum to 1 (within 1e-12); zero-weight
// entries are allowed and simply carry no mass.
struct WeightedValues {
  std::vector<double> values;
  std::vector<double> weights;

  std::size_t size() const { return values.size(); }
  // Throws std::invalid_argument on empty support, size mismatch,
  // non-finite entries, negative weights, or weights not summing to 1.
  void validate() const;
};

// Smoothing temperature; lambda == 0 selects the hard (un-smoothed) limit.
struct Regularization {
  double lambda = 0.0;
};

// Smoothed minimum: -lambda * log sum_j w_j exp(-x_j / lambda), computed
// with a max-shift so extreme values and tiny lambda cannot overflow.
// At lambda == 0 this is the plain minimum over entries with positive weight.
double smooth_min(const WeightedValues& wv, Regularization reg);

// Normalized Gibbs response: sigma_j = exp(-x_j/lambda) / sum_k w_k exp(-x_k/lambda).
// Defined for lambda > 0 only (lambda == 0 callers want hard_assignment).
// Satisfies sum_j w_j sigma_j == 1.
std::vector<double> softmin(const WeightedValues& wv, Regularization reg);

// Index of the smallest value among entries with positive weight;
// ties break to the lowest index.
std::size_t hard_assignment(const WeightedValues& wv);

// Gradient of smooth_min with respect to the values: g_j = w_j * sigma_j.
// Entries are non-negative and sum to 1.
std::vector<double> smin_gradient(const WeightedValues& wv, Regularization reg);

// Hessian of smooth_min with respect to the values:
//   H = -(1/lambda) * (diag(g) - g g^T),   g = smin_gradient.
// Symmetric, negative semidefinite, rows sum to zero.
Matrix smin_hessian(const WeightedValues& wv, Regularization reg);

// Collapse the values onto a partition: block b becomes one entry whose
// value is the smoothed minimum of the block under renormalized weights and
// whose weight is the block's total mass.  `blocks[j]` names the block of
// entry j; blocks 0..max(blocks) must all be non-empty.  Nesting holds:
// smooth_min of the result equals smooth_min of the input.
WeightedValues conditional_smooth_min(const WeightedValues& wv,
                                      std::span<const int> blocks,
                                      Regularization reg);

// Population cumulants (1/n normalization) of a plain sample.
struct CumulantSummary {
  double mean = 0.0;
  double variance = 0.0;
  double third_central = 0.0;  // third central moment == third cumulant
};

CumulantSummary cumulants(std::span<const double> values);

// Large-lambda expansion of the smoothed minimum of a uniformly weighted
// sample:  order 1: mean;  order 2: mean - variance/(2 lambda);
// order 3: adds + third_cumulant/(6 lambda^2).  Requires lambda > 0.
double cumulant_expansion(std::span<const double> values, Regularization reg,
                          int order);

namespace detail {

// Span kernels used by the hot paths; they assume weights already form a
// probability vector and skip revalidation, but stay max-shift stable.
double smooth_min_positive_lambda(std::span<const double> values,
                                  std::span<const double> weights, double lambda);
double hard_min_positive_weight(std::span<const double> values,
                                std::span<const double> weights);
std::size_t hard_min_index(std::span<const double> values,
                           std::span<const double> weights);
// Writes sigma into `out`; returns the shifted partition sum (> 0).
double softmin_into(std::span<const double> values, std::span<const double> weights,
                    double lambda, std::span<double> out);

}  // namespace detail

}  // namespace softquant
