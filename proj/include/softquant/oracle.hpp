#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "softquant/matrix.hpp"
#include "softquant/objective.hpp"

namespace softquant {

// Coupling between a discrete source (rows) and a discrete quantizer
// (columns): non-negative entries of total mass 1.
struct TransportPlan {
  Matrix pi;

  std::size_t rows() const { return pi.rows; }
  std::size_t cols() const { return pi.cols; }
  std::vector<double> row_marginal() const;
  std::vector<double> col_marginal() const;
  double total_mass() const;
  // Throws std::invalid_argument on empty shape, non-finite or negative
  // entries, or total mass != 1 (1e-12).
  void validate() const;
};

// A fully discrete relaxed-transport problem: minimize over couplings pi
// with row marginal `source_weights`
//   sum_ij pi_ij cost_ij + lambda * D(pi || source_weights (x) quant_weights).
struct DiscreteInstance {
  std::vector<double> source_weights;  // row marginal, probability vector
  std::vector<double> quant_weights;   // reference column weights, probability vector
  Matrix cost;                         // rows x cols, finite entries
  double lambda = 1.0;                 // must be > 0

  void validate() const;  // throws std::invalid_argument
};

// Exact optimal value via the smoothed minimum of each cost row:
//   sum_i P_i * smooth_min_lambda(cost_i* ; quant_weights).
double closed_form_value(const DiscreteInstance& inst);

// Exact minimizer: pi_ij = P_i * q_j exp(-c_ij/lambda) / sum_k q_k exp(-c_ik/lambda).
// Rows sum to P_i; the plan's support is contained in the product support.
TransportPlan optimal_plan(const DiscreteInstance& inst);

// Independent numerical minimization: each row's conditional distribution
// is optimized over the simplex by exponentiated-gradient descent, stopped
// once the per-iteration objective decrease falls below `tol` and the
// convexity duality gap certifies the row optimum to the same accuracy.
struct BruteForceResult {
  double value = 0.0;
  TransportPlan plan;
  std::size_t iterations = 0;  // total descent iterations across rows
};

BruteForceResult brute_force_solve(const DiscreteInstance& inst, double tol = 1e-12);
double brute_force_value(const DiscreteInstance& inst, double tol = 1e-12);

// Objective of an arbitrary feasible plan under the divergence form:
// E_pi cost + lambda * D(pi || P (x) Q).  Infinite if the plan leaves the
// product support.
Divergence plan_objective(const TransportPlan& plan, const DiscreteInstance& inst);

// Divergence of a plan against the product of its own row reference and
// original vs. projected column reference:
//   original  = D(pi || P (x) Q)
//   projected = D(pi || P (x) pi_2),  pi_2 the plan's own column marginal.
// Their gap equals D(pi_2 || Q); projecting can only shrink the divergence.
// Requires the plan's row marginal to equal P within 1e-8.
struct ProjectionGap {
  Divergence original = Divergence::infinite();
  Divergence projected = Divergence::infinite();
};

ProjectionGap marginal_projection_gap(const TransportPlan& plan,
                                      std::span<const double> source_weights,
                                      std::span<const double> quant_weights);

// Objective of a feasible plan under the entropy form: E_pi cost - lambda H(pi).
// Differs from the divergence form by the constant lambda*(H(P) + H(Q));
// requires both marginals to match within 1e-8.
double entropy_form_value(const TransportPlan& plan, const DiscreteInstance& inst);

}  // namespace softquant
