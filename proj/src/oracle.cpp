#include "softquant/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "softquant/softmin.hpp"

namespace softquant {

namespace {

constexpr std::size_t kMaxCells = 64;  // brute force is desk-scale only

void check_probability_vector(std::span<const double> w, const char* what) {
  if (w.empty()) throw std::invalid_argument(std::string(what) + ": empty support");
  double total = 0.0;
  for (double v : w) {
    if (!std::isfinite(v)) throw std::invalid_argument(std::string(what) + ": non-finite value");
    if (v < 0.0) throw std::invalid_argument(std::string(what) + ": negative weight");
    total += v;
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument(std::string(what) + ": weights must sum to 1");
}

}  // namespace

std::vector<double> TransportPlan::row_marginal() const {
  std::vector<double> out(pi.rows, 0.0);
  for (std::size_t i = 0; i < pi.rows; ++i)
    for (std::size_t j = 0; j < pi.cols; ++j) out[i] += pi(i, j);
  return out;
}

std::vector<double> TransportPlan::col_marginal() const {
  std::vector<double> out(pi.cols, 0.0);
  for (std::size_t i = 0; i < pi.rows; ++i)
    for (std::size_t j = 0; j < pi.cols; ++j) out[j] += pi(i, j);
  return out;
}

double TransportPlan::total_mass() const {
  double total = 0.0;
  for (double v : pi.data) total += v;
  return total;
}

void TransportPlan::validate() const {
  if (pi.rows == 0 || pi.cols == 0) throw std::invalid_argument("empty support");
  for (double v : pi.data) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
    if (v < 0.0) throw std::invalid_argument("negative plan entry");
  }
  if (std::abs(total_mass() - 1.0) > 1e-12)
    throw std::invalid_argument("plan mass must be 1");
}

void DiscreteInstance::validate() const {
  check_probability_vector(source_weights, "source weights");
  check_probability_vector(quant_weights, "quantizer weights");
  if (cost.rows != source_weights.size() || cost.cols != quant_weights.size())
    throw std::invalid_argument("cost shape mismatch");
  for (double v : cost.data)
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
  if (!(lambda > 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("regularization must be finite and > 0");
}

double closed_form_value(const DiscreteInstance& inst) {
  inst.validate();
  double value = 0.0;
  for (std::size_t i = 0; i < inst.cost.rows; ++i) {
    if (inst.source_weights[i] == 0.0) continue;
    std::span<const double> row(inst.cost.data.data() + i * inst.cost.cols,
                                inst.cost.cols);
    value += inst.source_weights[i] *
             detail::smooth_min_positive_lambda(row, inst.quant_weights, inst.lambda);
  }
  return value;
}

TransportPlan optimal_plan(const DiscreteInstance& inst) {
  inst.validate();
  const std::size_t n = inst.cost.rows, m = inst.cost.cols;
  TransportPlan plan;
  plan.pi = Matrix(n, m, 0.0);
  std::vector<double> sigma(m);
  for (std::size_t i = 0; i < n; ++i) {
    if (inst.source_weights[i] == 0.0) continue;
    std::span<const double> row(inst.cost.data.data() + i * m, m);
    detail::softmin_into(row, inst.quant_weights, inst.lambda, sigma);
    for (std::size_t j = 0; j < m; ++j)
      plan.pi(i, j) = inst.source_weights[i] * inst.quant_weights[j] * sigma[j];
  }
  return plan;
}

namespace {

// Objective of one row's conditional distribution z over the columns:
//   f(z) = sum_j z_j c_j + lambda * sum_j z_j log(z_j / q_j),
// with the convention 0 log 0 = 0.  Infinite if z leaves q's support, which
// the descent below never does (it starts inside and stays multiplicative).
double row_objective(std::span<const double> z, std::span<const double> c,
                     std::span<const double> q, double lambda) {
  double f = 0.0;
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] == 0.0) continue;
    f += z[j] * c[j] + lambda * z[j] * std::log(z[j] / q[j]);
  }
  return f;
}

// Minimizes row_objective over the probability simplex by exponentiated
// gradient descent with step 1/(2 lambda).  Convergence is declared when
// the objective decrease drops below tol AND the first-order duality gap
//   <grad, z> - min_j grad_j   (an upper bound on f(z) - f* by convexity)
// certifies the same accuracy.  Returns total iterations used.
std::size_t minimize_row(std::span<const double> c, std::span<const double> q,
                         double lambda, double tol, std::span<double> z) {
  const std::size_t m = c.size();
  // Restrict to the reference support: any mass outside it costs +inf.
  std::size_t support = 0;
  for (std::size_t j = 0; j < m; ++j)
    if (q[j] > 0.0) ++support;
  if (support == 0) throw std::invalid_argument("empty support");
  for (std::size_t j = 0; j < m; ++j)
    z[j] = q[j] > 0.0 ? 1.0 / static_cast<double>(support) : 0.0;

  const double eta = 0.5 / lambda;
  std::vector<double> grad(m, 0.0);
  double f_prev = row_objective(z, c, q, lambda);
  const std::size_t max_iter = 100000;
  for (std::size_t it = 1; it <= max_iter; ++it) {
    double grad_min = 0.0;
    double grad_dot_z = 0.0;
    bool first = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (q[j] == 0.0) continue;
      grad[j] = c[j] + lambda * (std::log(z[j] / q[j]) + 1.0);
      grad_dot_z += grad[j] * z[j];
      if (first || grad[j] < grad_min) grad_min = grad[j];
      first = false;
    }
    const double gap = grad_dot_z - grad_min;

    // Multiplicative update, shift-stabilized before exponentiation.
    double arg_max = 0.0;
    first = true;
    for (std::size_t j = 0; j < m; ++j) {
      if (q[j] == 0.0) continue;
      const double a = std::log(z[j]) - eta * grad[j];
      z[j] = a;  // stash the log temporarily
      if (first || a > arg_max) arg_max = a;
      first = false;
    }
    double total = 0.0;
    for (std::size_t j = 0; j < m; ++j) {
      if (q[j] == 0.0) continue;
      z[j] = std::exp(z[j] - arg_max);
      total += z[j];
    }
    for (std::size_t j = 0; j < m; ++j)
      if (q[j] > 0.0) z[j] /= total;

    const double f = row_objective(z, c, q, lambda);
    if (f_prev - f < tol && gap < tol) return it;
    f_prev = f;
  }
  throw std::runtime_error("brute force row minimization failed to converge");
}

}  // namespace

BruteForceResult brute_force_solve(const DiscreteInstance& inst, double tol) {
  inst.validate();
  if (!(tol > 0.0)) throw std::invalid_argument("tolerance must be > 0");
  const std::size_t n = inst.cost.rows, m = inst.cost.cols;
  if (n * m > kMaxCells)
    throw std::invalid_argument("brute force limited to desk-scale instances");

  // The row marginal is pinned, so the plan decomposes as pi_ij = P_i z_ij
  // with each z_i an independent convex problem over the simplex.
  BruteForceResult result;
  result.plan.pi = Matrix(n, m, 0.0);
  std::vector<double> z(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    std::span<const double> row(inst.cost.data.data() + i * m, m);
    if (inst.source_weights[i] == 0.0) {
      // Massless row: contributes nothing; park it on the reference.
      for (std::size_t j = 0; j < m; ++j) result.plan.pi(i, j) = 0.0;
      continue;
    }
    result.iterations += minimize_row(row, inst.quant_weights, inst.lambda, tol, z);
    result.value += inst.source_weights[i] *
                    row_objective(z, row, inst.quant_weights, inst.lambda);
    for (std::size_t j = 0; j < m; ++j)
      result.plan.pi(i, j) = inst.source_weights[i] * z[j];
  }
  return result;
}

double brute_force_value(const DiscreteInstance& inst, double tol) {
  return brute_force_solve(inst, tol).value;
}

Divergence plan_objective(const TransportPlan& plan, const DiscreteInstance& inst) {
  plan.validate();
  inst.validate();
  if (plan.rows() != inst.cost.rows || plan.cols() != inst.cost.cols)
    throw std::invalid_argument("plan shape mismatch");
  double value = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      const double p = plan.pi(i, j);
      if (p == 0.0) continue;
      const double ref = inst.source_weights[i] * inst.quant_weights[j];
      if (ref == 0.0) return Divergence::infinite();
      value += p * inst.cost(i, j) + inst.lambda * p * std::log(p / ref);
    }
  }
  return Divergence::finite(value);
}

ProjectionGap marginal_projection_gap(const TransportPlan& plan,
                                      std::span<const double> source_weights,
                                      std::span<const double> quant_weights) {
  plan.validate();
  check_probability_vector(source_weights, "source weights");
  check_probability_vector(quant_weights, "quantizer weights");
  if (plan.rows() != source_weights.size() || plan.cols() != quant_weights.size())
    throw std::invalid_argument("plan shape mismatch");
  const std::vector<double> row = plan.row_marginal();
  for (std::size_t i = 0; i < row.size(); ++i)
    if (std::abs(row[i] - source_weights[i]) > 1e-8)
      throw std::invalid_argument("plan row marginal does not match source weights");

  const std::vector<double> col = plan.col_marginal();
  ProjectionGap gap;
  double original = 0.0, projected = 0.0;
  bool original_finite = true;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      const double p = plan.pi(i, j);
      if (p == 0.0) continue;
      // A positive entry forces positive marginals, so the projected
      // reference P (x) pi_2 always covers the plan's support.
      projected += p * std::log(p / (source_weights[i] * col[j]));
      if (original_finite) {
        const double ref = source_weights[i] * quant_weights[j];
        if (ref == 0.0)
          original_finite = false;
        else
          original += p * std::log(p / ref);
      }
    }
  }
  gap.projected = Divergence::finite(projected);
  gap.original = original_finite ? Divergence::finite(original)
                                 : Divergence::infinite();
  return gap;
}

double entropy_form_value(const TransportPlan& plan, const DiscreteInstance& inst) {
  plan.validate();
  inst.validate();
  if (plan.rows() != inst.cost.rows || plan.cols() != inst.cost.cols)
    throw std::invalid_argument("plan shape mismatch");
  const std::vector<double> row = plan.row_marginal();
  const std::vector<double> col = plan.col_marginal();
  for (std::size_t i = 0; i < row.size(); ++i)
    if (std::abs(row[i] - inst.source_weights[i]) > 1e-8)
      throw std::invalid_argument("plan row marginal does not match source weights");
  for (std::size_t j = 0; j < col.size(); ++j)
    if (std::abs(col[j] - inst.quant_weights[j]) > 1e-8)
      throw std::invalid_argument("plan column marginal does not match quantizer weights");

  double value = 0.0;
  for (std::size_t i = 0; i < plan.rows(); ++i) {
    for (std::size_t j = 0; j < plan.cols(); ++j) {
      const double p = plan.pi(i, j);
      if (p == 0.0) continue;
      value += p * inst.cost(i, j) + inst.lambda * p * std::log(p);
    }
  }
  return value;
}

}  // namespace softquant
