#include "softquant/softmin.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace softquant {

namespace {

void check_lambda(double lambda) {
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("regularization must be finite and >= 0");
}

}  // namespace

void WeightedValues::validate() const {
  if (values.empty()) throw std::invalid_argument("empty support");
  if (weights.size() != values.size())
    throw std::invalid_argument("values/weights size mismatch");
  double total = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (!std::isfinite(values[j]) || !std::isfinite(weights[j]))
      throw std::invalid_argument("non-finite value");
    if (weights[j] < 0.0) throw std::invalid_argument("negative weight");
    total += weights[j];
  }
  if (std::abs(total - 1.0) > 1e-12)
    throw std::invalid_argument("weights must sum to 1");
}

namespace detail {

double hard_min_positive_weight(std::span<const double> values,
                                std::span<const double> weights) {
  double best = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (weights[j] > 0.0 && values[j] < best) {
      best = values[j];
      found = true;
    }
  }
  if (!found) throw std::invalid_argument("empty support");
  return best;
}

std::size_t hard_min_index(std::span<const double> values,
                           std::span<const double> weights) {
  std::size_t best = values.size();
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (weights[j] > 0.0 && (best == values.size() || values[j] < values[best]))
      best = j;
  }
  if (best == values.size()) throw std::invalid_argument("empty support");
  return best;
}

double smooth_min_positive_lambda(std::span<const double> values,
                                  std::span<const double> weights, double lambda) {
  // Shift by the minimum over positive-weight entries so every retained
  // exponent is <= 0: no overflow, and at least one term equals w_j > 0.
  const double shift = hard_min_positive_weight(values, weights);
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    if (weights[j] <= 0.0) continue;
    sum += weights[j] * std::exp(-(values[j] - shift) / lambda);
  }
  return shift - lambda * std::log(sum);
}

double softmin_into(std::span<const double> values, std::span<const double> weights,
                    double lambda, std::span<double> out) {
  const double shift = hard_min_positive_weight(values, weights);
  double sum = 0.0;
  for (std::size_t j = 0; j < values.size(); ++j) {
    const double e = std::exp(-(values[j] - shift) / lambda);
    out[j] = e;
    if (weights[j] > 0.0) sum += weights[j] * e;
  }
  for (std::size_t j = 0; j < values.size(); ++j) out[j] /= sum;
  return sum;
}

}  // namespace detail

double smooth_min(const WeightedValues& wv, Regularization reg) {
  wv.validate();
  check_lambda(reg.lambda);
  if (reg.lambda == 0.0)
    return detail::hard_min_positive_weight(wv.values, wv.weights);
  return detail::smooth_min_positive_lambda(wv.values, wv.weights, reg.lambda);
}

std::vector<double> softmin(const WeightedValues& wv, Regularization reg) {
  wv.validate();
  check_lambda(reg.lambda);
  if (reg.lambda == 0.0)
    throw std::invalid_argument("softmin undefined at lambda == 0; use hard_assignment");
  std::vector<double> out(wv.size());
  detail::softmin_into(wv.values, wv.weights, reg.lambda, out);
  return out;
}

std::size_t hard_assignment(const WeightedValues& wv) {
  wv.validate();
  return detail::hard_min_index(wv.values, wv.weights);
}

std::vector<double> smin_gradient(const WeightedValues& wv, Regularization reg) {
  std::vector<double> g = softmin(wv, reg);
  // A zero-weight entry contributes exactly 0, even when its Gibbs
  // response overflows (0 * inf would otherwise poison the vector).
  for (std::size_t j = 0; j < g.size(); ++j)
    g[j] = wv.weights[j] > 0.0 ? g[j] * wv.weights[j] : 0.0;
  return g;
}

Matrix smin_hessian(const WeightedValues& wv, Regularization reg) {
  const std::vector<double> g = smin_gradient(wv, reg);
  const std::size_t n = g.size();
  Matrix h(n, n);
  const double inv_lambda = 1.0 / reg.lambda;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double curvature = (i == j ? g[i] : 0.0) - g[i] * g[j];
      h(i, j) = -inv_lambda * curvature;
    }
  }
  return h;
}

WeightedValues conditional_smooth_min(const WeightedValues& wv,
                                      std::span<const int> blocks,
                                      Regularization reg) {
  wv.validate();
  check_lambda(reg.lambda);
  if (reg.lambda == 0.0)
    throw std::invalid_argument("conditional smoothing requires lambda > 0");
  if (blocks.size() != wv.size())
    throw std::invalid_argument("partition size mismatch");
  int max_block = -1;
  for (int b : blocks) {
    if (b < 0) throw std::invalid_argument("out-of-range block index");
    max_block = std::max(max_block, b);
  }
  const std::size_t nblocks = static_cast<std::size_t>(max_block) + 1;

  std::vector<double> block_mass(nblocks, 0.0);
  std::vector<double> block_min(nblocks, std::numeric_limits<double>::infinity());
  std::vector<bool> block_seen(nblocks, false);
  for (std::size_t j = 0; j < wv.size(); ++j) {
    const std::size_t b = static_cast<std::size_t>(blocks[j]);
    block_seen[b] = true;
    block_mass[b] += wv.weights[j];
    block_min[b] = std::min(block_min[b], wv.values[j]);
  }
  for (std::size_t b = 0; b < nblocks; ++b)
    if (!block_seen[b]) throw std::invalid_argument("empty block");

  // Per block: smoothed minimum under weights renormalized by the block
  // mass.  exp(-(x - min)/lambda) keeps each accumulation shift-stable.
  std::vector<double> block_sum(nblocks, 0.0);
  for (std::size_t j = 0; j < wv.size(); ++j) {
    const std::size_t b = static_cast<std::size_t>(blocks[j]);
    if (wv.weights[j] <= 0.0) continue;
    block_sum[b] += wv.weights[j] * std::exp(-(wv.values[j] - block_min[b]) / reg.lambda);
  }
  WeightedValues out;
  out.values.resize(nblocks);
  out.weights = block_mass;
  for (std::size_t b = 0; b < nblocks; ++b) {
    if (block_mass[b] > 0.0) {
      out.values[b] = block_min[b] - reg.lambda * std::log(block_sum[b] / block_mass[b]);
    } else {
      // Massless block: its entry never influences any downstream smoothed
      // minimum, so report the plain block minimum.
      out.values[b] = block_min[b];
    }
  }
  return out;
}

CumulantSummary cumulants(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("empty support");
  const double n = static_cast<double>(values.size());
  CumulantSummary c;
  for (double v : values) {
    if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
    c.mean += v;
  }
  c.mean /= n;
  for (double v : values) {
    const double d = v - c.mean;
    c.variance += d * d;
    c.third_central += d * d * d;
  }
  c.variance /= n;
  c.third_central /= n;
  return c;
}

double cumulant_expansion(std::span<const double> values, Regularization reg,
                          int order) {
  check_lambda(reg.lambda);
  if (reg.lambda <= 0.0)
    throw std::invalid_argument("cumulant expansion requires lambda > 0");
  if (order < 1 || order > 3)
    throw std::invalid_argument("order outside {1,2,3}");
  const CumulantSummary c = cumulants(values);
  double out = c.mean;
  if (order >= 2) out -= c.variance / (2.0 * reg.lambda);
  if (order >= 3) out += c.third_central / (6.0 * reg.lambda * reg.lambda);
  return out;
}

}  // namespace softquant
