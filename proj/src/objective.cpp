#include "softquant/objective.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "softquant/softmin.hpp"

namespace softquant {

namespace {

void check_eval_inputs(const QuantizerState& state, const SourceSpec& source,
                       const DistanceSpec& dspec, double lambda, std::size_t n) {
  state.validate();
  dspec.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("regularization must be finite and >= 0");
  if (n == 0) throw std::invalid_argument("need at least one sample");
  if (state.dim() != source.dim())
    throw std::invalid_argument("dimension mismatch");
}

}  // namespace

SoftObjectiveEstimate soft_objective(const QuantizerState& state,
                                     const SourceSpec& source,
                                     const DistanceSpec& dspec, double lambda,
                                     std::size_t n, std::uint64_t seed) {
  check_eval_inputs(state, source, dspec, lambda, n);
  const std::size_t m = state.size();
  Point draw(source.dim());
  std::vector<double> cost(m);

  double sum = 0.0, sum_sq = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, kSampleStream + i);
    source.sample_point(rng, draw);
    for (std::size_t j = 0; j < m; ++j)
      cost[j] = dist_power(dspec, state.locations[j], draw);
    const double v =
        lambda == 0.0
            ? detail::hard_min_positive_weight(cost, state.weights)
            : detail::smooth_min_positive_lambda(cost, state.weights, lambda);
    sum += v;
    sum_sq += v * v;
  }
  SoftObjectiveEstimate est;
  est.samples = n;
  est.value = sum / static_cast<double>(n);
  const double var =
      std::max(0.0, sum_sq / static_cast<double>(n) - est.value * est.value);
  est.std_error = n > 1 ? std::sqrt(var / static_cast<double>(n)) : 0.0;
  return est;
}

std::vector<double> optimal_weights(const QuantizerState& state,
                                    const SourceSpec& source,
                                    const DistanceSpec& dspec, double lambda,
                                    std::size_t n, std::uint64_t seed) {
  check_eval_inputs(state, source, dspec, lambda, n);
  if (lambda == 0.0)
    throw std::invalid_argument("optimal weights require lambda > 0");
  const std::size_t m = state.size();
  Point draw(source.dim());
  std::vector<double> cost(m), sigma(m), q(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, kSampleStream + i);
    source.sample_point(rng, draw);
    for (std::size_t j = 0; j < m; ++j)
      cost[j] = dist_power(dspec, state.locations[j], draw);
    detail::softmin_into(cost, state.weights, lambda, sigma);
    for (std::size_t j = 0; j < m; ++j) q[j] += sigma[j];
  }
  for (std::size_t j = 0; j < m; ++j) q[j] /= static_cast<double>(n);
  return q;
}

std::vector<double> voronoi_weights(const QuantizerState& state,
                                    const SourceSpec& source,
                                    const DistanceSpec& dspec, std::size_t n,
                                    std::uint64_t seed) {
  check_eval_inputs(state, source, dspec, 0.0, n);
  const std::size_t m = state.size();
  Point draw(source.dim());
  std::vector<double> cost(m), freq(m, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    Rng rng(seed, kSampleStream + i);
    source.sample_point(rng, draw);
    for (std::size_t j = 0; j < m; ++j)
      cost[j] = dist_power(dspec, state.locations[j], draw);
    freq[detail::hard_min_index(cost, state.weights)] += 1.0;
  }
  for (std::size_t j = 0; j < m; ++j) freq[j] /= static_cast<double>(n);
  return freq;
}

Matrix tessellation_probabilities(const std::vector<Point>& points,
                                  const QuantizerState& state,
                                  const DistanceSpec& dspec, double lambda) {
  state.validate();
  dspec.validate();
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("regularization must be finite and >= 0");
  const std::size_t m = state.size();
  Matrix rows(points.size(), m, 0.0);
  std::vector<double> cost(m), sigma(m);
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != state.dim())
      throw std::invalid_argument("dimension mismatch");
    for (std::size_t j = 0; j < m; ++j)
      cost[j] = dist_power(dspec, state.locations[j], points[i]);
    if (lambda == 0.0) {
      rows(i, detail::hard_min_index(cost, state.weights)) = 1.0;
    } else {
      detail::softmin_into(cost, state.weights, lambda, sigma);
      for (std::size_t j = 0; j < m; ++j)
        rows(i, j) = state.weights[j] * sigma[j];
    }
  }
  return rows;
}

double Divergence::value() const {
  if (infinite_) throw std::logic_error("divergence is infinite");
  return value_;
}

namespace {

void check_shared_ground_set(const DiscreteMeasure& q, const DiscreteMeasure& p) {
  q.validate();
  p.validate();
  if (q.size() != p.size()) throw std::invalid_argument("mismatched ground sets");
  for (std::size_t j = 0; j < q.size(); ++j)
    if (q.atoms[j] != p.atoms[j])
      throw std::invalid_argument("mismatched ground sets");
}

}  // namespace

Divergence kl_divergence(const DiscreteMeasure& q, const DiscreteMeasure& p) {
  check_shared_ground_set(q, p);
  double sum = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q.weights[j] == 0.0) continue;  // 0 log 0 = 0
    if (p.weights[j] == 0.0) return Divergence::infinite();
    sum += q.weights[j] * std::log(q.weights[j] / p.weights[j]);
  }
  return Divergence::finite(sum);
}

double entropy(const DiscreteMeasure& p) {
  p.validate();
  double h = 0.0;
  for (double w : p.weights)
    if (w > 0.0) h -= w * std::log(w);
  return h;
}

double cross_entropy(const DiscreteMeasure& q, const DiscreteMeasure& p) {
  check_shared_ground_set(q, p);
  double h = 0.0;
  for (std::size_t j = 0; j < q.size(); ++j) {
    if (q.weights[j] == 0.0) continue;
    if (p.weights[j] == 0.0) return std::numeric_limits<double>::infinity();
    h -= q.weights[j] * std::log(p.weights[j]);
  }
  return h;
}

}  // namespace softquant
