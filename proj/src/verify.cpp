#include "softquant/verify.hpp"

#include <cmath>
#include <sstream>

#include "softquant/softmin.hpp"
#include "softquant/text_io.hpp"

namespace softquant {

namespace {

std::vector<double> dirichlet_flat(Rng& rng, std::size_t n) {
  std::vector<double> w(n);
  double total = 0.0;
  for (double& v : w) {
    v = rng.exponential(1.0);
    total += v;
  }
  for (double& v : w) v /= total;
  return w;
}

WeightedValues random_weighted_values(Rng& rng, std::size_t n) {
  WeightedValues wv;
  wv.values.resize(n);
  for (double& v : wv.values) v = 4.0 * rng.uniform() - 2.0;
  wv.weights = dirichlet_flat(rng, n);
  return wv;
}

struct Suite {
  std::ostringstream text;
  std::size_t failures = 0;

  void record(const std::string& check, bool ok, double gap = 0.0) {
    text << check << ": " << (ok ? "pass" : "FAIL");
    if (gap != 0.0) text << "  gap: " << format_double(gap);
    text << '\n';
    if (!ok) ++failures;
  }
};

// Relaxed-transport suite: closed form vs. brute force, plan agreement,
// support containment, marginal consistency, and the entropy-form offset.
void run_transport_suite(const VerifyOptions& opts, Suite& suite) {
  const auto closed = opts.closed_form
                          ? opts.closed_form
                          : [](const DiscreteInstance& inst) {
                              return closed_form_value(inst);
                            };
  Rng rng(opts.seed, 0);
  double worst_value_gap = 0.0, worst_plan_gap = 0.0;
  std::size_t bad = 0;
  for (std::size_t i = 0; i < opts.instances; ++i) {
    Rng sub = rng.substream(i);
    const DiscreteInstance inst = random_instance(sub);
    const double reference = brute_force_value(inst);
    const double value_gap = std::abs(closed(inst) - reference);

    const TransportPlan plan = optimal_plan(inst);
    const TransportPlan numeric = brute_force_solve(inst).plan;
    double plan_gap = 0.0;
    for (std::size_t c = 0; c < plan.pi.data.size(); ++c)
      plan_gap = std::max(plan_gap, std::abs(plan.pi.data[c] - numeric.pi.data[c]));

    // Row marginals must reproduce the source weights exactly-ish, and the
    // plan objective must agree with the value the closed form reports.
    const std::vector<double> row = plan.row_marginal();
    double marginal_gap = 0.0;
    for (std::size_t r = 0; r < row.size(); ++r)
      marginal_gap = std::max(marginal_gap,
                              std::abs(row[r] - inst.source_weights[r]));
    const double objective_gap =
        std::abs(plan_objective(plan, inst).value() - closed_form_value(inst));

    worst_value_gap = std::max(worst_value_gap, value_gap);
    worst_plan_gap = std::max(worst_plan_gap, plan_gap);
    const bool ok = value_gap <= opts.value_tol && plan_gap <= opts.plan_tol &&
                    marginal_gap <= 1e-12 && objective_gap <= 1e-10;
    if (!ok) {
      ++bad;
      suite.text << "instance: " << i << "  rows: " << inst.cost.rows
                 << "  cols: " << inst.cost.cols
                 << "  lambda: " << format_double(inst.lambda)
                 << "  value_gap: " << format_double(value_gap)
                 << "  plan_gap: " << format_double(plan_gap)
                 << "  marginal_gap: " << format_double(marginal_gap)
                 << "  objective_gap: " << format_double(objective_gap) << '\n';
    }
  }
  suite.text << "transport_instances: " << opts.instances << '\n';
  suite.text << "worst_value_gap: " << format_double(worst_value_gap) << '\n';
  suite.text << "worst_plan_gap: " << format_double(worst_plan_gap) << '\n';
  suite.record("transport_closed_vs_brute", bad == 0);

  // Zero-weight reference column: the optimal plan must not charge it.
  {
    Rng sub = rng.substream(1u << 20);
    DiscreteInstance inst = random_instance(sub);
    for (std::uint64_t retry = 1; inst.quant_weights.size() < 2; ++retry) {
      Rng again = rng.substream((1u << 20) + retry);
      inst = random_instance(again);
    }
    inst.quant_weights.back() = 0.0;
    double total = 0.0;
    for (double w : inst.quant_weights) total += w;
    for (double& w : inst.quant_weights) w /= total;
    const TransportPlan plan = optimal_plan(inst);
    double charged = 0.0;
    for (std::size_t r = 0; r < plan.rows(); ++r)
      charged = std::max(charged, plan.pi(r, plan.cols() - 1));
    suite.record("transport_support_containment", charged == 0.0, charged);
  }

  // Entropy-form offset: for plans with both marginals pinned, the
  // divergence form exceeds the entropy form by lambda*(H(P) + H(Q)).
  {
    std::size_t bad_offset = 0;
    for (std::size_t i = 0; i < 25; ++i) {
      Rng sub = rng.substream((1u << 21) + i);
      DiscreteInstance inst = random_instance(sub);
      TransportPlan plan;
      plan.pi = Matrix(inst.cost.rows, inst.cost.cols, 0.0);
      for (std::size_t r = 0; r < inst.cost.rows; ++r)
        for (std::size_t c = 0; c < inst.cost.cols; ++c)
          plan.pi(r, c) = inst.source_weights[r] * inst.quant_weights[c];

      auto entropy_of = [](const std::vector<double>& w) {
        double h = 0.0;
        for (double v : w)
          if (v > 0.0) h -= v * std::log(v);
        return h;
      };
      const double offset = inst.lambda * (entropy_of(inst.source_weights) +
                                           entropy_of(inst.quant_weights));
      const double gap = std::abs(plan_objective(plan, inst).value() -
                                  entropy_form_value(plan, inst) - offset);
      if (gap > 1e-10) ++bad_offset;
    }
    suite.record("transport_entropy_offset", bad_offset == 0);
  }

  // Marginal projection: swapping the reference column weights for the
  // plan's own column marginal can only shrink the divergence, by exactly
  // the divergence between those two weight vectors.
  {
    std::size_t bad_gap = 0;
    for (std::size_t i = 0; i < opts.instances; ++i) {
      Rng sub = rng.substream((1u << 22) + i);
      const std::size_t rows = 1 + sub.below(4), cols = 1 + sub.below(4);
      TransportPlan plan;
      plan.pi = Matrix(rows, cols, 0.0);
      double total = 0.0;
      for (double& v : plan.pi.data) {
        v = sub.uniform() + 1e-3;
        total += v;
      }
      for (double& v : plan.pi.data) v /= total;
      const std::vector<double> source = plan.row_marginal();
      const std::vector<double> reference = dirichlet_flat(sub, cols);

      const ProjectionGap gap = marginal_projection_gap(plan, source, reference);
      // Independent route to the same quantity: divergence of the column
      // marginal against the reference over the shared index ground set.
      DiscreteMeasure col_m, ref_m;
      const std::vector<double> col = plan.col_marginal();
      for (std::size_t c = 0; c < cols; ++c) {
        col_m.atoms.push_back({static_cast<double>(c)});
        ref_m.atoms.push_back({static_cast<double>(c)});
      }
      col_m.weights = col;
      ref_m.weights = reference;
      const Divergence direct = kl_divergence(col_m, ref_m);

      const bool monotone = gap.original.value() >= gap.projected.value() - 1e-12;
      const double identity_gap =
          std::abs(gap.original.value() - gap.projected.value() - direct.value());
      if (!monotone || identity_gap > 1e-10) ++bad_gap;
    }
    suite.record("transport_marginal_projection", bad_gap == 0);
  }
}

// Smoothed-minimum property suite on random weighted values.
void run_softmin_suite(const VerifyOptions& opts, Suite& suite) {
  Rng rng(opts.seed, 1);
  std::size_t bad_bounds = 0, bad_normalization = 0, bad_shift = 0,
              bad_scale = 0, bad_nesting = 0, bad_monotone = 0;
  const std::size_t cases = 200;
  for (std::size_t i = 0; i < cases; ++i) {
    Rng sub = rng.substream(i);
    const std::size_t n = 1 + sub.below(8);
    const WeightedValues wv = random_weighted_values(sub, n);
    const double lambda = 0.05 + 2.0 * sub.uniform();
    const Regularization reg{lambda};

    const double value = smooth_min(wv, reg);
    double lo = smooth_min(wv, Regularization{0.0});
    double mean = 0.0;
    for (std::size_t j = 0; j < n; ++j) mean += wv.weights[j] * wv.values[j];
    if (!(value >= lo - 1e-12 && value <= mean + 1e-12)) ++bad_bounds;

    const std::vector<double> sigma = softmin(wv, reg);
    double mass = 0.0;
    for (std::size_t j = 0; j < n; ++j) mass += wv.weights[j] * sigma[j];
    if (std::abs(mass - 1.0) > 1e-12) ++bad_normalization;

    // Translation equivariance and positive homogeneity.
    WeightedValues shifted = wv;
    const double c = 4.0 * sub.uniform() - 2.0;
    for (double& v : shifted.values) v += c;
    if (std::abs(smooth_min(shifted, reg) - (value + c)) > 1e-10) ++bad_shift;

    WeightedValues scaled = wv;
    const double gamma = 0.5 + 2.0 * sub.uniform();
    for (double& v : scaled.values) v *= gamma;
    if (std::abs(smooth_min(scaled, Regularization{gamma * lambda}) -
                 gamma * value) > 1e-10)
      ++bad_scale;

    // Collapsing onto a random partition must preserve the smoothed minimum.
    std::vector<int> blocks(n);
    int next_block = 0;
    for (std::size_t j = 0; j < n; ++j)
      blocks[j] = (j == 0 || sub.uniform() < 0.5) ? next_block++ : blocks[j - 1];
    const WeightedValues grouped = conditional_smooth_min(wv, blocks, reg);
    if (std::abs(smooth_min(grouped, reg) - value) > 1e-12) ++bad_nesting;

    // The smoothed minimum grows with the temperature.
    if (smooth_min(wv, Regularization{2.0 * lambda}) < value - 1e-12)
      ++bad_monotone;
  }
  suite.text << "softmin_cases: " << cases << '\n';
  suite.record("softmin_bounds", bad_bounds == 0);
  suite.record("softmin_normalization", bad_normalization == 0);
  suite.record("softmin_translation", bad_shift == 0);
  suite.record("softmin_homogeneity", bad_scale == 0);
  suite.record("softmin_nesting", bad_nesting == 0);
  suite.record("softmin_lambda_monotone", bad_monotone == 0);
}

}  // namespace

DiscreteInstance random_instance(Rng& rng) {
  static constexpr double kLambdaGrid[] = {0.1, 0.5, 2.0};
  DiscreteInstance inst;
  const std::size_t rows = 1 + rng.below(4), cols = 1 + rng.below(4);
  inst.source_weights = dirichlet_flat(rng, rows);
  inst.quant_weights = dirichlet_flat(rng, cols);
  inst.cost = Matrix(rows, cols);
  for (double& c : inst.cost.data) c = rng.uniform();
  inst.lambda = kLambdaGrid[rng.below(3)];
  return inst;
}

VerifyReport run_verification(const VerifyOptions& opts) {
  Suite suite;
  suite.text << "seed: " << opts.seed << '\n';
  run_transport_suite(opts, suite);
  run_softmin_suite(opts, suite);
  suite.text << "failures: " << suite.failures << '\n';
  suite.text << "overall: " << (suite.failures == 0 ? "pass" : "fail") << '\n';

  VerifyReport report;
  report.failures = suite.failures;
  report.passed = suite.failures == 0;
  report.text = suite.text.str();
  return report;
}

}  // namespace softquant
