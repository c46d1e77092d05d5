#include "softquant/sgd.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "softquant/objective.hpp"
#include "softquant/softmin.hpp"

namespace softquant {

namespace {

constexpr double kWeightFloor = 1e-12;

// Flat row-major working copy of the state; the hot loop never allocates.
struct Workspace {
  std::size_t m = 0, d = 0;
  std::vector<double> loc;         // m x d
  std::vector<double> w;           // m
  std::vector<double> xi;          // d
  std::vector<double> cost;        // m
  std::vector<double> sigma;       // m
  std::vector<double> grad;        // m x d, batch accumulator
  std::vector<double> mass;        // m, batch accumulator of w*sigma
  std::vector<double> sample_grad; // m x d, single-sample contribution
  std::vector<double> sample_mass; // m

  Workspace(std::size_t m_, std::size_t d_)
      : m(m_), d(d_), loc(m_ * d_), w(m_), xi(d_), cost(m_), sigma(m_),
        grad(m_ * d_), mass(m_), sample_grad(m_ * d_), sample_mass(m_) {}

  std::span<double> row(std::vector<double>& buf, std::size_t j) {
    return {buf.data() + j * d, d};
  }
  std::span<const double> row(const std::vector<double>& buf, std::size_t j) const {
    return {buf.data() + j * d, d};
  }

  void load(const QuantizerState& s) {
    for (std::size_t j = 0; j < m; ++j)
      std::copy(s.locations[j].begin(), s.locations[j].end(), loc.begin() + j * d);
    std::copy(s.weights.begin(), s.weights.end(), w.begin());
  }
  void store(QuantizerState& s) const {
    s.locations.assign(m, Point(d));
    for (std::size_t j = 0; j < m; ++j)
      std::copy(loc.begin() + j * d, loc.begin() + (j + 1) * d,
                s.locations[j].begin());
    s.weights.assign(w.begin(), w.end());
  }
};

// Accumulates one sample's location gradient and per-atom mass (w*sigma,
// or the hard-assignment indicator at lambda == 0) into the workspace
// batch buffers.  Returns false -- contributing nothing -- if any entry
// came out non-finite.
bool accumulate_sample(Workspace& ws, const RunConfig& cfg) {
  const std::size_t m = ws.m, d = ws.d;
  for (std::size_t j = 0; j < m; ++j)
    ws.cost[j] = dist_power(cfg.dspec, ws.row(ws.loc, j), ws.xi);

  std::fill(ws.sample_grad.begin(), ws.sample_grad.end(), 0.0);
  std::fill(ws.sample_mass.begin(), ws.sample_mass.end(), 0.0);

  if (cfg.lambda == 0.0) {
    // Classical limit: the nearest atom takes the whole subgradient and
    // the whole unit of assignment mass.
    const std::size_t j = detail::hard_min_index(ws.cost, ws.w);
    dist_power_grad(cfg.dspec, ws.row(ws.loc, j), ws.xi, ws.row(ws.sample_grad, j));
    ws.sample_mass[j] = 1.0;
  } else {
    detail::softmin_into(ws.cost, ws.w, cfg.lambda, ws.sigma);
    for (std::size_t j = 0; j < m; ++j) {
      const double mass = ws.w[j] * ws.sigma[j];
      ws.sample_mass[j] = mass;
      dist_power_grad(cfg.dspec, ws.row(ws.loc, j), ws.xi, ws.row(ws.sample_grad, j));
      for (std::size_t l = 0; l < d; ++l) ws.sample_grad[j * d + l] *= mass;
    }
  }

  for (double g : ws.sample_grad)
    if (!std::isfinite(g)) return false;
  for (double v : ws.sample_mass)
    if (!std::isfinite(v)) return false;

  for (std::size_t i = 0; i < m * d; ++i) ws.grad[i] += ws.sample_grad[i];
  for (std::size_t j = 0; j < m; ++j) ws.mass[j] += ws.sample_mass[j];
  return true;
}

// One update from the aggregated batch buffers: simultaneous location and
// weight moves computed from the pre-step state.
void apply_update(Workspace& ws, const RunConfig& cfg, std::int64_t k,
                  std::size_t accepted) {
  if (accepted == 0) return;  // every sample in the batch was skipped
  const double inv = 1.0 / static_cast<double>(accepted);
  const double alpha = lr(cfg, k);
  for (std::size_t i = 0; i < ws.m * ws.d; ++i)
    ws.loc[i] -= alpha * ws.grad[i] * inv;

  // Running average toward the observed assignment masses, then floor and
  // renormalize so the weights stay a strictly positive probability vector.
  const double kd = static_cast<double>(k);
  double total = 0.0;
  for (std::size_t j = 0; j < ws.m; ++j) {
    double w = (kd * ws.w[j] + ws.mass[j] * inv) / (kd + 1.0);
    w = std::max(w, kWeightFloor);
    ws.w[j] = w;
    total += w;
  }
  for (std::size_t j = 0; j < ws.m; ++j) ws.w[j] /= total;
}

QuantizerState initial_state(const RunConfig& cfg) {
  QuantizerState state;
  const std::size_t d = cfg.source.dim();
  state.weights.assign(cfg.m, 1.0 / static_cast<double>(cfg.m));
  state.iteration = 0;
  switch (cfg.init) {
    case InitKind::Explicit:
      state.locations = cfg.explicit_init;
      break;
    case InitKind::SampleMPoints: {
      state.locations.assign(cfg.m, Point(d));
      for (std::size_t j = 0; j < cfg.m; ++j) {
        Rng rng(cfg.seed, kInitStream + j);
        cfg.source.sample_point(rng, state.locations[j]);
      }
      break;
    }
    case InitKind::QuantileSpread: {
      // Evenly spaced empirical quantiles of a pilot sample; well-defined
      // for one-dimensional sources only.
      const std::size_t pilot = 8192;
      std::vector<double> draws(pilot);
      Point buf(1);
      for (std::size_t i = 0; i < pilot; ++i) {
        Rng rng(cfg.seed, kInitStream + i);
        cfg.source.sample_point(rng, buf);
        draws[i] = buf[0];
      }
      std::sort(draws.begin(), draws.end());
      state.locations.assign(cfg.m, Point(1));
      for (std::size_t j = 0; j < cfg.m; ++j) {
        const double level =
            (static_cast<double>(j) + 0.5) / static_cast<double>(cfg.m);
        const double q =
            cfg.init_band_lo + (cfg.init_band_hi - cfg.init_band_lo) * level;
        const std::size_t idx = std::min(
            pilot - 1, static_cast<std::size_t>(q * static_cast<double>(pilot)));
        state.locations[j][0] = draws[idx];
      }
      break;
    }
  }
  state.validate();
  return state;
}

double snapshot_objective(const QuantizerState& state, const RunConfig& cfg) {
  const std::uint64_t eval_seed = Rng(cfg.seed, kEvalStream).next_u64();
  return soft_objective(state, cfg.source, cfg.dspec, cfg.lambda,
                        cfg.objective_samples, eval_seed)
      .value;
}

}  // namespace

void RunConfig::validate() const {
  dspec.validate();
  if (m == 0) throw std::invalid_argument("need at least one atom");
  if (!(lambda >= 0.0) || !std::isfinite(lambda))
    throw std::invalid_argument("regularization must be finite and >= 0");
  if (iterations < 0) throw std::invalid_argument("negative iteration count");
  if (batch_size == 0) throw std::invalid_argument("batch size must be >= 1");
  if (!(lr.offset > 0.0)) throw std::invalid_argument("step-size offset must be > 0");
  if (!(lr.exponent > 0.5) || !(lr.exponent <= 1.0))
    throw std::invalid_argument("step-size exponent must lie in (1/2, 1]");
  if (lr.scale != LearningRate::kAutoScale && !(lr.scale > 0.0))
    throw std::invalid_argument("step-size scale must be > 0");
  if (objective_samples == 0)
    throw std::invalid_argument("need at least one objective sample");
  if (init == InitKind::Explicit) {
    if (explicit_init.size() != m)
      throw std::invalid_argument("explicit init must provide one point per atom");
    for (const Point& pt : explicit_init)
      if (pt.size() != source.dim())
        throw std::invalid_argument("dimension mismatch");
  }
  if (init == InitKind::QuantileSpread && source.dim() != 1)
    throw std::invalid_argument("quantile-spread init requires a one-dimensional source");
  if (!(init_band_lo >= 0.0) || !(init_band_hi <= 1.0) ||
      !(init_band_lo < init_band_hi))
    throw std::invalid_argument("init band must satisfy 0 <= lo < hi <= 1");
}

double RunConfig::lr_scale_resolved() const {
  if (lr.scale != LearningRate::kAutoScale) return lr.scale;
  return std::max(std::sqrt(source.total_variance()), 1e-12);
}

double lr(const RunConfig& cfg, std::int64_t k) {
  return cfg.lr_scale_resolved() /
         std::pow(cfg.lr.offset + static_cast<double>(k), cfg.lr.exponent);
}

QuantizerState step(const QuantizerState& state, const std::vector<Point>& batch,
                    const RunConfig& cfg) {
  state.validate();
  cfg.validate();
  if (batch.empty()) throw std::invalid_argument("empty batch");
  if (state.size() != cfg.m || state.dim() != cfg.source.dim())
    throw std::invalid_argument("state does not match config");

  Workspace ws(cfg.m, state.dim());
  ws.load(state);
  std::size_t accepted = 0;
  for (const Point& pt : batch) {
    if (pt.size() != state.dim()) throw std::invalid_argument("dimension mismatch");
    std::copy(pt.begin(), pt.end(), ws.xi.begin());
    if (accumulate_sample(ws, cfg)) ++accepted;
  }
  apply_update(ws, cfg, state.iteration, accepted);

  QuantizerState next;
  ws.store(next);
  next.iteration = state.iteration + 1;
  return next;
}

std::vector<Point> batch_location_gradient(const QuantizerState& state,
                                           const std::vector<Point>& batch,
                                           const RunConfig& cfg) {
  state.validate();
  cfg.validate();
  if (batch.empty()) throw std::invalid_argument("empty batch");
  Workspace ws(cfg.m, state.dim());
  ws.load(state);
  std::size_t accepted = 0;
  for (const Point& pt : batch) {
    std::copy(pt.begin(), pt.end(), ws.xi.begin());
    if (accumulate_sample(ws, cfg)) ++accepted;
  }
  std::vector<Point> out(ws.m, Point(ws.d, 0.0));
  if (accepted == 0) return out;
  for (std::size_t j = 0; j < ws.m; ++j)
    for (std::size_t l = 0; l < ws.d; ++l)
      out[j][l] = ws.grad[j * ws.d + l] / static_cast<double>(accepted);
  return out;
}

Trajectory run(const RunConfig& cfg) {
  cfg.validate();
  Trajectory traj;
  QuantizerState state = initial_state(cfg);

  Workspace ws(cfg.m, cfg.source.dim());
  ws.load(state);

  traj.snapshots.push_back({0, state, snapshot_objective(state, cfg)});

  for (std::int64_t k = 0; k < cfg.iterations; ++k) {
    std::fill(ws.grad.begin(), ws.grad.end(), 0.0);
    std::fill(ws.mass.begin(), ws.mass.end(), 0.0);
    std::size_t accepted = 0;
    for (std::size_t b = 0; b < cfg.batch_size; ++b) {
      const std::uint64_t index =
          static_cast<std::uint64_t>(k) * cfg.batch_size + b;
      Rng rng(cfg.seed, kSgdStream + index);
      cfg.source.sample_point(rng, ws.xi);
      if (accumulate_sample(ws, cfg)) ++accepted;
    }
    apply_update(ws, cfg, k, accepted);

    const std::int64_t done = k + 1;
    if (cfg.snapshot_every > 0 && done % cfg.snapshot_every == 0 &&
        done != cfg.iterations) {
      QuantizerState snap;
      ws.store(snap);
      snap.iteration = done;
      traj.snapshots.push_back({done, snap, snapshot_objective(snap, cfg)});
    }
  }

  ws.store(state);
  state.iteration = cfg.iterations;
  if (cfg.iterations > 0)
    traj.snapshots.push_back(
        {cfg.iterations, state, snapshot_objective(state, cfg)});
  traj.final_state = state;
  return traj;
}

ClusterResult distinct_quantizers(const QuantizerState& state, double merge_radius) {
  state.validate();
  if (!(merge_radius >= 0.0) || !std::isfinite(merge_radius))
    throw std::invalid_argument("merge radius must be finite and >= 0");
  const std::size_t m = state.size();

  // Single linkage at the merge radius: union-find over all close pairs,
  // then relabel roots by first appearance.
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&parent](std::size_t x) {
    while (parent[x] != x) {
      parent[x] = parent[parent[x]];
      x = parent[x];
    }
    return x;
  };
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t j = i + 1; j < m; ++j) {
      double sq = 0.0;
      for (std::size_t l = 0; l < state.dim(); ++l) {
        const double diff = state.locations[i][l] - state.locations[j][l];
        sq += diff * diff;
      }
      if (std::sqrt(sq) <= merge_radius) {
        const std::size_t ri = find(i), rj = find(j);
        if (ri != rj) parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  ClusterResult result;
  result.assignment.assign(m, 0);
  std::vector<std::size_t> label(m, m);
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t root = find(i);
    if (label[root] == m) label[root] = result.count++;
    result.assignment[i] = label[root];
  }
  return result;
}

double default_merge_radius(const SourceSpec& spec) {
  return 1e-2 * std::sqrt(spec.total_variance() /
                          static_cast<double>(spec.dim()));
}

}  // namespace softquant
