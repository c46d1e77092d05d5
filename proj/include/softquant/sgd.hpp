#pragma once

#include <cstdint>
#include <vector>

#include "softquant/geometry.hpp"
#include "softquant/measures.hpp"
#include "softquant/quantizer_state.hpp"

namespace softquant {

// Where the initial atom locations come from.
enum class InitKind {
  QuantileSpread,  // evenly spaced empirical quantiles (one-dimensional sources)
  SampleMPoints,   // m i.i.d. draws from the source
  Explicit,        // caller-provided locations
};

// Step-size schedule alpha_k = scale / (offset + k)^exponent.  The exponent
// must lie in (1/2, 1] so the steps are square-summable but not summable
// (the Robbins-Monro conditions).  A negative scale means "derive from the
// source": sqrt of its total variance.
struct LearningRate {
  double scale = kAutoScale;
  double offset = 30.0;
  double exponent = 2.0 / 3.0;

  static constexpr double kAutoScale = -1.0;  // sentinel: derive from source
};

struct RunConfig {
  SourceSpec source;
  DistanceSpec dspec;
  std::size_t m = 1;
  double lambda = 0.0;
  std::int64_t iterations = 100000;
  std::size_t batch_size = 1;
  LearningRate lr;
  std::uint64_t seed = 1;
  InitKind init = InitKind::SampleMPoints;
  std::vector<Point> explicit_init;
  // Quantile-spread places atoms at evenly spaced quantile levels inside
  // [init_band_lo, init_band_hi].  The full band seeds atoms deep into the
  // tails, where an atom can park at its own cell's centroid beyond the
  // reach of any regularization; a narrower band keeps every atom inside
  // the center's attraction basin.
  double init_band_lo = 0.0;
  double init_band_hi = 1.0;

  // Trajectory recording: snapshot every `snapshot_every` steps (0 records
  // only start and finish); each snapshot estimates the running objective
  // from `objective_samples` fresh draws on a dedicated stream.
  std::int64_t snapshot_every = 0;
  std::size_t objective_samples = 2048;

  void validate() const;          // throws std::invalid_argument
  double lr_scale_resolved() const;  // lr.scale, or sqrt(total variance) when auto
};

// Stream-offset bases used by run(): batch sample index k*batch_size + b
// draws from Rng(seed, kSgdStream + index), initialization from kInitStream,
// snapshot objective estimates from kEvalStream.  Public so a consumer can
// replay exactly the samples a run consumed.
inline constexpr std::uint64_t kSgdStream = 2ULL << 56;
inline constexpr std::uint64_t kInitStream = 3ULL << 56;
inline constexpr std::uint64_t kEvalStream = 4ULL << 56;

// alpha_k for step k >= 0.
double lr(const RunConfig& cfg, std::int64_t k);

// One stochastic update from a batch of samples: softmin-weighted location
// moves plus the running-average weight update (hard assignment when
// lambda == 0).  Returns the advanced state; the input is untouched.
QuantizerState step(const QuantizerState& state, const std::vector<Point>& batch,
                    const RunConfig& cfg);

// Batch-averaged location gradient (m rows of dim() entries), the quantity
// `step` moves against; exposed for stationarity diagnostics and tests.
std::vector<Point> batch_location_gradient(const QuantizerState& state,
                                           const std::vector<Point>& batch,
                                           const RunConfig& cfg);

struct Snapshot {
  std::int64_t iteration = 0;
  QuantizerState state;
  double objective = 0.0;  // Monte Carlo estimate at cfg.lambda
};

struct Trajectory {
  std::vector<Snapshot> snapshots;  // strictly increasing iterations
  QuantizerState final_state;
};

// Full optimization run; deterministic for identical configs.
Trajectory run(const RunConfig& cfg);

// Single-linkage clustering of atom locations: atoms within merge_radius
// (Euclidean, transitively chained) land in the same cluster.  Cluster ids
// are assigned by first appearance.
struct ClusterResult {
  std::size_t count = 0;
  std::vector<std::size_t> assignment;
};

ClusterResult distinct_quantizers(const QuantizerState& state, double merge_radius);

// Default merge radius: 1% of the source's per-coordinate RMS spread.
double default_merge_radius(const SourceSpec& spec);

}  // namespace softquant
