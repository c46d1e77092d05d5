#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "softquant/sgd.hpp"

namespace softquant {

// Which artifacts a recipe writes per run.
struct OutputFlags {
  bool trajectory = false;     // per-snapshot atom table
  bool final_state = true;     // final atom table
  bool cdf = false;            // quantizer CDF knots (one-dimensional only)
  bool tessellation = false;   // soft assignment probabilities on a grid
};

// A named experiment: one base configuration swept over a grid of
// regularization strengths, optionally replicated across seeds.
struct ExperimentRecipe {
  static constexpr double kAutoRadius = -1.0;

  std::string name;
  RunConfig base;                  // base.lambda is overridden by the grid
  std::vector<double> lambda_grid;
  std::size_t replicates = 1;     // seeds base.seed, base.seed+1, ...
  double merge_radius = kAutoRadius;
  std::size_t eval_samples = 20000;  // summary objective estimates
  OutputFlags outputs;
  // When set, each seed's grid points run in listed order and every run
  // after the first starts its locations from the previous run's final
  // locations (weights restart uniform).  This traces one continuation
  // path through the grid instead of independent cold starts; without it,
  // runs at strong regularization tend to strand a few low-weight atoms
  // mid-flight, because an atom's step size scales with its own weight.
  bool warm_start = false;
  // Restart cycles per grid point: size 1 broadcasts one count to every
  // point, otherwise one entry per grid lambda (in listed order).  Cycle
  // c > 0 restarts the step-size schedule and the weight averaging from
  // cycle c-1's final locations under a cycle-derived seed.  Repeated
  // bursts of large, responsive steps let slow cluster fusions finish;
  // only the last cycle's state is reported and written.
  std::vector<std::size_t> cycles{1};

  std::size_t cycles_at(std::size_t grid_index) const {
    return cycles.size() == 1 ? cycles.front() : cycles[grid_index];
  }

  double merge_radius_resolved() const;
  void validate() const;  // throws std::invalid_argument
};

// The experiments shipped with the tool.
std::vector<ExperimentRecipe> builtin_recipes();
// Null if no builtin has that name.
const ExperimentRecipe* find_builtin(const std::string& name);

// One grid point's outcome, as written to the summary table.
struct RunSummaryRow {
  std::string recipe;
  double lambda = 0.0;
  std::uint64_t seed = 0;
  std::size_t distinct_count = 0;
  std::size_t heavy_atoms = 0;  // atoms with weight > 1e-6
  double objective_at_lambda = 0.0;
  double objective_at_zero = 0.0;
  double center_distance = 0.0;  // max Euclidean atom distance to the center estimate
  QuantizerState final_state;
};

// Executes every (lambda, seed) grid point of the recipe, writes the
// per-run artifacts plus a combined summary CSV under out_dir, and returns
// the summary rows sorted by (lambda, seed).  `threads` of 0 means one
// worker per hardware thread.  Rerunning with identical inputs reproduces
// every file byte for byte.
std::vector<RunSummaryRow> run_recipe(const ExperimentRecipe& recipe,
                                      const std::string& out_dir,
                                      std::size_t threads = 0);

// Same grid execution without touching the filesystem (used by tests).
std::vector<RunSummaryRow> run_recipe_rows(const ExperimentRecipe& recipe,
                                           std::size_t threads = 0);

}  // namespace softquant
