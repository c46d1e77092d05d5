#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "softquant/recipes.hpp"

namespace softquant {

// Raised on malformed recipe files; the CLI maps it to exit code 2.
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses a flat key = value recipe file.  Each `[recipe NAME]` section
// describes one experiment:
//
//   [recipe my-exp]
//   source = exponential rate=1
//   m = 8
//   p = 2
//   r = 2
//   lambda = 0 0.5 1 10
//   iterations = 200000
//   batch = 8
//   seed = 1
//   replicates = 1
//   init = quantile-spread        # or sample-m-points
//   init_band = 0 1               # quantile levels used by quantile-spread
//   lr_scale = auto               # or a positive number
//   lr_offset = 30
//   lr_exponent = 0.6666666666666666
//   merge_radius = auto
//   eval_samples = 20000
//   snapshot_every = 0
//   warm_start = false            # true: grid points chain off each other
//   cycles = 1                    # restart cycles, one value or one per lambda
//   outputs = final cdf           # any of: trajectory final cdf tessellation
//
// Unknown keys, bad values, and empty files raise ConfigError.
std::vector<ExperimentRecipe> parse_recipes_text(const std::string& text);
std::vector<ExperimentRecipe> parse_recipes_file(const std::string& path);

}  // namespace softquant
