#pragma once

#include <cstdint>
#include <vector>

#include "softquant/measures.hpp"

namespace softquant {

// The optimization variable: m atom locations with a probability weight
// each, plus the step counter that drives schedules.
struct QuantizerState {
  std::vector<Point> locations;
  std::vector<double> weights;
  std::int64_t iteration = 0;

  std::size_t size() const { return locations.size(); }
  std::size_t dim() const { return locations.empty() ? 0 : locations.front().size(); }
  // Throws std::invalid_argument on empty/ragged locations, non-finite
  // entries, non-positive weights, or weights not summing to 1 (1e-10).
  void validate() const;
};

}  // namespace softquant
