#include "softquant/quantizer_state.hpp"

#include <cmath>
#include <stdexcept>

namespace softquant {

void QuantizerState::validate() const {
  if (locations.empty()) throw std::invalid_argument("empty support");
  if (weights.size() != locations.size())
    throw std::invalid_argument("locations/weights size mismatch");
  const std::size_t d = locations.front().size();
  if (d == 0) throw std::invalid_argument("zero-dimensional locations");
  double total = 0.0;
  for (std::size_t j = 0; j < locations.size(); ++j) {
    if (locations[j].size() != d) throw std::invalid_argument("ragged locations");
    for (double v : locations[j])
      if (!std::isfinite(v)) throw std::invalid_argument("non-finite value");
    if (!std::isfinite(weights[j]) || weights[j] <= 0.0)
      throw std::invalid_argument("weights must be > 0");
    total += weights[j];
  }
  if (std::abs(total - 1.0) > 1e-10)
    throw std::invalid_argument("weights must sum to 1");
}

}  // namespace softquant
