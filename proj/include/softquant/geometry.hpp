#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace softquant {

// Coordinate-weighted p-norm ground distance raised to power r inside the
// quantization objective:
//   dist(y, xi)   = (sum_l w_l |y_l - xi_l|^p)^(1/p)
//   cost(y, xi)   = dist(y, xi)^r
// p >= 1 keeps dist a metric; r >= 1 is the transport order.  An empty
// coord_weights vector means unit weight in every coordinate.
struct DistanceSpec {
  double p = 2.0;
  double r = 2.0;
  std::vector<double> coord_weights;

  // Throws std::invalid_argument for p < 1, r < 1, or non-positive weights.
  void validate() const;
};

// Weighted p-norm distance between points of equal dimension.
double dist(const DistanceSpec& spec, std::span<const double> y,
            std::span<const double> xi);

// dist(y, xi)^r, the per-sample transport cost.
double dist_power(const DistanceSpec& spec, std::span<const double> y,
                  std::span<const double> xi);

// Gradient of dist(y, xi)^r with respect to y:
//   r * w_j * dist^(r-p) * |y_j - xi_j|^(p-1) * sign(y_j - xi_j).
// At y == xi the zero vector is returned (a valid subgradient for r >= p;
// for r < p the cost is not differentiable there and callers must keep
// y != xi).
void dist_power_grad(const DistanceSpec& spec, std::span<const double> y,
                     std::span<const double> xi, std::span<double> out);
std::vector<double> dist_power_grad(const DistanceSpec& spec,
                                    std::span<const double> y,
                                    std::span<const double> xi);

}  // namespace softquant
