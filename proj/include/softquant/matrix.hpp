#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

namespace softquant {

// Minimal dense row-major matrix; just enough for small covariance,
// Hessian, and transport-plan work at desk scale.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), data(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }

  bool same_shape(const Matrix& other) const {
    return rows == other.rows && cols == other.cols;
  }
};

// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
// Throws std::invalid_argument if the input is not square/symmetric/SPD.
inline Matrix cholesky_lower(const Matrix& a) {
  if (a.rows != a.cols) throw std::invalid_argument("cholesky: matrix not square");
  const std::size_t n = a.rows;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (std::abs(a(i, j) - a(j, i)) > 1e-12 * (1.0 + std::abs(a(i, j))))
        throw std::invalid_argument("cholesky: matrix not symmetric");
  Matrix l(n, n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = a(j, j);
    for (std::size_t k = 0; k < j; ++k) diag -= l(j, k) * l(j, k);
    if (!(diag > 0.0)) throw std::invalid_argument("cholesky: matrix not positive definite");
    l(j, j) = std::sqrt(diag);
    for (std::size_t i = j + 1; i < n; ++i) {
      double sum = a(i, j);
      for (std::size_t k = 0; k < j; ++k) sum -= l(i, k) * l(j, k);
      l(i, j) = sum / l(j, j);
    }
  }
  return l;
}

}  // namespace softquant
