#pragma once

#include <cstddef>
#include <stdexcept>
#include <vector>

namespace cellopt {

// Dense row-major matrix of 64-bit floats.
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, 0.0) {}

  static Matrix identity(std::size_t n) {
    Matrix m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.data[i * n + i] = 1.0;
    return m;
  }

  double& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

  std::vector<double> matvec(const std::vector<double>& x) const {
    if (x.size() != cols) throw std::invalid_argument("Matrix::matvec: dim mismatch");
    std::vector<double> y(rows, 0.0);
    for (std::size_t i = 0; i < rows; ++i) {
      const double* w = &data[i * cols];
      double s = 0.0;
      for (std::size_t j = 0; j < cols; ++j) s += w[j] * x[j];
      y[i] = s;
    }
    return y;
  }
};

}  // namespace cellopt
