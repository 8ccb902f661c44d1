#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace specga {

// Dense row-major matrix of doubles.
struct Matrix {
  int rows = 0;
  int cols = 0;
  std::vector<double> data;

  Matrix() = default;
  Matrix(int r, int c, double fill = 0.0)
      : rows(r), cols(c), data(static_cast<std::size_t>(r) * static_cast<std::size_t>(c), fill) {
    if (r < 0 || c < 0) throw std::invalid_argument("Matrix: negative shape");
  }

  double* row(int i) { return data.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return data.data() + static_cast<std::size_t>(i) * cols; }

  std::span<double> row_span(int i) { return {row(i), static_cast<std::size_t>(cols)}; }
  std::span<const double> row_span(int i) const { return {row(i), static_cast<std::size_t>(cols)}; }

  double& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  double operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }

  bool same_shape(const Matrix& o) const { return rows == o.rows && cols == o.cols; }

  friend bool operator==(const Matrix& a, const Matrix& b) {
    return a.rows == b.rows && a.cols == b.cols && a.data == b.data;
  }
};

}  // namespace specga
