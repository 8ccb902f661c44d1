#include "specga/linalg.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace specga {

std::optional<std::vector<double>> solve_linear_system(Matrix a, std::vector<double> b,
                                                       double pivot_tol) {
  const int n = a.rows;
  if (a.cols != n || static_cast<int>(b.size()) != n)
    throw std::invalid_argument("solve_linear_system: shape mismatch");

  for (int k = 0; k < n; ++k) {
    int pivot = k;
    double best = std::abs(a(k, k));
    for (int i = k + 1; i < n; ++i) {
      const double v = std::abs(a(i, k));
      if (v > best) {
        best = v;
        pivot = i;
      }
    }
    if (best < pivot_tol) return std::nullopt;
    if (pivot != k) {
      for (int j = k; j < n; ++j) std::swap(a(k, j), a(pivot, j));
      std::swap(b[k], b[pivot]);
    }
    for (int i = k + 1; i < n; ++i) {
      const double f = a(i, k) / a(k, k);
      a(i, k) = 0.0;
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
      b[i] -= f * b[k];
    }
  }

  std::vector<double> x(n);
  for (int k = n - 1; k >= 0; --k) {
    double s = b[k];
    for (int j = k + 1; j < n; ++j) s -= a(k, j) * x[j];
    x[k] = s / a(k, k);
  }
  return x;
}

}  // namespace specga
