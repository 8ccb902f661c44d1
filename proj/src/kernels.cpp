#include "specga/kernels.hpp"

#include <cstring>
#include <stdexcept>

namespace specga::kernels {

namespace {

// Eight independent accumulator lanes, folded in a fixed order. The lane
// pattern vectorizes without reassociating the sum, so the result does not
// depend on build flags or thread count.
inline double dot(const double* a, const double* b, int n) {
  double lane[8] = {0, 0, 0, 0, 0, 0, 0, 0};
  int i = 0;
  for (; i + 8 <= n; i += 8) {
    for (int l = 0; l < 8; ++l) lane[l] += a[i + l] * b[i + l];
  }
  double tail = 0.0;
  for (; i < n; ++i) tail += a[i] * b[i];
  return (((lane[0] + lane[1]) + (lane[2] + lane[3])) +
          ((lane[4] + lane[5]) + (lane[6] + lane[7]))) +
         tail;
}

inline void axpy(double alpha, const double* x, double* y, int n) {
  for (int i = 0; i < n; ++i) y[i] += alpha * x[i];
}

inline void check_nt(const Matrix& a, const Matrix& b, const Matrix& out) {
  if (a.cols != b.cols || out.rows != a.rows || out.cols != b.rows)
    throw std::invalid_argument("matmul_nt: shape mismatch");
}

inline void check_nn(const Matrix& a, const Matrix& b, const Matrix& out) {
  if (a.cols != b.rows || out.rows != a.rows || out.cols != b.cols)
    throw std::invalid_argument("matmul_nn: shape mismatch");
}

inline void check_tn(const Matrix& a, const Matrix& b, const Matrix& out) {
  if (a.rows != b.rows || out.rows != a.cols || out.cols != b.cols)
    throw std::invalid_argument("matmul_tn: shape mismatch");
}

inline void nt_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
  const double* ar = a.row(i);
  double* cr = out.row(i);
  for (int j = 0; j < b.rows; ++j) cr[j] = dot(ar, b.row(j), a.cols);
}

inline void nn_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
  const double* ar = a.row(i);
  double* cr = out.row(i);
  std::memset(cr, 0, sizeof(double) * out.cols);
  for (int k = 0; k < a.cols; ++k) axpy(ar[k], b.row(k), cr, out.cols);
}

inline void tn_row(const Matrix& a, const Matrix& b, Matrix& out, int i) {
  double* cr = out.row(i);
  std::memset(cr, 0, sizeof(double) * out.cols);
  for (int k = 0; k < a.rows; ++k) axpy(a(k, i), b.row(k), cr, out.cols);
}

inline void col_sums_one(const Matrix& a, double* out, int j) {
  double s = 0.0;
  for (int i = 0; i < a.rows; ++i) s += a(i, j);
  out[j] = s;
}

}  // namespace

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_nt(a, b, out);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) nt_row(a, b, out, i);
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_nn(a, b, out);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.rows; ++i) nn_row(a, b, out, i);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_tn(a, b, out);
#pragma omp parallel for schedule(static)
  for (int i = 0; i < a.cols; ++i) tn_row(a, b, out, i);
}

void col_sums(const Matrix& a, std::span<double> out) {
  if (static_cast<int>(out.size()) != a.cols)
    throw std::invalid_argument("col_sums: shape mismatch");
#pragma omp parallel for schedule(static)
  for (int j = 0; j < a.cols; ++j) col_sums_one(a, out.data(), j);
}

namespace serial {

void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out) {
  check_nt(a, b, out);
  for (int i = 0; i < a.rows; ++i) nt_row(a, b, out, i);
}

void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_nn(a, b, out);
  for (int i = 0; i < a.rows; ++i) nn_row(a, b, out, i);
}

void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out) {
  check_tn(a, b, out);
  for (int i = 0; i < a.cols; ++i) tn_row(a, b, out, i);
}

void col_sums(const Matrix& a, std::span<double> out) {
  if (static_cast<int>(out.size()) != a.cols)
    throw std::invalid_argument("col_sums: shape mismatch");
  for (int j = 0; j < a.cols; ++j) col_sums_one(a, out.data(), j);
}

}  // namespace serial

}  // namespace specga::kernels
