#pragma once

#include <span>

#include "specga/matrix.hpp"

namespace specga::kernels {

// Parallel matrix kernels. Each output element is produced by exactly one
// thread with a fixed serial accumulation order, so results are bitwise
// identical to the serial reference below for any thread count.

// out = a * b^T   (a: m x k, b: n x k, out: m x n)
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
// out = a * b     (a: m x k, b: k x n, out: m x n)
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);
// out = a^T * b   (a: k x m, b: k x n, out: m x n)
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
// out[j] = sum_i a(i, j)
void col_sums(const Matrix& a, std::span<double> out);

namespace serial {
// Reference implementations, kept for testing and benchmarking the
// parallel kernels against.
void matmul_nt(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_nn(const Matrix& a, const Matrix& b, Matrix& out);
void matmul_tn(const Matrix& a, const Matrix& b, Matrix& out);
void col_sums(const Matrix& a, std::span<double> out);
}  // namespace serial

}  // namespace specga::kernels
