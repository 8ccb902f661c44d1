#pragma once

#include <optional>
#include <vector>

#include "specga/matrix.hpp"

namespace specga {

// Solves a*x = b by Gaussian elimination with partial pivoting. Returns
// nothing when some pivot's magnitude falls below pivot_tol.
std::optional<std::vector<double>> solve_linear_system(Matrix a, std::vector<double> b,
                                                       double pivot_tol = 1e-10);

}  // namespace specga
