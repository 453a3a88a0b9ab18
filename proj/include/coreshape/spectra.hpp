#pragma once

#include <vector>

#include <Eigen/Dense>

#include "coreshape/tensor.hpp"

namespace coreshape {

// Squared mode-n singular values of a tensor, one non-increasing list per
// mode (length I_n, zero-padded past the unfolding rank), plus ||X||_F^2.
// These lists satisfy  sum_i values[n][i] == tensor_fro_sq  for every n.
struct ModeSpectra {
    std::vector<std::vector<double>> sq_singular_values;
    double tensor_fro_sq = 0.0;
};

ModeSpectra mode_sq_singular_values(const DenseTensor& x);

// Fixes the sign freedom of each column: the entry of largest magnitude
// (lowest row index on ties) is made non-negative. Columns are independent,
// so applying this to a matrix and then slicing leading columns equals
// slicing first and then applying it.
void apply_sign_convention(Eigen::MatrixXd& u);

// First k left singular vectors of an unfolding, as orthonormal columns.
// Computed from the row Gram matrix with the Jacobi eigensolver, signs
// fixed by apply_sign_convention. Requires 1 <= k <= m.rows.
Eigen::MatrixXd top_left_singular_vectors(const UnfoldedMatrix& m, std::int64_t k);

// Squared singular values of the matricization over a mode subset;
// non-increasing, length min(rows, cols).
std::vector<double> subset_sq_singular_values(const DenseTensor& x,
                                              const std::vector<int>& subset);

} // namespace coreshape
