#pragma once

#include <Eigen/Dense>

namespace coreshape {

struct SymmetricEigen {
    Eigen::VectorXd values;   // non-increasing
    Eigen::MatrixXd vectors;  // orthonormal columns, vectors.col(i) <-> values(i)
};

// Cyclic-by-rows Jacobi eigensolver for symmetric matrices. Sweeps until
// the off-diagonal Frobenius mass is below 1e-12 * ||A||_F (at most 64
// sweeps). Fully deterministic: fixed rotation order, stable sort of the
// eigenpairs.
SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a);

} // namespace coreshape
