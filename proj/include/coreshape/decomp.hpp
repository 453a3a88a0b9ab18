#pragma once

#include <vector>

#include <Eigen/Dense>

#include "coreshape/core_shape.hpp"
#include "coreshape/spectra.hpp"
#include "coreshape/tensor.hpp"

namespace coreshape {

// Tucker representation: core of shape (R_1..R_N) plus one I_n x R_n
// factor with orthonormal columns per mode.
struct TuckerDecomposition {
    DenseTensor core;
    std::vector<Eigen::MatrixXd> factors;

    CoreShape core_shape() const;
    std::vector<std::int64_t> full_shape() const; // (I_1..I_N), from factor rows
    std::int64_t size() const;                    // prod R_n + sum I_n R_n
};

// Truncated higher-order SVD: factor n holds the top R_n left singular
// vectors of the mode-n unfolding of X; core = X x_1 U_1^T ... x_N U_N^T.
TuckerDecomposition tucker_hosvd(const DenseTensor& x, const CoreShape& r);

// core x_1 U_1 ... x_N U_N.
DenseTensor reconstruct(const TuckerDecomposition& d);

// Higher-order orthogonal iteration (alternating least squares). Modes are
// updated in ascending order; starts from `init` when given (must match X
// and r), otherwise from the truncated HOSVD. iters == 0 returns the start
// point unchanged. If loss_trace is non-null it receives one loss value per
// sweep, computed as ||X||^2 - ||core||^2 (exact for orthonormal factors
// with the projected core, which is what every sweep produces).
TuckerDecomposition hooi(const DenseTensor& x, const CoreShape& r, int iters,
                         const TuckerDecomposition* init = nullptr,
                         std::vector<double>* loss_trace = nullptr);

// Honest squared reconstruction error ||X - reconstruct(D)||_F^2.
double loss(const DenseTensor& x, const TuckerDecomposition& d);

// Sum of the discarded squared singular values,
// sum_n sum_{i > R_n} (sigma_i^(n))^2. Upper-bounds the HOSVD loss; at
// most N times the optimal loss.
double surrogate_loss(const ModeSpectra& s, const CoreShape& r);

// loss / ||X||_F^2.
double rre(const DenseTensor& x, const TuckerDecomposition& d);

} // namespace coreshape
