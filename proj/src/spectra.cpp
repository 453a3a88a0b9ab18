#include "coreshape/spectra.hpp"

#include <algorithm>
#include <stdexcept>

#include "coreshape/jacobi.hpp"

namespace coreshape {

namespace {

// Eigenvalues of M M^T (equivalently M^T M) through the smaller Gram
// matrix; clamped to >= 0 and zero-padded to out_len.
std::vector<double> gram_eigenvalues(const UnfoldedMatrix& m, std::int64_t out_len) {
    const auto mat = m.matrix();
    Eigen::MatrixXd gram;
    if (m.rows <= m.cols)
        gram = mat * mat.transpose();
    else
        gram = mat.transpose() * mat;

    const SymmetricEigen eig = jacobi_eigen(gram);
    std::vector<double> vals(static_cast<std::size_t>(out_len), 0.0);
    const std::int64_t n = std::min<std::int64_t>(eig.values.size(), out_len);
    for (std::int64_t i = 0; i < n; ++i)
        vals[static_cast<std::size_t>(i)] = std::max(0.0, eig.values(i));
    return vals;
}

} // namespace

ModeSpectra mode_sq_singular_values(const DenseTensor& x) {
    ModeSpectra s;
    s.sq_singular_values.reserve(static_cast<std::size_t>(x.order()));
    for (int n = 1; n <= x.order(); ++n) {
        const UnfoldedMatrix m = unfold(x, n);
        s.sq_singular_values.push_back(gram_eigenvalues(m, x.dim(n)));
    }
    double fro_sq = 0.0;
    for (double v : x.data()) fro_sq += v * v;
    s.tensor_fro_sq = fro_sq;
    return s;
}

void apply_sign_convention(Eigen::MatrixXd& u) {
    for (Eigen::Index j = 0; j < u.cols(); ++j) {
        Eigen::Index arg = 0;
        double best = -1.0;
        for (Eigen::Index i = 0; i < u.rows(); ++i) {
            const double mag = std::abs(u(i, j));
            if (mag > best) { best = mag; arg = i; }
        }
        if (u(arg, j) < 0.0) u.col(j) = -u.col(j);
    }
}

Eigen::MatrixXd top_left_singular_vectors(const UnfoldedMatrix& m, std::int64_t k) {
    if (k < 1 || k > m.rows)
        throw std::invalid_argument("top_left_singular_vectors: need 1 <= k <= rows");

    const auto mat = m.matrix();
    // Row-space vectors are needed even past the rank of M, so always use
    // the rows x rows Gram matrix.
    Eigen::MatrixXd gram = mat * mat.transpose();
    const SymmetricEigen eig = jacobi_eigen(gram);

    Eigen::MatrixXd u = eig.vectors.leftCols(k);
    apply_sign_convention(u);
    return u;
}

std::vector<double> subset_sq_singular_values(const DenseTensor& x,
                                              const std::vector<int>& subset) {
    const UnfoldedMatrix m = matricize(x, subset);
    return gram_eigenvalues(m, std::min(m.rows, m.cols));
}

} // namespace coreshape
