#include "coreshape/jacobi.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace coreshape {

namespace {

double off_diagonal_norm(const Eigen::MatrixXd& w) {
    double s = 0.0;
    for (Eigen::Index p = 0; p < w.rows(); ++p)
        for (Eigen::Index q = p + 1; q < w.cols(); ++q)
            s += 2.0 * w(p, q) * w(p, q);
    return std::sqrt(s);
}

} // namespace

SymmetricEigen jacobi_eigen(const Eigen::MatrixXd& a) {
    if (a.rows() != a.cols())
        throw std::invalid_argument("jacobi_eigen: matrix must be square");
    const Eigen::Index n = a.rows();

    Eigen::MatrixXd w = 0.5 * (a + a.transpose()); // defensive symmetrization
    Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);

    const double tol = 1e-12 * w.norm();
    const int max_sweeps = 64;
    for (int sweep = 0; sweep < max_sweeps && off_diagonal_norm(w) > tol; ++sweep) {
        for (Eigen::Index p = 0; p < n - 1; ++p) {
            for (Eigen::Index q = p + 1; q < n; ++q) {
                const double apq = w(p, q);
                if (apq == 0.0) continue;
                const double theta = (w(q, q) - w(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;
                // W <- J^T W J with the Givens rotation J in the (p,q) plane
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double wkp = w(k, p), wkq = w(k, q);
                    w(k, p) = c * wkp - s * wkq;
                    w(k, q) = s * wkp + c * wkq;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double wpk = w(p, k), wqk = w(q, k);
                    w(p, k) = c * wpk - s * wqk;
                    w(q, k) = s * wpk + c * wqk;
                }
                for (Eigen::Index k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](Eigen::Index i, Eigen::Index j) { return w(i, i) > w(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        out.values(i) = w(order[static_cast<std::size_t>(i)], order[static_cast<std::size_t>(i)]);
        out.vectors.col(i) = v.col(order[static_cast<std::size_t>(i)]);
    }
    return out;
}

} // namespace coreshape
