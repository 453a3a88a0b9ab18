#include "coreshape/decomp.hpp"

#include <cmath>
#include <stdexcept>

namespace coreshape {

namespace {

void check_ranks(const DenseTensor& x, const CoreShape& r) {
    if (r.order() != x.order())
        throw std::invalid_argument("core shape order must match tensor order");
    for (int n = 1; n <= x.order(); ++n) {
        const std::int64_t rn = r.ranks[static_cast<std::size_t>(n - 1)];
        if (rn < 1 || rn > x.dim(n))
            throw std::invalid_argument("ranks must satisfy 1 <= R_n <= I_n");
    }
}

} // namespace

CoreShape TuckerDecomposition::core_shape() const {
    return CoreShape(core.shape());
}

std::vector<std::int64_t> TuckerDecomposition::full_shape() const {
    std::vector<std::int64_t> s;
    s.reserve(factors.size());
    for (const auto& f : factors) s.push_back(f.rows());
    return s;
}

std::int64_t TuckerDecomposition::size() const {
    return tucker_size(full_shape(), core_shape());
}

TuckerDecomposition tucker_hosvd(const DenseTensor& x, const CoreShape& r) {
    check_ranks(x, r);
    TuckerDecomposition d;
    d.factors.reserve(static_cast<std::size_t>(x.order()));
    for (int n = 1; n <= x.order(); ++n)
        d.factors.push_back(top_left_singular_vectors(
            unfold(x, n), r.ranks[static_cast<std::size_t>(n - 1)]));

    d.core = x;
    for (int n = 1; n <= x.order(); ++n)
        d.core = mode_product(d.core, n,
                              d.factors[static_cast<std::size_t>(n - 1)].transpose());
    return d;
}

DenseTensor reconstruct(const TuckerDecomposition& d) {
    DenseTensor x = d.core;
    for (int n = 1; n <= x.order(); ++n)
        x = mode_product(x, n, d.factors[static_cast<std::size_t>(n - 1)]);
    return x;
}

TuckerDecomposition hooi(const DenseTensor& x, const CoreShape& r, int iters,
                         const TuckerDecomposition* init,
                         std::vector<double>* loss_trace) {
    check_ranks(x, r);
    if (iters < 0) throw std::invalid_argument("hooi: iters must be >= 0");
    if (loss_trace) loss_trace->clear();

    TuckerDecomposition d;
    if (init) {
        if (init->full_shape() != x.shape() || init->core_shape() != r)
            throw std::invalid_argument("hooi: init does not match tensor and ranks");
        d = *init;
    } else {
        d = tucker_hosvd(x, r);
    }
    if (iters == 0) return d;

    const int order = x.order();
    double fro_sq = 0.0;
    for (double v : x.data()) fro_sq += v * v;

    for (int it = 0; it < iters; ++it) {
        for (int n = 1; n <= order; ++n) {
            // project on every mode except n, then refresh factor n
            DenseTensor y = x;
            for (int m = 1; m <= order; ++m) {
                if (m == n) continue;
                y = mode_product(y, m, d.factors[static_cast<std::size_t>(m - 1)].transpose());
            }
            d.factors[static_cast<std::size_t>(n - 1)] = top_left_singular_vectors(
                unfold(y, n), r.ranks[static_cast<std::size_t>(n - 1)]);
            if (n == order)
                d.core = mode_product(y, n,
                                      d.factors[static_cast<std::size_t>(n - 1)].transpose());
        }
        if (loss_trace) {
            double core_sq = 0.0;
            for (double v : d.core.data()) core_sq += v * v;
            loss_trace->push_back(fro_sq - core_sq);
        }
    }
    return d;
}

double loss(const DenseTensor& x, const TuckerDecomposition& d) {
    const DenseTensor xhat = reconstruct(d);
    if (xhat.shape() != x.shape())
        throw std::invalid_argument("loss: decomposition does not match tensor shape");
    const auto& a = x.data();
    const auto& b = xhat.data();
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double diff = a[i] - b[i];
        s += diff * diff;
    }
    return s;
}

double surrogate_loss(const ModeSpectra& s, const CoreShape& r) {
    if (r.ranks.size() != s.sq_singular_values.size())
        throw std::invalid_argument("surrogate_loss: order mismatch");
    double total = 0.0;
    for (std::size_t n = 0; n < r.ranks.size(); ++n) {
        const auto& vals = s.sq_singular_values[n];
        const std::int64_t rn = r.ranks[n];
        if (rn < 1 || rn > static_cast<std::int64_t>(vals.size()))
            throw std::invalid_argument("surrogate_loss: rank out of range");
        for (std::size_t i = static_cast<std::size_t>(rn); i < vals.size(); ++i)
            total += vals[i];
    }
    return total;
}

double rre(const DenseTensor& x, const TuckerDecomposition& d) {
    double fro_sq = 0.0;
    for (double v : x.data()) fro_sq += v * v;
    if (fro_sq == 0.0)
        throw std::invalid_argument("rre: undefined for the zero tensor");
    return loss(x, d) / fro_sq;
}

} // namespace coreshape
