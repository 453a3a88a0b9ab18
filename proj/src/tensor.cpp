#include "coreshape/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <numeric>
#include <stdexcept>

namespace coreshape {

namespace {

std::int64_t checked_element_count(const std::vector<std::int64_t>& shape) {
    if (shape.empty())
        throw std::invalid_argument("tensor shape must have at least one mode");
    std::int64_t n = 1;
    for (std::int64_t d : shape) {
        if (d < 1)
            throw std::invalid_argument("tensor dims must be >= 1");
        n *= d;
    }
    return n;
}

} // namespace

DenseTensor::DenseTensor(std::vector<std::int64_t> shape)
    : shape_(std::move(shape)),
      data_(static_cast<std::size_t>(checked_element_count(shape_)), 0.0) {}

DenseTensor::DenseTensor(std::vector<std::int64_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
    if (checked_element_count(shape_) != static_cast<std::int64_t>(data_.size()))
        throw std::invalid_argument("tensor data length does not match shape");
    for (double v : data_)
        if (!std::isfinite(v))
            throw std::invalid_argument("tensor entries must be finite");
}

std::int64_t flat_index(const std::vector<std::int64_t>& shape,
                        std::span<const std::int64_t> idx) {
    if (idx.size() != shape.size())
        throw std::invalid_argument("flat_index: index order mismatch");
    std::int64_t off = 0;
    for (std::size_t k = 0; k < shape.size(); ++k) {
        if (idx[k] < 0 || idx[k] >= shape[k])
            throw std::invalid_argument("flat_index: index out of range");
        off = off * shape[k] + idx[k];
    }
    return off;
}

UnfoldedMatrix unfold(const DenseTensor& x, int mode) {
    const int n = x.order();
    if (mode < 1 || mode > n)
        throw std::invalid_argument("unfold: mode out of range");
    const auto& shape = x.shape();

    std::int64_t inner_sz = 1; // product of dims after the mode
    for (int m = mode; m < n; ++m) inner_sz *= shape[static_cast<std::size_t>(m)];
    std::int64_t outer_sz = 1; // product of dims before the mode
    for (int m = 0; m + 1 < mode; ++m) outer_sz *= shape[static_cast<std::size_t>(m)];
    const std::int64_t i_n = shape[static_cast<std::size_t>(mode - 1)];

    UnfoldedMatrix m;
    m.rows = i_n;
    m.cols = outer_sz * inner_sz;
    m.modes = {mode};
    m.data.resize(static_cast<std::size_t>(m.rows * m.cols));

    // Row-major tensor layout is [outer][i_n][inner]; a column is the pair
    // (outer, inner) with outer most significant, so each (outer, i) block of
    // `inner_sz` contiguous entries moves as one chunk.
    const double* src = x.data().data();
    for (std::int64_t outer = 0; outer < outer_sz; ++outer)
        for (std::int64_t i = 0; i < i_n; ++i)
            std::memcpy(m.data.data() + (i * m.cols + outer * inner_sz),
                        src + (outer * i_n + i) * inner_sz,
                        static_cast<std::size_t>(inner_sz) * sizeof(double));
    return m;
}

UnfoldedMatrix matricize(const DenseTensor& x, const std::vector<int>& subset) {
    const int n = x.order();
    if (subset.empty())
        throw std::invalid_argument("matricize: subset must be non-empty");
    for (std::size_t k = 0; k < subset.size(); ++k) {
        if (subset[k] < 1 || subset[k] > n)
            throw std::invalid_argument("matricize: mode out of range");
        if (k > 0 && subset[k] <= subset[k - 1])
            throw std::invalid_argument("matricize: subset must be strictly ascending");
    }
    if (subset.size() == static_cast<std::size_t>(n))
        throw std::invalid_argument("matricize: subset must be a proper subset of the modes");
    if (subset.size() == 1)
        return unfold(x, subset[0]);

    const auto& shape = x.shape();
    std::vector<bool> in_subset(static_cast<std::size_t>(n), false);
    for (int mode : subset) in_subset[static_cast<std::size_t>(mode - 1)] = true;

    // Per-mode stride into the row index (subset modes) or column index
    // (complement), lexicographic with earlier modes most significant.
    std::vector<std::int64_t> row_stride(static_cast<std::size_t>(n), 0);
    std::vector<std::int64_t> col_stride(static_cast<std::size_t>(n), 0);
    std::int64_t rows = 1, cols = 1;
    for (int m = n - 1; m >= 0; --m) {
        const auto mu = static_cast<std::size_t>(m);
        if (in_subset[mu]) {
            row_stride[mu] = rows;
            rows *= shape[mu];
        } else {
            col_stride[mu] = cols;
            cols *= shape[mu];
        }
    }

    UnfoldedMatrix m;
    m.rows = rows;
    m.cols = cols;
    m.modes = subset;
    m.data.resize(static_cast<std::size_t>(rows * cols));

    std::vector<std::int64_t> idx(static_cast<std::size_t>(n), 0);
    std::int64_t r = 0, c = 0;
    const auto& src = x.data();
    for (std::int64_t flat = 0; flat < x.size(); ++flat) {
        m.data[static_cast<std::size_t>(r * cols + c)] = src[static_cast<std::size_t>(flat)];
        // advance the row-major multi-index with carries
        for (int m2 = n - 1; m2 >= 0; --m2) {
            const auto mu = static_cast<std::size_t>(m2);
            ++idx[mu];
            if (in_subset[mu]) r += row_stride[mu]; else c += col_stride[mu];
            if (idx[mu] < shape[mu]) break;
            idx[mu] = 0;
            if (in_subset[mu]) r -= row_stride[mu] * shape[mu];
            else c -= col_stride[mu] * shape[mu];
        }
    }
    return m;
}

namespace {

DenseTensor refold_raw(const double* data, std::int64_t rows, std::int64_t cols,
                       int mode, const std::vector<std::int64_t>& shape) {
    const int n = static_cast<int>(shape.size());
    if (mode < 1 || mode > n)
        throw std::invalid_argument("refold: mode out of range");
    std::int64_t inner_sz = 1, outer_sz = 1;
    for (int m = mode; m < n; ++m) inner_sz *= shape[static_cast<std::size_t>(m)];
    for (int m = 0; m + 1 < mode; ++m) outer_sz *= shape[static_cast<std::size_t>(m)];
    const std::int64_t i_n = shape[static_cast<std::size_t>(mode - 1)];
    if (rows != i_n || cols != outer_sz * inner_sz)
        throw std::invalid_argument("refold: matrix extents do not match shape");

    DenseTensor x(shape);
    double* dst = x.data().data();
    for (std::int64_t outer = 0; outer < outer_sz; ++outer)
        for (std::int64_t i = 0; i < i_n; ++i)
            std::memcpy(dst + (outer * i_n + i) * inner_sz,
                        data + (i * cols + outer * inner_sz),
                        static_cast<std::size_t>(inner_sz) * sizeof(double));
    return x;
}

} // namespace

DenseTensor refold(const UnfoldedMatrix& m, int mode,
                   const std::vector<std::int64_t>& shape) {
    if (m.modes.size() != 1 || m.modes[0] != mode)
        throw std::invalid_argument("refold: matrix is not a mode unfolding of this mode");
    return refold_raw(m.data.data(), m.rows, m.cols, mode, shape);
}

DenseTensor mode_product(const DenseTensor& x, int mode, const Eigen::MatrixXd& a) {
    if (mode < 1 || mode > x.order())
        throw std::invalid_argument("mode_product: mode out of range");
    if (a.cols() != x.dim(mode))
        throw std::invalid_argument("mode_product: matrix cols must equal the mode dim");

    UnfoldedMatrix m = unfold(x, mode);
    RowMajorMatrix prod = a * m.matrix();

    std::vector<std::int64_t> out_shape = x.shape();
    out_shape[static_cast<std::size_t>(mode - 1)] = a.rows();
    return refold_raw(prod.data(), prod.rows(), prod.cols(), mode, out_shape);
}

double inner(const DenseTensor& x, const DenseTensor& y) {
    if (x.shape() != y.shape())
        throw std::invalid_argument("inner: shape mismatch");
    const auto& xs = x.data();
    const auto& ys = y.data();
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += xs[i] * ys[i];
    return s;
}

double fro_norm(const DenseTensor& x) {
    double s = 0.0;
    for (double v : x.data()) s += v * v;
    return std::sqrt(s);
}

} // namespace coreshape
