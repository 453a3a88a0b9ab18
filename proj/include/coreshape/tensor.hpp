#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace coreshape {

using RowMajorMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Dense real tensor of order N >= 1, stored flat in row-major order
// (last index varies fastest).
class DenseTensor {
public:
    DenseTensor() = default;

    // Zero-filled tensor. All dims must be >= 1.
    explicit DenseTensor(std::vector<std::int64_t> shape);

    // Takes ownership of flat row-major data; validates the element count
    // and that every entry is finite.
    DenseTensor(std::vector<std::int64_t> shape, std::vector<double> data);

    int order() const { return static_cast<int>(shape_.size()); }
    const std::vector<std::int64_t>& shape() const { return shape_; }

    // Extent of mode n, 1-based (n in 1..N).
    std::int64_t dim(int n) const { return shape_.at(static_cast<std::size_t>(n) - 1); }

    std::int64_t size() const { return static_cast<std::int64_t>(data_.size()); }

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    double operator[](std::int64_t i) const { return data_[static_cast<std::size_t>(i)]; }
    double& operator[](std::int64_t i) { return data_[static_cast<std::size_t>(i)]; }

private:
    std::vector<std::int64_t> shape_;
    std::vector<double> data_;
};

// Flat row-major offset of the 0-based multi-index idx.
std::int64_t flat_index(const std::vector<std::int64_t>& shape,
                        std::span<const std::int64_t> idx);

// Matrix view of a tensor flattened along a mode (or a subset of modes).
// Row index runs over the selected modes, column index over the rest;
// within each side the original mode order is kept and earlier modes are
// most significant (lexicographic).
struct UnfoldedMatrix {
    std::int64_t rows = 0;
    std::int64_t cols = 0;
    std::vector<int> modes;    // 1-based modes mapped to rows, ascending
    std::vector<double> data;  // row-major, rows*cols entries

    double operator()(std::int64_t r, std::int64_t c) const {
        return data[static_cast<std::size_t>(r * cols + c)];
    }

    Eigen::Map<const RowMajorMatrix> matrix() const {
        return Eigen::Map<const RowMajorMatrix>(data.data(), rows, cols);
    }
};

// Classical mode-n unfolding, n in 1..N. Rows = I_n.
UnfoldedMatrix unfold(const DenseTensor& x, int mode);

// General matricization over a non-empty ascending subset of modes.
// For a singleton subset this is exactly unfold().
UnfoldedMatrix matricize(const DenseTensor& x, const std::vector<int>& subset);

// Inverse of unfold(): rebuilds the tensor of the given shape from its
// mode-n unfolding. m.rows must equal shape[mode-1].
DenseTensor refold(const UnfoldedMatrix& m, int mode,
                   const std::vector<std::int64_t>& shape);

// Mode-n product X x_n A with A of size J x I_n; result has dim J in mode n.
DenseTensor mode_product(const DenseTensor& x, int mode, const Eigen::MatrixXd& a);

// Euclidean inner product of two same-shape tensors.
double inner(const DenseTensor& x, const DenseTensor& y);

// Frobenius norm; fro_norm(x)^2 == inner(x, x).
double fro_norm(const DenseTensor& x);

} // namespace coreshape
