#pragma once

#include <string>

#include "coreshape/tensor.hpp"

namespace coreshape {

// Reads a NPY v1.0 file holding a little-endian float64 C-order array.
// Throws format_error on bad magic, unsupported version/dtype,
// fortran_order arrays, 0-dimensional shapes or truncated payloads.
DenseTensor read_npy(const std::string& path);

// Writes the tensor as NPY v1.0, dtype '<f8', C order.
void write_npy(const DenseTensor& x, const std::string& path);

} // namespace coreshape
