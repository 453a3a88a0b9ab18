#pragma once

#include <cstdint>
#include <vector>

#include "coreshape/tensor.hpp"

namespace coreshape {

// Draws a random Tucker-structured tensor: a Gaussian core of shape
// core_shape multiplied in every mode by a random orthonormal I_n x R_n
// factor, plus Gaussian noise scaled so that
//   || noise term ||_F = noise_level * || signal ||_F.
// noise_level == 0 gives a tensor of exact multilinear rank core_shape.
// Same (shape, core_shape, noise_level, seed) always gives the same tensor.
DenseTensor gen_synthetic(const std::vector<std::int64_t>& shape,
                          const std::vector<std::int64_t>& core_shape,
                          double noise_level, std::uint64_t seed);

} // namespace coreshape
