#pragma once

#include <compare>
#include <cstdint>
#include <string>
#include <vector>

namespace coreshape {

// A candidate multilinear rank (R_1, ..., R_N).
struct CoreShape {
    std::vector<std::int64_t> ranks;

    CoreShape() = default;
    explicit CoreShape(std::vector<std::int64_t> r) : ranks(std::move(r)) {}

    int order() const { return static_cast<int>(ranks.size()); }
    auto operator<=>(const CoreShape&) const = default;
};

// int64 add/mul that clamp at INT64_MAX instead of overflowing; storage
// costs of absurd shapes must still compare correctly against budgets.
std::int64_t sat_add(std::int64_t a, std::int64_t b);
std::int64_t sat_mul(std::int64_t a, std::int64_t b);

// Storage cost of a Tucker representation with the given tensor dims and
// core shape: prod_n R_n + sum_n I_n * R_n (saturating).
std::int64_t tucker_size(const std::vector<std::int64_t>& dims, const CoreShape& r);

// "4x4x4" style rendering used by the CLI.
std::string format_shape(const CoreShape& r);

} // namespace coreshape
