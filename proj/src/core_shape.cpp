#include "coreshape/core_shape.hpp"

#include <limits>
#include <stdexcept>

namespace coreshape {

std::int64_t sat_add(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_add_overflow(a, b, &r)) return std::numeric_limits<std::int64_t>::max();
    return r;
}

std::int64_t sat_mul(std::int64_t a, std::int64_t b) {
    std::int64_t r;
    if (__builtin_mul_overflow(a, b, &r)) return std::numeric_limits<std::int64_t>::max();
    return r;
}

std::int64_t tucker_size(const std::vector<std::int64_t>& dims, const CoreShape& r) {
    if (dims.size() != r.ranks.size())
        throw std::invalid_argument("tucker_size: order mismatch");
    std::int64_t core = 1, factors = 0;
    for (std::size_t n = 0; n < dims.size(); ++n) {
        if (r.ranks[n] < 1)
            throw std::invalid_argument("tucker_size: ranks must be >= 1");
        core = sat_mul(core, r.ranks[n]);
        factors = sat_add(factors, sat_mul(dims[n], r.ranks[n]));
    }
    return sat_add(core, factors);
}

std::string format_shape(const CoreShape& r) {
    std::string s;
    for (std::size_t n = 0; n < r.ranks.size(); ++n) {
        if (n) s += 'x';
        s += std::to_string(r.ranks[n]);
    }
    return s;
}

} // namespace coreshape
