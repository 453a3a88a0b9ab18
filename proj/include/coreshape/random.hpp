#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace coreshape {

// Deterministic standard-normal stream. Uniforms are built directly from
// mt19937_64 output bits and fed through Box-Muller, so the sequence is
// identical across platforms and standard libraries for a given seed.
class GaussianSampler {
public:
    explicit GaussianSampler(std::uint64_t seed) : rng_(seed) {}

    // uniform in [0, 1) with 53 random bits
    double uniform() {
        return static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

    double next() {
        if (has_spare_) {
            has_spare_ = false;
            return spare_;
        }
        double u1 = uniform();
        while (u1 <= 0.0) u1 = uniform();
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double theta = 2.0 * M_PI * u2;
        spare_ = r * std::sin(theta);
        has_spare_ = true;
        return r * std::cos(theta);
    }

private:
    std::mt19937_64 rng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

} // namespace coreshape
