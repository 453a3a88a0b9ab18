#include "coreshape/synthetic.hpp"

#include <stdexcept>

#include <Eigen/Dense>

#include "coreshape/random.hpp"

namespace coreshape {

DenseTensor gen_synthetic(const std::vector<std::int64_t>& shape,
                          const std::vector<std::int64_t>& core_shape,
                          double noise_level, std::uint64_t seed) {
    const std::size_t n = shape.size();
    if (n == 0) throw std::invalid_argument("gen_synthetic: empty shape");
    if (core_shape.size() != n)
        throw std::invalid_argument("gen_synthetic: core order must match shape order");
    for (std::size_t k = 0; k < n; ++k) {
        if (shape[k] < 1) throw std::invalid_argument("gen_synthetic: dims must be >= 1");
        if (core_shape[k] < 1 || core_shape[k] > shape[k])
            throw std::invalid_argument("gen_synthetic: core dims must satisfy 1 <= R_n <= I_n");
    }
    if (noise_level < 0.0)
        throw std::invalid_argument("gen_synthetic: noise_level must be >= 0");

    GaussianSampler g(seed);

    DenseTensor core(core_shape);
    for (auto& v : core.data()) v = g.next();

    // Draw order is fixed: core first, then one factor per mode, then noise.
    DenseTensor x = core;
    for (std::size_t k = 0; k < n; ++k) {
        Eigen::MatrixXd raw(shape[k], core_shape[k]);
        for (std::int64_t i = 0; i < raw.rows(); ++i)
            for (std::int64_t j = 0; j < raw.cols(); ++j)
                raw(i, j) = g.next();
        Eigen::MatrixXd q = Eigen::HouseholderQR<Eigen::MatrixXd>(raw)
                                .householderQ() *
                            Eigen::MatrixXd::Identity(shape[k], core_shape[k]);
        x = mode_product(x, static_cast<int>(k) + 1, q);
    }

    if (noise_level > 0.0) {
        const double signal_norm = fro_norm(x);
        DenseTensor z(shape);
        for (auto& v : z.data()) v = g.next();
        const double z_norm = fro_norm(z);
        if (z_norm > 0.0 && signal_norm > 0.0) {
            const double s = noise_level * signal_norm / z_norm;
            auto& xd = x.data();
            const auto& zd = z.data();
            for (std::size_t i = 0; i < xd.size(); ++i) xd[i] += s * zd[i];
        }
    }
    return x;
}

} // namespace coreshape
