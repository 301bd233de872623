#pragma once

#include "lipspray/core.hpp"

#include <cstdint>
#include <random>

namespace lipspray {

using Rng = std::mt19937_64;

/// Uniform point in the Euclidean ball B(center, radius).
inline Vec random_in_ball(Rng& rng, const Vec& center, double radius) {
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    const auto n = center.size();
    for (;;) {
        Vec u(n);
        for (Eigen::Index i = 0; i < n; ++i) u[i] = unif(rng);
        if (u.squaredNorm() <= 1.0) return center + radius * u;
    }
}

/// Uniform unit vector.
inline Vec random_unit(Rng& rng, int n) {
    std::normal_distribution<double> gauss;
    for (;;) {
        Vec u(n);
        for (int i = 0; i < n; ++i) u[i] = gauss(rng);
        const double r = u.norm();
        if (r > 1e-12) return u / r;
    }
}

/// Per-sample generator derived from a run seed, so parallel sweeps draw
/// the same values regardless of scheduling.
inline Rng sample_rng(std::uint64_t seed, std::uint64_t index) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
    return Rng(seq);
}

}  // namespace lipspray
