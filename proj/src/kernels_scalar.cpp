#include "lipspray/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

namespace lipspray::kernels::scalar {

// Even intervals use the panel's left stencil (5, 8, -1), odd intervals the
// right stencil (-1, 8, 5); a pair sums to Simpson's h/3 (1, 4, 1).
void interval_increments(std::span<const double> f, double h, std::span<double> out) {
    assert(f.size() % 2 == 1 && out.size() + 1 == f.size());
    const double w = h / 12.0;
    for (std::size_t i = 0; i + 1 < f.size(); ++i) {
        if (i % 2 == 0)
            out[i] = w * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        else
            out[i] = w * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
    }
}

double max_node_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                         std::size_t count) {
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = a[c * count + i] - b[c * count + i];
            s += d * d;
        }
        worst = std::max(worst, s);
    }
    return std::sqrt(worst);
}

double max_node_distance_to(std::span<const double> a, std::span<const double> c, std::size_t count) {
    double worst = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double d = a[k * count + i] - c[k];
            s += d * d;
        }
        worst = std::max(worst, s);
    }
    return std::sqrt(worst);
}

}  // namespace lipspray::kernels::scalar
