#include "lipspray/kernels.hpp"

#include <algorithm>
#include <cassert>
#include <cmath>

#if defined(LIPSPRAY_HAVE_AVX2)
#include <immintrin.h>
#endif

namespace lipspray::kernels::avx2 {

#if defined(LIPSPRAY_HAVE_AVX2)

namespace {

double hmax(__m256d v) {
    __m128d lo = _mm256_castpd256_pd128(v);
    __m128d hi = _mm256_extractf128_pd(v, 1);
    __m128d m = _mm_max_pd(lo, hi);
    m = _mm_max_pd(m, _mm_unpackhi_pd(m, m));
    return _mm_cvtsd_f64(m);
}

}  // namespace

void interval_increments(std::span<const double> f, double h, std::span<double> out) {
    assert(f.size() % 2 == 1 && out.size() + 1 == f.size());
    const std::size_t n = out.size();
    const double w = h / 12.0;
    const __m256d vw = _mm256_set1_pd(w);
    const __m256d five = _mm256_set1_pd(5.0);
    const __m256d eight = _mm256_set1_pd(8.0);
    // lanes 0,2 take the even stencil, lanes 1,3 the odd one (i starts even)
    const __m256d odd_mask = _mm256_castsi256_pd(_mm256_set_epi64x(-1, 0, -1, 0));

    std::size_t i = 0;
    if (n >= 1) {
        out[0] = w * (5.0 * f[0] + 8.0 * f[1] - f[2]);
        i = 1;
    }
    if (n >= 2) {
        out[1] = w * (-f[0] + 8.0 * f[1] + 5.0 * f[2]);
        i = 2;
    }
    for (; i + 4 <= n; i += 4) {
        const __m256d fm = _mm256_loadu_pd(&f[i - 1]);
        const __m256d f0 = _mm256_loadu_pd(&f[i]);
        const __m256d f1 = _mm256_loadu_pd(&f[i + 1]);
        const __m256d f2 = _mm256_loadu_pd(&f[i + 2]);
        // even: 5 f0 + 8 f1 - f2
        const __m256d even = _mm256_sub_pd(_mm256_add_pd(_mm256_mul_pd(five, f0), _mm256_mul_pd(eight, f1)), f2);
        // odd: -fm + 8 f0 + 5 f1
        const __m256d odd = _mm256_add_pd(_mm256_sub_pd(_mm256_mul_pd(eight, f0), fm), _mm256_mul_pd(five, f1));
        const __m256d r = _mm256_blendv_pd(even, odd, odd_mask);
        _mm256_storeu_pd(&out[i], _mm256_mul_pd(vw, r));
    }
    for (; i < n; ++i) {
        if (i % 2 == 0)
            out[i] = w * (5.0 * f[i] + 8.0 * f[i + 1] - f[i + 2]);
        else
            out[i] = w * (-f[i - 1] + 8.0 * f[i] + 5.0 * f[i + 1]);
    }
}

double max_node_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                         std::size_t count) {
    __m256d worst = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        __m256d s = _mm256_setzero_pd();
        for (std::size_t c = 0; c < dim; ++c) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&a[c * count + i]), _mm256_loadu_pd(&b[c * count + i]));
            s = _mm256_add_pd(s, _mm256_mul_pd(d, d));
        }
        worst = _mm256_max_pd(worst, s);
    }
    double tail = hmax(worst);
    for (; i < count; ++i) {
        double s = 0.0;
        for (std::size_t c = 0; c < dim; ++c) {
            const double d = a[c * count + i] - b[c * count + i];
            s += d * d;
        }
        tail = std::max(tail, s);
    }
    return std::sqrt(tail);
}

double max_node_distance_to(std::span<const double> a, std::span<const double> c, std::size_t count) {
    __m256d worst = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 4 <= count; i += 4) {
        __m256d s = _mm256_setzero_pd();
        for (std::size_t k = 0; k < c.size(); ++k) {
            const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(&a[k * count + i]), _mm256_set1_pd(c[k]));
            s = _mm256_add_pd(s, _mm256_mul_pd(d, d));
        }
        worst = _mm256_max_pd(worst, s);
    }
    double tail = hmax(worst);
    for (; i < count; ++i) {
        double s = 0.0;
        for (std::size_t k = 0; k < c.size(); ++k) {
            const double d = a[k * count + i] - c[k];
            s += d * d;
        }
        tail = std::max(tail, s);
    }
    return std::sqrt(tail);
}

#else

void interval_increments(std::span<const double> f, double h, std::span<double> out) {
    scalar::interval_increments(f, h, out);
}

double max_node_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                         std::size_t count) {
    return scalar::max_node_distance(a, b, dim, count);
}

double max_node_distance_to(std::span<const double> a, std::span<const double> c, std::size_t count) {
    return scalar::max_node_distance_to(a, c, count);
}

#endif

}  // namespace lipspray::kernels::avx2
