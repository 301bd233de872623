#include "lipspray/kernels.hpp"

#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

using namespace lipspray;

namespace {

std::vector<double> random_vector(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-2.0, 2.0);
    std::vector<double> v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

}  // namespace

TEST_CASE("simpson increments integrate cubics exactly") {
    // ∫ (1 + 2t − 3t² + 4t³) dt = t + t² − t³ + t⁴
    auto F = [](double t) { return t + t * t - t * t * t + t * t * t * t; };
    for (int N : {2, 4, 16, 64}) {
        const double h = 1.0 / N;
        std::vector<double> f(N + 1), out(N + 1);
        for (int i = 0; i <= N; ++i) {
            const double t = i * h;
            f[i] = 1.0 + 2.0 * t - 3.0 * t * t + 4.0 * t * t * t;
        }
        kernels::cumulative_integral(f, h, 0.5, out);
        // even nodes close Simpson panels and are exact for cubics
        for (int i = 0; i <= N; i += 2) CHECK(out[i] == doctest::Approx(0.5 + F(i * h)).epsilon(1e-14));
        // odd nodes integrate the panel's quadratic interpolant over its first
        // half, which misses 4·∫₀ʰ t(t−h)(t−2h) dt = h⁴
        for (int i = 1; i <= N; i += 2)
            CHECK(out[i] == doctest::Approx(0.5 + F(i * h) - h * h * h * h).epsilon(1e-14));
    }
}

TEST_CASE("simpson increments are exact for quadratics at every node") {
    const int N = 10;
    const double h = 0.3;
    std::vector<double> f(N + 1), out(N + 1);
    for (int i = 0; i <= N; ++i) f[i] = 3.0 - (i * h) * (i * h);
    kernels::cumulative_integral(f, h, 0.0, out);
    for (int i = 0; i <= N; ++i) {
        const double t = i * h;
        CHECK(out[i] == doctest::Approx(3.0 * t - t * t * t / 3.0).epsilon(1e-13));
    }
}

TEST_CASE("scalar and avx2 increments agree") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available; equivalence not exercised");
        return;
    }
    for (std::size_t nodes : {3u, 5u, 9u, 17u, 33u, 129u, 1025u, 4097u}) {
        const auto f = random_vector(nodes, nodes);
        std::vector<double> a(nodes - 1), b(nodes - 1);
        kernels::scalar::interval_increments(f, 0.01, a);
        kernels::avx2::interval_increments(f, 0.01, b);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(std::abs(a[i] - b[i]) <= 1e-15 * (1.0 + std::abs(a[i])));
    }
}

TEST_CASE("scalar and avx2 node distances agree") {
    if (!kernels::avx2_available()) {
        MESSAGE("AVX2 not available; equivalence not exercised");
        return;
    }
    for (std::size_t dim : {1u, 2u, 3u, 4u}) {
        for (std::size_t count : {1u, 3u, 4u, 7u, 65u, 4097u}) {
            const auto a = random_vector(dim * count, 7 * dim + count);
            const auto b = random_vector(dim * count, 11 * dim + count);
            const auto c = random_vector(dim, 13 * dim);
            const double s1 = kernels::scalar::max_node_distance(a, b, dim, count);
            const double s2 = kernels::avx2::max_node_distance(a, b, dim, count);
            CHECK(s1 == doctest::Approx(s2).epsilon(1e-15));
            const double t1 = kernels::scalar::max_node_distance_to(a, c, count);
            const double t2 = kernels::avx2::max_node_distance_to(a, c, count);
            CHECK(t1 == doctest::Approx(t2).epsilon(1e-15));
        }
    }
}

TEST_CASE("node distance matches a direct evaluation") {
    const std::size_t dim = 3, count = 37;
    const auto a = random_vector(dim * count, 1);
    const auto b = random_vector(dim * count, 2);
    double expect = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        double s = 0.0;
        for (std::size_t d = 0; d < dim; ++d) s += std::pow(a[d * count + i] - b[d * count + i], 2);
        expect = std::max(expect, std::sqrt(s));
    }
    for (auto isa : {kernels::Isa::scalar, kernels::Isa::avx2}) {
        kernels::force_isa(isa);
        CHECK(kernels::max_node_distance(a, b, dim, count) == doctest::Approx(expect).epsilon(1e-15));
    }
    kernels::force_isa(kernels::avx2_available() ? kernels::Isa::avx2 : kernels::Isa::scalar);
}

TEST_CASE("prefix sum") {
    const std::vector<double> inc{1.0, 2.0, -0.5};
    std::vector<double> out(4);
    kernels::prefix_sum(inc, 10.0, out);
    CHECK(out == std::vector<double>{10.0, 11.0, 13.0, 12.5});
}

TEST_CASE("forcing scalar dispatch") {
    kernels::force_isa(kernels::Isa::scalar);
    CHECK(kernels::active_isa() == kernels::Isa::scalar);
    kernels::force_isa(kernels::Isa::avx2);
    CHECK(kernels::active_isa() == (kernels::avx2_available() ? kernels::Isa::avx2 : kernels::Isa::scalar));
}
