#include "lipspray/kernels.hpp"

#include <atomic>
#include <cassert>
#include <cstdlib>
#include <cstring>

namespace lipspray::kernels {

namespace {

Isa detect() {
    if (const char* env = std::getenv("LIPSPRAY_ISA"); env && std::strcmp(env, "scalar") == 0)
        return Isa::scalar;
    return avx2_available() ? Isa::avx2 : Isa::scalar;
}

std::atomic<Isa>& current() {
    static std::atomic<Isa> isa{detect()};
    return isa;
}

}  // namespace

std::string_view to_string(Isa isa) { return isa == Isa::avx2 ? "avx2" : "scalar"; }

bool avx2_available() {
#if defined(LIPSPRAY_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
    static const bool ok = __builtin_cpu_supports("avx2") != 0;
    return ok;
#else
    return false;
#endif
}

Isa active_isa() { return current().load(std::memory_order_relaxed); }

void force_isa(Isa isa) {
    if (isa == Isa::avx2 && !avx2_available()) isa = Isa::scalar;
    current().store(isa, std::memory_order_relaxed);
}

void interval_increments(std::span<const double> f, double h, std::span<double> out) {
    if (active_isa() == Isa::avx2)
        avx2::interval_increments(f, h, out);
    else
        scalar::interval_increments(f, h, out);
}

void prefix_sum(std::span<const double> inc, double start, std::span<double> out) {
    assert(out.size() == inc.size() + 1);
    double acc = start;
    out[0] = acc;
    for (std::size_t i = 0; i < inc.size(); ++i) {
        acc += inc[i];
        out[i + 1] = acc;
    }
}

void cumulative_integral(std::span<const double> f, double h, double start, std::span<double> out) {
    // out doubles as scratch for the increments: increments land in
    // out[1..], then the prefix sum runs in place left to right.
    interval_increments(f, h, out.subspan(1));
    double acc = start;
    out[0] = acc;
    for (std::size_t i = 1; i < out.size(); ++i) {
        acc += out[i];
        out[i] = acc;
    }
}

double max_node_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                         std::size_t count) {
    if (active_isa() == Isa::avx2) return avx2::max_node_distance(a, b, dim, count);
    return scalar::max_node_distance(a, b, dim, count);
}

double max_node_distance_to(std::span<const double> a, std::span<const double> c, std::size_t count) {
    if (active_isa() == Isa::avx2) return avx2::max_node_distance_to(a, c, count);
    return scalar::max_node_distance_to(a, c, count);
}

}  // namespace lipspray::kernels
