#pragma once

// Data-parallel inner loops of the Picard iteration. Every kernel has a
// scalar reference version and an AVX2 variant; the dispatcher picks one at
// runtime from CPUID, overridable with LIPSPRAY_ISA=scalar.

#include <cstddef>
#include <span>
#include <string_view>

namespace lipspray::kernels {

enum class Isa { scalar, avx2 };

std::string_view to_string(Isa isa);

/// True when the AVX2 variants were compiled in and the CPU supports them.
bool avx2_available();

/// ISA used by the dispatching entry points below.
Isa active_isa();

/// Overrides the dispatch decision (tests use this to compare variants).
/// Requesting avx2 on a machine without it falls back to scalar.
void force_isa(Isa isa);

/// Per-interval integrals of samples f on a uniform grid with spacing h,
/// from the quadratic interpolant of each Simpson panel. out[i] is the
/// integral over [t_i, t_{i+1}]; f.size() must be odd (an even number of
/// intervals) and out.size() == f.size() - 1.
void interval_increments(std::span<const double> f, double h, std::span<double> out);

/// out[0] = start, out[i+1] = out[i] + inc[i].
void prefix_sum(std::span<const double> inc, double start, std::span<double> out);

/// Cumulative integral start + ∫_0^{t_i} f on the grid (both steps above).
void cumulative_integral(std::span<const double> f, double h, double start, std::span<double> out);

/// max over nodes i of the Euclidean norm of (a_i - b_i), where a and b
/// hold `dim` component rows of `count` nodes each (row-major, SoA).
double max_node_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                         std::size_t count);

/// max over nodes of the Euclidean norm of (a_i - c) for a fixed point c.
double max_node_distance_to(std::span<const double> a, std::span<const double> c, std::size_t count);

namespace scalar {
void interval_increments(std::span<const double> f, double h, std::span<double> out);
double max_node_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                         std::size_t count);
double max_node_distance_to(std::span<const double> a, std::span<const double> c, std::size_t count);
}  // namespace scalar

namespace avx2 {
void interval_increments(std::span<const double> f, double h, std::span<double> out);
double max_node_distance(std::span<const double> a, std::span<const double> b, std::size_t dim,
                         std::size_t count);
double max_node_distance_to(std::span<const double> a, std::span<const double> c, std::size_t count);
}  // namespace avx2

}  // namespace lipspray::kernels
