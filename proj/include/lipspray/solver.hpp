#pragma once

#include "lipspray/spray.hpp"

#include <utility>

namespace lipspray {

/// Constants of the Picard pipeline on B̄(center, r).
struct ConvexityConstants {
    Vec center;
    double r = 0.0;
    double M = 0.0;
    double alpha = 0.0;
    double beta = 0.0;
    double safety = 0.9;
    double bound_exp = 0.0;       // (1/M)(1 - e^{-Mr/2}), r/2 at M = 0
    double bound_velocity = 0.0;  // 1/(1 + M)
    double bound_growth = 0.0;    // 1/(c + M), c = (β + √(β² + 4α))/2
    double delta = 0.0;
    double V = 0.0;
    double A = 0.0;
    double B = 0.0;
    double D = 0.0;
};

/// delta = safety · min of the three bounds; remaining constants follow.
ConvexityConstants compute_constants(double alpha, double beta, double M, double r, double safety = 0.9,
                                     const Vec& center = Vec());

/// Derived constants (V, A, B, D) for a prescribed delta.
ConvexityConstants constants_for_delta(double alpha, double beta, double M, double delta);

/// (e^{Dt} - 1)/D with its D → 0 limit t.
double expm1_over(double D, double t = 1.0);

/// Σ_{j>k} D^j / j!.
double exp_tail(double D, int k);

/// Sampled trajectory on a uniform grid.
struct GeodesicSolution {
    std::vector<double> t;
    std::vector<Vec> x;
    std::vector<Vec> v;
    /// H(x_i, v_i) at the nodes, used for Hermite interpolation of v.
    std::vector<Vec> a;

    std::string method;
    int picard_iterations = 0;
    double D = 0.0;
    /// Σ_{j>k} D^j/j! (velocity) and Σ_{j>k} D^{j-1}/j! (position).
    double tail_bound = 0.0;
    double position_tail = 0.0;
    double quadrature_error_estimate = 0.0;
    /// ‖ẋ_k − ẋ_{k−1}‖_∞ and ‖x_k − x_{k−1}‖_∞ for k = 0, 1, ...
    std::vector<double> velocity_differences;
    std::vector<double> position_differences;
    /// max_t ‖ẋ_k(t)‖ per iteration.
    std::vector<double> velocity_sup;
    int grid_intervals = 0;

    double T() const { return t.empty() ? 0.0 : t.back(); }
    const Vec& end_position() const { return x.back(); }
    const Vec& end_velocity() const { return v.back(); }
    Vec position_at(double time) const;
    Vec velocity_at(double time) const;
    /// Error bound for comparisons against another solver.
    double error_bound() const { return tail_bound + position_tail + quadrature_error_estimate; }
};

struct PicardOptions {
    double tol = 1e-10;
    int initial_intervals = 16;
    int max_intervals = 4096;
    int max_iterations = 60;
};

/// Picard iteration of the integral equations on [0, 1] starting from
/// x_{-1} = x0, ẋ_{-1} = 0, with Simpson quadrature on a grid halved until
/// the solution changes by less than tol/10.
GeodesicSolution picard_geodesic(const SprayField& s, const Vec& x0, const Vec& v0, const ConvexityConstants& c,
                                 const PicardOptions& options = {});

/// Classical RK4 with fixed step T/steps; Richardson estimate from runs
/// with 2·steps and 4·steps using the observed convergence order.
GeodesicSolution reference_geodesic(const SprayField& s, const Vec& x0, const Vec& v0, double T, int steps);

/// (x(t), ẋ(t)) via homogeneity for t ≤ 1 and restart-chaining beyond.
std::pair<Vec, Vec> flow(const SprayField& s, const ConvexityConstants& c, double t, const Vec& x0, const Vec& v0,
                         const PicardOptions& options = {});

struct InitialPair {
    Vec x0, v0, y0, w0;
};

/// ‖(x,ẋ)(t) − (y,ẏ)(t)‖_max ≤ Δ0 (1 + (e^{Dt} − 1)/D) on a time grid, a
/// sharper form of Δ0 e^{Dt}/D; both are recorded.
ProbeReport dependence_probe(const SprayField& s, const ConvexityConstants& c, std::span<const InitialPair> pairs,
                             const PicardOptions& options = {});

}  // namespace lipspray
