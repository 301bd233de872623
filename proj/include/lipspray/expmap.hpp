#pragma once

#include "lipspray/solver.hpp"

namespace lipspray {

enum class Integrator { picard, reference };

struct ExpOptions {
    Integrator integrator = Integrator::picard;
    PicardOptions picard{.tol = 1e-12};
    /// RK4 steps for the reference integrator.
    int reference_steps = 1000;
};

struct ExpResult {
    Vec p;
    Vec v;
    /// Endpoint γ_v(1) and terminal velocity γ'_v(1).
    Vec q;
    Vec P;
    /// Trajectory on [0, 1]; several Picard pieces are stitched when ‖v‖
    /// approaches delta.
    GeodesicSolution solution;
    int pieces = 1;
};

struct LogOptions {
    double tol = 1e-9;
    int max_iter = 200;
    /// Largest ‖q − p‖ accepted; non-positive means delta_geo.
    double radius_limit = 0.0;
    ExpOptions exp;
};

struct LogResult {
    Vec v;
    int iterations = 0;
    double defect = 0.0;
    bool damped = false;
    /// exp_p(v) at the returned v.
    ExpResult exp;
};

/// Radius of the ball around the base point on which log_p is attempted.
inline double delta_geo(const ConvexityConstants& c) { return c.delta / 4.0; }

ExpResult exp_p(const SprayField& s, const ConvexityConstants& c, const Vec& p, const Vec& v,
                const ExpOptions& options = {});

/// γ_v(−1), computed as the forward solve of H(x, −v) from (p, −v). The
/// returned P is γ'_v(−1).
ExpResult reverse_exp_p(const SprayField& s, const ConvexityConstants& c, const Vec& p, const Vec& v,
                        const ExpOptions& options = {});

/// Fixed point v ← v + λ(q − exp_p(v)) from v = q − p; λ drops from 1 to
/// 0.5 after three iterations without defect decrease.
LogResult log_p(const SprayField& s, const ConvexityConstants& c, const Vec& p, const Vec& q,
                const LogOptions& options = {});

/// P(p, q), the terminal velocity of the connecting geodesic.
Vec position_vector(const SprayField& s, const ConvexityConstants& c, const Vec& p, const Vec& q,
                    const LogOptions& options = {});

/// Slope s(ρ) of (x, v) ↦ (x, exp_x v) − L(x, v), L = [[I,0],[I,I]], over
/// a fixed sample pattern scaled by each radius, against (e^{D(ρ)}−1)/D(ρ) − 1.
ProbeReport strong_differential_probe(const SprayField& s, const ConvexityConstants& c, const Vec& p,
                                      std::span<const double> radii, int samples = 12,
                                      const ExpOptions& options = {});

}  // namespace lipspray
