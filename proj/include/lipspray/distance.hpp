#pragma once

#include "lipspray/convexity.hpp"

#include <cstdint>

namespace lipspray {

/// Signed squared distance D²_p(q) = 2L(p, log_p q) and its gradient
/// 2g_{(q,P)}(P, ·), P = P(p, q). Evaluators are stateless.
struct DistanceField {
    SprayField spray;
    FundamentalTensor tensor;
    /// Constants of the ball whose Picard pipeline is used for log.
    ConvexityConstants constants;
    Vec p;
    LogOptions log;

    Signature signature() const { return tensor.signature; }
};

/// Log tolerances tight enough for finite differences of D².
LogOptions distance_log_options(const ConvexityConstants& c);

DistanceField make_distance_field(const SprayField& s, const FundamentalTensor& g, const ConvexityConstants& c,
                                  const Vec& p);

/// Same field with another base point.
DistanceField rebase(const DistanceField& f, const Vec& p);

double squared_distance(const DistanceField& f, const Vec& q);

/// Covector w ↦ 2g_{(q,P)}(P, w) as a vector of components.
Vec gauss_gradient(const DistanceField& f, const Vec& q);

/// D²_p(q) and the gradient from a single log solve.
struct DistanceSample {
    double value = 0.0;
    Vec gradient;
    Vec v;  // log_p q
    Vec P;  // P(p, q)
};
DistanceSample distance_sample(const DistanceField& f, const Vec& q);

struct GaussCheckOptions {
    int samples = 50;
    std::uint64_t seed = 0;
    /// Finite-difference step; non-positive means 1e-4 · radius.
    double h = 0.0;
    double tolerance = 1e-5;
    /// Sampling ball for q around p; non-positive means half the log radius.
    double radius = 0.0;
};

/// Central difference of D²_p along random unit w against the gradient.
/// values: "C" = worst residual / h, "h", and the radial identity
/// dD²(P) − 2D² as "radial_residual".
ProbeReport gauss_check(const DistanceField& f, const GaussCheckOptions& options = {});

struct RadialFlowOptions {
    double level = 0.04;
    double time = 0.6931471805599453;
    int samples = 8;
    int steps = 12;
    std::uint64_t seed = 0;
    double tolerance = 1e-5;
};

/// Integrates q' = −P(p, q) for the given time from points on the level
/// set D²_p = s and compares D² at the end with s·e^{−2t}.
ProbeReport radial_flow_probe(const DistanceField& f, const RadialFlowOptions& options = {});

/// Points exp_p(λu) on D²_p = level, λ = √(level / g_u(u, u)), for sampled
/// chart directions u whose g-norm has the sign of the level.
std::vector<Vec> level_points(const DistanceField& f, double level, int count, std::uint64_t seed);

/// Spray, tensor and certificate moved to a normalized chart around its
/// origin, with the distance field based there.
struct NormalizedProblem {
    SprayField spray;
    FundamentalTensor tensor;
    ConvexityCertificate cert;
    DistanceField field;
};

/// Certifies the moved spray on the image of B(p, 0.9 r) under the chart.
NormalizedProblem normalized_problem(const ConvexityCertificate& cert, const SprayField& s, const FundamentalTensor& g,
                                     const NormalizedChart& chart, const CertifyOptions& options = {});

struct ConvexityProbeOptions {
    double epsilon = 0.2;
    int samples = 24;
    std::uint64_t seed = 0;
    /// Starting sampling radius in the normalized chart; non-positive means
    /// the certified radius there.
    double radius = 0.0;
    int max_halvings = 6;
    ExpOptions exp{};
};

/// Affine and arc-length forms of the monotone gradient inequality and
/// the midpoint inequality with λ = 2 − ε, in the normalized chart, halving
/// the radius until all samples pass. values: worst ratio per clause and
/// radius, "passing_radius" (0 if none).
ProbeReport strong_convexity_probe_riemannian(const ConvexityCertificate& cert, const SprayField& s,
                                              const FundamentalTensor& g, const NormalizedChart& chart,
                                              const ConvexityProbeOptions& options = {});

/// D²_q(x(½)) ≤ ½D²_q(x(0)) + ½D²_q(x(1)) − ½λ·¼·D(x(0), x(1))² on geodesic
/// triples sampled in B(center, radius).
ProbeReport midpoint_probe(const DistanceField& f, const Vec& center, double radius, double lambda, int samples,
                           std::uint64_t seed = 0);

/// Geodesics between points of a metric ball D²_p < r² stay in it.
ProbeReport metric_ball_probe(const DistanceField& f, double r, int pairs, std::uint64_t seed = 0);

/// Two-point inequality for Lorentzian D², plus positivity of
/// r = g + 2 dx⁰ ⊗ dx⁰ in the normalized chart. values: "worst_lhs",
/// "min_r_eigenvalue", "passing_radius".
ProbeReport lorentzian_two_point_probe(const ConvexityCertificate& cert, const SprayField& s,
                                       const FundamentalTensor& g, const NormalizedChart& chart,
                                       const ConvexityProbeOptions& options = {});

struct SpacelikeLevelOptions {
    double level = -0.04;
    double epsilon = 0.3;
    int samples = 24;
    std::uint64_t seed = 0;
    /// Interior nodes of each connecting geodesic checked for the sublevel.
    int interior_nodes = 7;
};

/// Pairs on the level set D²_q = c inside the sub-ball O, joined by
/// geodesics that must be spacelike, satisfy the arc-length gradient
/// inequality and the λ = 2 − ε midpoint inequality, and stay strictly in
/// the sublevel set.
ProbeReport spacelike_level_probe(const DistanceField& f, const ChartBox& O, const SpacelikeLevelOptions& options = {});

enum class PerturbationMode { piecewise_geodesic, smooth_bump };

std::string_view to_string(PerturbationMode m);

struct PerturbationFamily {
    std::vector<PerturbationMode> modes{PerturbationMode::piecewise_geodesic, PerturbationMode::smooth_bump};
    /// Amplitudes relative to ‖q − p‖, cycled over samples.
    std::vector<double> amplitudes{0.3, 0.1, 0.03, 0.01};
    int count = 50;
    bool causal = false;
    std::uint64_t seed = 0;
};

/// Every sampled curve from p to q is at least as long as the geodesic.
/// Non-reversible metrics also check the backward direction.
ProbeReport minimization_probe(const DistanceField& f, const Vec& q, const PerturbationFamily& family = {});

/// Every sampled future causal curve from p to q has proper time at most
/// that of the geodesic; log_p along the curves is future causal and D²_p
/// decreases along them.
ProbeReport maximization_probe(const DistanceField& f, const Vec& q, PerturbationFamily family = {});

}  // namespace lipspray
