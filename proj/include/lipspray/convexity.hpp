#pragma once

#include "lipspray/expmap.hpp"
#include "lipspray/finsler.hpp"

#include <cstdint>

namespace lipspray {

/// Chart x̃ = x' + ½Γ'(x', x'), x' = L(x − p), with g̃(0) the model metric
/// and Γ̃(0) = 0.
struct NormalizedChart {
    ChartMap map;
    Vec p;
    /// Columns b_i with g(b_i, b_j) = model; L = basis⁻¹.
    Mat basis;
    Mat linear;
    /// Γ(p) expressed in the linear coordinates x'.
    Christoffel gamma_linear;
    Signature signature = Signature::riemannian;
    double epsilon = 0.0;
};

/// Metric and connection input. The linear part is a Gram–Schmidt
/// congruence in chart-axis order (timelike axis first in Lorentzian
/// signature) with an eigen-decomposition fallback.
NormalizedChart normalize_chart_at(const FundamentalTensor& g, const ChristoffelField& gamma, const Vec& p);

/// Connection-only input; the linear part is the identity.
NormalizedChart normalize_chart_at(const ChristoffelField& gamma, const Vec& p);

/// g̃(x̃, ṽ) = J⁻ᵀ g(x, J⁻¹ṽ) J⁻¹ in the coordinates of m.
FundamentalTensor transform_tensor(const FundamentalTensor& g, const ChartMap& m);

enum class CertStatus { certified_sampled, failed };

std::string_view to_string(CertStatus s);

struct ConvexityCertificate {
    ChartBox box;
    LipschitzEstimate estimate;
    ConvexityConstants constants;
    double delta_ball = 0.0;
    double z_min_plus = 0.0;
    double z_min_minus = 0.0;
    int grid_density = 0;
    int directions = 0;
    CertStatus status = CertStatus::failed;
};

struct CertifyOptions {
    EstimateOptions estimate;
    int z_density = 8;
    int z_directions = 32;
    double safety = 0.9;
};

/// z±(x, e) = 1 + (x − p)·H(x, ±e).
double z_functional(const SprayField& s, const Vec& p, const Vec& x, const Vec& e, int sign);

/// estimate_constants → compute_constants → z± sampled on B̄(p, δ) × S^{n−1}.
ConvexityCertificate certify_ball(const SprayField& s, const Vec& p, double r, const CertifyOptions& options = {});

struct PointPair {
    Vec a;
    Vec b;
};

/// Log options for shooting between two points of a certified ball.
LogOptions shooting_options(const ConvexityCertificate& cert, double tol = 1e-10);

/// Connecting geodesics stay within the larger endpoint radius, and
/// ‖x − p‖² is strictly convex along them.
ProbeReport containment_probe(const ConvexityCertificate& cert, const SprayField& s, std::span<const PointPair> pairs);

/// Uniform pairs in B(p, radius).
std::vector<PointPair> random_pairs(const Vec& p, double radius, std::size_t count, std::uint64_t seed);

struct PositionProbeOptions {
    double epsilon = 0.1;
    int samples = 24;
    std::uint64_t seed = 0;
    int max_halvings = 6;
    double log_tol = 1e-10;
};

/// Position-vector inequalities on B(p, ρ), halving ρ from the certified
/// radius until all hold with the given ε. With a normalized chart the
/// spray is moved to it and the symmetric ‖P(q1,q2) + P(q2,q1)‖ ≤ ε‖q2−q1‖²
/// clause is added. values: worst ratio per clause and radius,
/// "passing_radius" (0 if none).
ProbeReport position_inequality_probe(const ConvexityCertificate& cert, const SprayField& s,
                                      const NormalizedChart* normalized, const PositionProbeOptions& options = {});

}  // namespace lipspray
