#pragma once

#include "lipspray/core.hpp"

#include <functional>
#include <optional>
#include <span>

namespace lipspray {

enum class SprayKind { generic_spray, connection, finsler_derived };

std::string_view to_string(SprayKind kind);

/// Second-order ODE field ẍ = H(x, ẋ) on one chart. H must be positively
/// homogeneous of degree two in the velocity.
struct SprayField {
    using Evaluator = std::function<Vec(const Vec& x, const Vec& v)>;

    int dim = 0;
    Evaluator H;
    bool reversible = false;
    SprayKind kind = SprayKind::generic_spray;
    /// Evaluation domain; unset means unrestricted.
    std::optional<ChartBox> domain;
    std::string name;
};

/// Christoffel symbols Γ^μ_{αβ} at one point, symmetric in (α, β).
class Christoffel {
public:
    Christoffel() = default;
    explicit Christoffel(int n) : n_(n) { data_.fill(0.0); }

    int dim() const { return n_; }
    double& operator()(int mu, int a, int b) { return data_[idx(mu, a, b)]; }
    double operator()(int mu, int a, int b) const { return data_[idx(mu, a, b)]; }

    /// Γ^μ_{αβ} u^α w^β.
    Vec contract(const Vec& u, const Vec& w) const;
    double max_asymmetry() const;
    double max_abs() const;

private:
    static int idx(int mu, int a, int b) { return (mu * kMaxDim + a) * kMaxDim + b; }
    int n_ = 0;
    std::array<double, kMaxDim * kMaxDim * kMaxDim> data_{};
};

struct ChristoffelField {
    int dim = 0;
    std::function<Christoffel(const Vec& x)> gamma;
    std::optional<ChartBox> domain;
    std::string name;
};

/// Coordinate change x ↦ x̃. Evaluators are in the old coordinates except
/// `inverse`, which maps x̃ back to x.
struct ChartMap {
    int dim = 0;
    std::function<Vec(const Vec& x)> forward;
    std::function<Mat(const Vec& x)> jacobian;
    /// ∂²x̃^μ/∂x^α∂x^β, stored like Christoffel symbols.
    std::function<Christoffel(const Vec& x)> hessian;
    /// Optional; when absent a Newton iteration on `forward` is used.
    std::function<Vec(const Vec& xt)> inverse;

    Vec invert(const Vec& xt, const Vec& guess) const;
    Vec invert(const Vec& xt) const;
};

ChartMap identity_chart(int n);
/// x̃ = A (x - shift).
ChartMap linear_chart(const Mat& A, const Vec& shift);

struct LipschitzEstimate {
    double alpha = 0.0;
    double beta = 0.0;
    double M = 0.0;
    int grid_density = 0;
    bool certified = false;
    /// Raw estimates at the density and its two refinements (d, 2d, 4d).
    std::array<double, 3> alpha_levels{};
    std::array<double, 3> beta_levels{};
};

struct EstimateOptions {
    int grid_density = 16;
    /// Number of unit directions for α and M (per level, fixed).
    int directions = 32;
    /// Position grid density cap used while estimating β.
    int beta_position_density = 8;
    /// Ratio over two refinements that flags a Hölder-type spray.
    double holder_ratio = 2.0;
    bool detect_holder = true;
};

Vec eval_spray(const SprayField& s, const Vec& x, const Vec& v);

SprayField connection_to_spray(const ChristoffelField& c);

/// H̃(x, v) = H(x, -v).
SprayField reverse_spray(const SprayField& s);

/// Worst relative residual ‖H(x,sv) − s²H(x,v)‖ / (s²‖H(x,v)‖ + floor) over
/// samples (pairs of x and v) and positive scales.
ProbeReport check_homogeneity(const SprayField& s, std::span<const std::pair<Vec, Vec>> samples,
                              std::span<const double> scales, double tolerance = 1e-8,
                              double floor = 1e-12);

LipschitzEstimate estimate_constants(const SprayField& s, const ChartBox& box,
                                     const EstimateOptions& options = {});
LipschitzEstimate estimate_constants(const SprayField& s, const ChartBox& box, int grid_density);

SprayField transform_spray(const SprayField& s, const ChartMap& m);

/// Unit directions used for sampling (n = 1, 2 evenly spaced; n ≥ 3
/// Fibonacci-type spiral; deterministic).
std::vector<Vec> unit_directions(int n, int count);

/// Points of a d-per-axis grid on the cube around `box`, kept inside the ball.
std::vector<Vec> ball_grid(const ChartBox& box, int density);

}  // namespace lipspray
