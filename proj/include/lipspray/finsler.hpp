#pragma once

#include "lipspray/spray.hpp"

namespace lipspray {

enum class Signature { riemannian, lorentzian };

std::string_view to_string(Signature s);

/// Pseudo-Finsler fundamental tensor g_(x,v), zero-homogeneous in v.
struct FundamentalTensor {
    using Evaluator = std::function<Mat(const Vec& x, const Vec& v)>;
    /// Returns ∂g/∂x^m for m = 0..n-1 at (x, v).
    using Derivative = std::function<std::array<Mat, kMaxDim>(const Vec& x, const Vec& v)>;

    int dim = 0;
    Evaluator g;
    Signature signature = Signature::riemannian;
    bool reversible = true;
    /// True for pseudo-Riemannian metrics (g does not depend on v).
    bool velocity_independent = false;
    Derivative dg_dx;  // optional
    std::optional<ChartBox> domain;
    std::string name;
};

/// g at (x, v). For v = 0 on a velocity-independent tensor the first chart
/// axis is used as the reference direction.
Mat eval_tensor(const FundamentalTensor& g, const Vec& x, const Vec& v);

/// ∂g/∂x^m, analytic when available, otherwise central differences with
/// step max(1e-5, 1e-5‖x‖).
std::array<Mat, kMaxDim> tensor_x_derivative(const FundamentalTensor& g, const Vec& x, const Vec& v);

/// L = ½ g_v(v, v); zero at v = 0.
double lagrangian(const FundamentalTensor& g, const Vec& x, const Vec& v);

/// Residuals of the vertical contraction identities, ∂L/∂v = g v,
/// ∂²L/∂v² = g, and zero-homogeneity of g, by central differences.
ProbeReport check_fundamental_identities(const FundamentalTensor& g,
                                         std::span<const std::pair<Vec, Vec>> samples,
                                         double tolerance = 1e-6, double h = 1e-5);

/// H^μ = -½ g^{μν}(2 ∂_β g_{να} - ∂_ν g_{αβ}) v^α v^β.
SprayField finsler_spray(const FundamentalTensor& g);

/// Levi-Civita symbols of a velocity-independent tensor.
ChristoffelField levi_civita(const FundamentalTensor& g);

struct TimeOrientation {
    std::function<Vec(const Vec& x)> T;
};

/// Constant field ∂_0.
TimeOrientation default_time_orientation(int n);

enum class CausalKind { timelike, lightlike, spacelike, zero };
enum class TimeDirection { future, past, none };

std::string_view to_string(CausalKind k);
std::string_view to_string(TimeDirection d);

struct CausalClass {
    CausalKind kind = CausalKind::zero;
    TimeDirection orientation = TimeDirection::none;
};

/// Sign of g_v(v, v) with a lightlike band of half-width tol_scale·‖v‖².
/// Vectors with ‖v‖ ≥ 1e8 inside the band raise ambiguous-classification.
CausalClass classify_vector(const FundamentalTensor& g, const TimeOrientation& T, const Vec& x, const Vec& v,
                            double tol_scale = 1e-9);

enum class LengthKind { finsler, lorentzian };

struct Curve {
    std::function<Vec(double)> position;
    std::function<Vec(double)> velocity;
    double a = 0.0;
    double b = 1.0;
};

/// ∫ √(±g_σ'(σ', σ')) by composite Simpson, doubling until two successive
/// values agree to `tol` relative.
double curve_length(const FundamentalTensor& g, const Curve& c, LengthKind kind, double tol = 1e-12);

/// −g_{v1}(v1, v2) ≥ √(−g_{v1}(v1,v1)) √(−g_{v2}(v2,v2)) for future causal
/// v1, v2. values: "lhs", "rhs", "proportional".
ProbeReport reverse_cauchy_schwarz_check(const FundamentalTensor& g, const Vec& x, const Vec& v1, const Vec& v2,
                                         double tolerance = 1e-12);

}  // namespace lipspray
