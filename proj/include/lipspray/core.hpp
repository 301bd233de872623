#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <array>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace lipspray {

/// Largest chart dimension supported. Vectors and matrices are dynamically
/// sized up to this bound but live on the stack.
inline constexpr int kMaxDim = 4;

using Vec = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;
using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

enum class ErrorCode {
    domain_violation,
    unbounded_estimate,
    singular_jacobian,
    singular_tensor,
    escape_from_ball,
    escape_from_domain,
    no_convergence,
    noncausal_tangent,
    ambiguous_classification,
    degenerate_metric,
    precondition,
    unknown_name,
    invalid_params,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what);
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

/// Closed coordinate ball B̄(center, radius) in the Euclidean chart norm.
struct ChartBox {
    Vec center;
    double radius = 1.0;

    int dim() const { return static_cast<int>(center.size()); }
    bool contains(const Vec& x, double slack = 1e-12) const;
};

/// Pass/fail record of an inequality check.
struct ProbeReport {
    std::string name;
    bool passed = false;
    double worst_residual = 0.0;
    double threshold = 0.0;
    std::size_t samples = 0;
    std::size_t failures = 0;
    std::vector<double> residuals;
    std::vector<double> radii;
    std::map<std::string, double> values;
    std::vector<std::string> notes;

    /// Adds one residual, failing when it exceeds the threshold.
    void record(double residual);
    void record(double residual, double limit);
    /// Recomputes `passed` from the failure count and notes nothing else.
    void finalize() { passed = failures == 0 && samples > 0; }
};

Vec make_vec(std::initializer_list<double> values);
Vec zeros(int n);
Mat identity(int n);

/// Euclidean norm helpers used throughout for chart norms.
inline double norm(const Vec& v) { return v.norm(); }
inline double max_norm(const Vec& a, const Vec& b) { return std::max(a.norm(), b.norm()); }

}  // namespace lipspray
