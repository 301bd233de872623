#include "lipspray/core.hpp"

#include <algorithm>
#include <cmath>

namespace lipspray {

std::string_view to_string(ErrorCode code) {
    switch (code) {
    case ErrorCode::domain_violation: return "domain-violation";
    case ErrorCode::unbounded_estimate: return "unbounded-estimate";
    case ErrorCode::singular_jacobian: return "singular-jacobian";
    case ErrorCode::singular_tensor: return "singular-tensor";
    case ErrorCode::escape_from_ball: return "escape-from-ball";
    case ErrorCode::escape_from_domain: return "escape-from-domain";
    case ErrorCode::no_convergence: return "no-convergence";
    case ErrorCode::noncausal_tangent: return "noncausal-tangent";
    case ErrorCode::ambiguous_classification: return "ambiguous-classification";
    case ErrorCode::degenerate_metric: return "degenerate-metric";
    case ErrorCode::precondition: return "precondition";
    case ErrorCode::unknown_name: return "unknown-name";
    case ErrorCode::invalid_params: return "invalid-params";
    }
    return "unknown";
}

Error::Error(ErrorCode code, const std::string& what)
    : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

bool ChartBox::contains(const Vec& x, double slack) const {
    return (x - center).norm() <= radius * (1.0 + slack) + slack;
}

void ProbeReport::record(double residual) { record(residual, threshold); }

void ProbeReport::record(double residual, double limit) {
    ++samples;
    residuals.push_back(residual);
    worst_residual = std::max(worst_residual, residual);
    if (!(residual <= limit)) ++failures;
}

Vec make_vec(std::initializer_list<double> values) {
    Vec v(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (double x : values) v[i++] = x;
    return v;
}

Vec zeros(int n) { return Vec::Zero(n); }

Mat identity(int n) { return Mat::Identity(n, n); }

}  // namespace lipspray
