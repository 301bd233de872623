#include "lipspray/expmap.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace lipspray {

namespace {

void append_piece(GeodesicSolution& out, const GeodesicSolution& piece, int index, int pieces) {
    const double m = pieces;
    const std::size_t start = out.t.empty() ? 0 : 1;
    for (std::size_t i = start; i < piece.t.size(); ++i) {
        out.t.push_back((index + piece.t[i]) / m);
        out.x.push_back(piece.x[i]);
        out.v.push_back(m * piece.v[i]);
        out.a.push_back(m * m * piece.a[i]);
    }
    out.tail_bound += piece.tail_bound;
    out.position_tail += piece.position_tail;
    out.quadrature_error_estimate += piece.quadrature_error_estimate;
    out.picard_iterations = std::max(out.picard_iterations, piece.picard_iterations);
    out.grid_intervals += piece.grid_intervals;
    if (index == 0) {
        out.method = piece.method;
        out.D = piece.D;
        out.velocity_differences = piece.velocity_differences;
        out.position_differences = piece.position_differences;
        out.velocity_sup = piece.velocity_sup;
    }
}

}  // namespace

ExpResult exp_p(const SprayField& s, const ConvexityConstants& c, const Vec& p, const Vec& v,
                const ExpOptions& options) {
    ExpResult res;
    res.p = p;
    res.v = v;
    if (options.integrator == Integrator::reference) {
        res.solution = reference_geodesic(s, p, v, 1.0, options.reference_steps);
        res.q = res.solution.end_position();
        res.P = res.solution.end_velocity();
        return res;
    }
    const double speed = v.norm();
    const int m = speed < 0.95 * c.delta ? 1 : static_cast<int>(std::ceil(speed / (0.9 * c.delta)));
    Vec x = p;
    Vec w = v / m;
    for (int i = 0; i < m; ++i) {
        const GeodesicSolution piece = picard_geodesic(s, x, w, c, options.picard);
        x = piece.end_position();
        w = piece.end_velocity();
        append_piece(res.solution, piece, i, m);
    }
    res.pieces = m;
    res.q = x;
    res.P = m * w;
    return res;
}

ExpResult reverse_exp_p(const SprayField& s, const ConvexityConstants& c, const Vec& p, const Vec& v,
                        const ExpOptions& options) {
    ExpResult res = exp_p(reverse_spray(s), c, p, Vec(-v), options);
    res.v = v;
    res.P = -res.P;
    return res;
}

LogResult log_p(const SprayField& s, const ConvexityConstants& c, const Vec& p, const Vec& q,
                const LogOptions& options) {
    const double limit = options.radius_limit > 0.0 ? options.radius_limit : delta_geo(c);
    const double dist = (q - p).norm();
    if (!(dist < limit)) {
        throw Error(ErrorCode::precondition, "target at chart distance " + std::to_string(dist) +
                                                 " is outside the log ball of radius " + std::to_string(limit));
    }
    LogResult res;
    Vec v = q - p;
    double lambda = 1.0;
    double previous = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 1; it <= options.max_iter; ++it) {
        res.exp = exp_p(s, c, p, v, options.exp);
        const Vec defect = q - res.exp.q;
        res.defect = defect.norm();
        res.iterations = it;
        res.v = v;
        if (res.defect <= options.tol) return res;
        stalled = res.defect >= previous ? stalled + 1 : 0;
        if (stalled >= 3 && !res.damped) {
            res.damped = true;
            lambda = 0.5;
        }
        previous = res.defect;
        v += lambda * defect;
    }
    throw Error(ErrorCode::no_convergence, "log map fixed point stalled at defect " + std::to_string(res.defect) +
                                               " after " + std::to_string(options.max_iter) + " iterations");
}

Vec position_vector(const SprayField& s, const ConvexityConstants& c, const Vec& p, const Vec& q,
                    const LogOptions& options) {
    return log_p(s, c, p, q, options).exp.P;
}

ProbeReport strong_differential_probe(const SprayField& s, const ConvexityConstants& c, const Vec& p,
                                      std::span<const double> radii, int samples, const ExpOptions& options) {
    const int n = static_cast<int>(p.size());
    ProbeReport rep;
    rep.name = "strong-differential";

    // fixed pattern in the unit max-ball, reused at every radius
    std::mt19937_64 rng(0x5eed);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    auto ball_point = [&] {
        for (;;) {
            Vec u(n);
            for (int i = 0; i < n; ++i) u[i] = unif(rng);
            if (u.norm() <= 1.0) return u;
        }
    };
    std::vector<std::pair<Vec, Vec>> pattern;
    for (int i = 0; i < samples; ++i) {
        Vec a = ball_point();
        Vec b = ball_point();
        pattern.emplace_back(a, b);
    }

    double previous = std::numeric_limits<double>::infinity();
    for (double rho : radii) {
        if (!(rho > 0.0 && rho < c.delta))
            throw Error(ErrorCode::precondition, "probe radius " + std::to_string(rho) + " is not inside (0, delta)");
        std::vector<Vec> xs, vs, qs;
        for (const auto& [a, b] : pattern) {
            xs.push_back(p + rho * a);
            vs.push_back(rho * b);
            qs.push_back(exp_p(s, c, xs.back(), vs.back(), options).q);
        }
        double slope = 0.0;
        for (int i = 0; i < samples; ++i)
            for (int j = i + 1; j < samples; ++j) {
                const Vec dx = xs[i] - xs[j];
                const Vec dv = vs[i] - vs[j];
                const double den = std::max(dx.norm(), dv.norm());
                const double num = (qs[i] - qs[j] - dx - dv).norm();
                slope = std::max(slope, num / den);
            }
        const double D = constants_for_delta(c.alpha, c.beta, c.M, rho).D;
        const double envelope = expm1_over(D) - 1.0;
        rep.radii.push_back(rho);
        rep.values["slope@" + std::to_string(rho)] = slope;
        rep.values["envelope@" + std::to_string(rho)] = envelope;
        rep.record(slope, envelope + 1e-12);
        if (slope > previous + 1e-9) {
            ++rep.failures;
            rep.notes.push_back("slope increased when the radius shrank to " + std::to_string(rho));
        }
        previous = slope;
    }
    rep.threshold = 0.0;
    rep.finalize();
    return rep;
}

}  // namespace lipspray
