#include "lipspray/convexity.hpp"

#include "lipspray/parallel.hpp"
#include "lipspray/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lipspray {

std::string_view to_string(CertStatus s) { return s == CertStatus::certified_sampled ? "certified-sampled" : "failed"; }

namespace {

Mat congruence_basis(const Mat& G, Signature sig) {
    const int n = static_cast<int>(G.rows());
    Eigen::SelfAdjointEigenSolver<Mat> eig(G);
    const Vec lam = eig.eigenvalues();
    const double scale = lam.cwiseAbs().maxCoeff();
    int negatives = 0;
    for (int i = 0; i < n; ++i) {
        if (std::abs(lam[i]) <= 1e-12 * scale)
            throw Error(ErrorCode::degenerate_metric, "metric is degenerate at the base point");
        negatives += lam[i] < 0.0;
    }
    const int expected = sig == Signature::lorentzian ? 1 : 0;
    if (negatives != expected)
        throw Error(ErrorCode::degenerate_metric, "metric has " + std::to_string(negatives) +
                                                      " negative directions, expected " + std::to_string(expected));

    // Gram–Schmidt in the g inner product, chart axes in order
    Mat B = Mat::Zero(n, n);
    bool ok = true;
    for (int i = 0; i < n && ok; ++i) {
        Vec w = Vec::Zero(n);
        w[i] = 1.0;
        for (int j = 0; j < i; ++j) {
            const Vec bj = B.col(j);
            w -= (w.dot(G * bj) / bj.dot(G * bj)) * bj;
        }
        const double nrm = w.dot(G * w);
        const bool want_negative = sig == Signature::lorentzian && i == 0;
        if (std::abs(nrm) <= 1e-12 * scale || (nrm < 0.0) != want_negative) {
            ok = false;
            break;
        }
        B.col(i) = w / std::sqrt(std::abs(nrm));
    }
    if (ok) return B;

    // eigenvectors, negative eigenvalue first (the solver sorts ascending)
    for (int i = 0; i < n; ++i) B.col(i) = eig.eigenvectors().col(i) / std::sqrt(std::abs(lam[i]));
    return B;
}

NormalizedChart build_chart(const Vec& p, const Mat& B, const Christoffel& gamma_p, Signature sig) {
    const int n = static_cast<int>(p.size());
    NormalizedChart nc;
    nc.p = p;
    nc.basis = B;
    nc.linear = B.inverse();
    nc.signature = sig;
    const Mat L = nc.linear;

    Christoffel gl(n);
    for (int mu = 0; mu < n; ++mu)
        for (int a = 0; a < n; ++a)
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int nu = 0; nu < n; ++nu)
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d) s += L(mu, nu) * gamma_p(nu, c, d) * B(c, a) * B(d, b);
                gl(mu, a, b) = s;
            }
    nc.gamma_linear = gl;

    ChartMap m;
    m.dim = n;
    m.forward = [p, L, gl](const Vec& x) {
        const Vec xl = L * (x - p);
        return Vec(xl + 0.5 * gl.contract(xl, xl));
    };
    m.jacobian = [p, L, gl, n](const Vec& x) {
        const Vec xl = L * (x - p);
        Mat J = Mat::Identity(n, n);
        for (int mu = 0; mu < n; ++mu)
            for (int b = 0; b < n; ++b) {
                double s = 0.0;
                for (int c = 0; c < n; ++c) s += gl(mu, b, c) * xl[c];
                J(mu, b) += s;
            }
        return Mat(J * L);
    };
    m.hessian = [L, gl, n](const Vec&) {
        Christoffel h(n);
        for (int mu = 0; mu < n; ++mu)
            for (int a = 0; a < n; ++a)
                for (int b = 0; b < n; ++b) {
                    double s = 0.0;
                    for (int c = 0; c < n; ++c)
                        for (int d = 0; d < n; ++d) s += gl(mu, c, d) * L(c, a) * L(d, b);
                    h(mu, a, b) = s;
                }
        return h;
    };
    m.inverse = [p, B, gl, n](const Vec& xt) {
        // Newton on x' + ½Γ'(x', x') = x̃
        Vec xl = xt;
        for (int it = 0; it < 60; ++it) {
            const Vec r = xl + 0.5 * gl.contract(xl, xl) - xt;
            if (r.norm() <= 1e-16 * (1.0 + xt.norm())) break;
            Mat J = Mat::Identity(n, n);
            for (int mu = 0; mu < n; ++mu)
                for (int b = 0; b < n; ++b)
                    for (int c = 0; c < n; ++c) J(mu, b) += gl(mu, b, c) * xl[c];
            Eigen::PartialPivLU<Mat> lu(J);
            if (std::abs(lu.determinant()) < 1e-14)
                throw Error(ErrorCode::singular_jacobian, "normalized chart is not invertible here");
            const Vec step = lu.solve(r);
            xl -= step;
            if (step.norm() <= 1e-17 * (1.0 + xl.norm())) break;
        }
        return Vec(p + B * xl);
    };
    nc.map = m;
    return nc;
}

}  // namespace

NormalizedChart normalize_chart_at(const FundamentalTensor& g, const ChristoffelField& gamma, const Vec& p) {
    if (!g.velocity_independent)
        throw Error(ErrorCode::precondition, "chart normalization needs a velocity-independent metric");
    const Mat G = eval_tensor(g, p, Vec::Zero(g.dim));
    return build_chart(p, congruence_basis(G, g.signature), gamma.gamma(p), g.signature);
}

NormalizedChart normalize_chart_at(const ChristoffelField& gamma, const Vec& p) {
    return build_chart(p, Mat::Identity(gamma.dim, gamma.dim), gamma.gamma(p), Signature::riemannian);
}

FundamentalTensor transform_tensor(const FundamentalTensor& g, const ChartMap& m) {
    FundamentalTensor out = g;
    out.dg_dx = nullptr;
    out.domain.reset();
    out.name = g.name + "~chart";
    auto base = g.g;
    out.g = [base, m](const Vec& xt, const Vec& vt) {
        const Vec x = m.invert(xt);
        const Mat Jinv = m.jacobian(x).inverse();
        Vec v = Jinv * vt;
        if (v.squaredNorm() == 0.0) {
            v = Vec::Zero(xt.size());
            v[0] = 1.0;
        }
        return Mat(Jinv.transpose() * base(x, v) * Jinv);
    };
    return out;
}

double z_functional(const SprayField& s, const Vec& p, const Vec& x, const Vec& e, int sign) {
    return 1.0 + (x - p).dot(eval_spray(s, x, Vec(sign >= 0 ? e : Vec(-e))));
}

ConvexityCertificate certify_ball(const SprayField& s, const Vec& p, double r, const CertifyOptions& options) {
    ConvexityCertificate cert;
    cert.box = ChartBox{p, r};
    cert.estimate = estimate_constants(s, cert.box, options.estimate);
    cert.constants = compute_constants(cert.estimate.alpha, cert.estimate.beta, cert.estimate.M, r, options.safety, p);
    cert.delta_ball = cert.constants.delta;
    cert.grid_density = options.z_density;
    cert.directions = options.z_directions;

    std::vector<Vec> xs = ball_grid(ChartBox{p, cert.delta_ball}, options.z_density);
    xs.push_back(p);
    const auto dirs = unit_directions(static_cast<int>(p.size()), options.z_directions);
    std::vector<double> zp(xs.size()), zm(xs.size());
    parallel_for(xs.size(), [&](std::size_t i) {
        double lo_p = std::numeric_limits<double>::infinity(), lo_m = lo_p;
        for (const Vec& e : dirs) {
            lo_p = std::min(lo_p, z_functional(s, p, xs[i], e, +1));
            lo_m = std::min(lo_m, z_functional(s, p, xs[i], e, -1));
        }
        zp[i] = lo_p;
        zm[i] = lo_m;
    });
    cert.z_min_plus = *std::min_element(zp.begin(), zp.end());
    cert.z_min_minus = *std::min_element(zm.begin(), zm.end());
    const bool ok = cert.z_min_plus > 0.0 && cert.z_min_minus > 0.0 && 1.0 - cert.delta_ball * cert.constants.M > 0.0;
    cert.status = ok ? CertStatus::certified_sampled : CertStatus::failed;
    return cert;
}

LogOptions shooting_options(const ConvexityCertificate& cert, double tol) {
    LogOptions opt;
    opt.tol = tol;
    opt.radius_limit = 2.0 * cert.delta_ball * (1.0 + 1e-12);
    opt.exp.picard.tol = std::min(1e-12, tol / 100.0);
    return opt;
}

std::vector<PointPair> random_pairs(const Vec& p, double radius, std::size_t count, std::uint64_t seed) {
    std::vector<PointPair> pairs;
    for (std::size_t i = 0; i < count; ++i) {
        Rng rng = sample_rng(seed, i);
        Vec a = random_in_ball(rng, p, radius);
        Vec b = random_in_ball(rng, p, radius);
        pairs.push_back({a, b});
    }
    return pairs;
}

ProbeReport containment_probe(const ConvexityCertificate& cert, const SprayField& s, std::span<const PointPair> pairs) {
    ProbeReport rep;
    rep.name = "containment";
    rep.threshold = 1e-8;
    const Vec& p = cert.box.center;
    const LogOptions opt = shooting_options(cert);

    struct Outcome {
        double excess = 0.0;
        double min_convexity = std::numeric_limits<double>::infinity();
        double min_second_difference = std::numeric_limits<double>::infinity();
        std::string error;
    };
    std::vector<Outcome> out(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        try {
            const LogResult lr = log_p(s, cert.constants, pairs[i].a, pairs[i].b, opt);
            const GeodesicSolution& sol = lr.exp.solution;
            const double ends = std::max((pairs[i].a - p).norm(), (pairs[i].b - p).norm());
            double reach = 0.0;
            std::vector<double> rho2;
            for (std::size_t k = 0; k < sol.x.size(); ++k) {
                const Vec d = sol.x[k] - p;
                reach = std::max(reach, d.norm());
                rho2.push_back(d.squaredNorm());
                const double conv = 2.0 * (sol.v[k].squaredNorm() + d.dot(eval_spray(s, sol.x[k], sol.v[k])));
                out[i].min_convexity = std::min(out[i].min_convexity, conv);
            }
            // divided second differences; the node spacing changes between stitched pieces
            for (std::size_t k = 1; k + 1 < rho2.size(); ++k) {
                const double h1 = sol.t[k] - sol.t[k - 1], h2 = sol.t[k + 1] - sol.t[k];
                const double dd = 2.0 * ((rho2[k + 1] - rho2[k]) / h2 - (rho2[k] - rho2[k - 1]) / h1) / (h1 + h2);
                out[i].min_second_difference = std::min(out[i].min_second_difference, dd);
            }
            out[i].excess = reach - ends;
        } catch (const Error& e) {
            out[i].error = e.what();
        }
    });
    double min_conv = std::numeric_limits<double>::infinity(), min_diff = min_conv;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!out[i].error.empty()) {
            rep.record(std::numeric_limits<double>::infinity());
            rep.notes.push_back("pair " + std::to_string(i) + ": " + out[i].error);
            continue;
        }
        rep.record(out[i].excess);
        min_conv = std::min(min_conv, out[i].min_convexity);
        min_diff = std::min(min_diff, out[i].min_second_difference);
        if (!(out[i].min_convexity > 0.0) || !(out[i].min_second_difference > -1e-8)) {
            ++rep.failures;
            rep.notes.push_back("pair " + std::to_string(i) + ": radius function not strictly convex");
        }
    }
    rep.values["min_radius_second_derivative"] = min_conv;
    rep.values["min_radius_second_difference"] = min_diff;
    rep.finalize();
    return rep;
}

ProbeReport position_inequality_probe(const ConvexityCertificate& cert, const SprayField& s,
                                      const NormalizedChart* normalized, const PositionProbeOptions& options) {
    ProbeReport rep;
    rep.name = "position-inequalities";
    rep.threshold = 1.0;

    SprayField spray = s;
    ConvexityConstants c = cert.constants;
    Vec p = cert.box.center;
    double rho = cert.delta_ball;
    if (normalized) {
        spray = transform_spray(s, normalized->map);
        spray.kind = s.kind;
        const double stretch = normalized->basis.operatorNorm();
        const ConvexityCertificate moved =
            certify_ball(spray, Vec::Zero(p.size()), 0.9 * cert.box.radius / stretch, CertifyOptions{});
        c = moved.constants;
        p = moved.box.center;
        rho = moved.delta_ball;
        rep.values["normalized_delta"] = rho;
    }
    rho *= 0.98;
    const int n = static_cast<int>(p.size());
    const double eps = options.epsilon;

    LogOptions opt;
    opt.tol = options.log_tol;
    opt.exp.picard.tol = std::min(1e-12, options.log_tol / 100.0);

    double passing = 0.0;
    std::array<double, 5> final_worst{};
    for (int h = 0; h <= options.max_halvings; ++h) {
        opt.radius_limit = 2.0 * rho * (1.0 + 1e-9);
        std::vector<std::array<double, 5>> ratios(options.samples);
        std::vector<std::string> errors(options.samples);
        parallel_for(static_cast<std::size_t>(options.samples), [&](std::size_t i) {
            Rng rng = sample_rng(options.seed, i);
            const Vec origin = Vec::Zero(n);
            const Vec q = p + rho * random_in_ball(rng, origin, 1.0);
            const Vec q1 = p + rho * random_in_ball(rng, origin, 1.0);
            const Vec q2 = p + rho * random_in_ball(rng, origin, 1.0);
            const Vec q1b = p + rho * random_in_ball(rng, origin, 1.0);
            const Vec q2b = p + rho * random_in_ball(rng, origin, 1.0);
            try {
                const Vec P12 = position_vector(spray, c, q1, q2, opt);
                const Vec P21 = position_vector(spray, c, q2, q1, opt);
                const Vec Pq1 = position_vector(spray, c, q, q1, opt);
                const Vec Pq2 = position_vector(spray, c, q, q2, opt);
                const Vec P12b = position_vector(spray, c, q1b, q2b, opt);
                const double d12 = (q2 - q1).norm();
                const double shift = std::max((q1b - q1).norm(), (q2b - q2).norm());
                auto& r = ratios[i];
                r[0] = ((P12b - (q2b - q1b)) - (P12 - (q2 - q1))).norm() / (eps * shift);
                r[1] = (Pq2 - Pq1 - (q2 - q1)).norm() / (eps * d12);
                r[2] = (P12 - (q2 - q1)).norm() / (eps * d12);
                r[3] = P12.norm() / eps;
                r[4] = normalized ? (P12 + P21).norm() / (eps * d12 * d12) : 0.0;
            } catch (const Error& e) {
                errors[i] = e.what();
                ratios[i].fill(std::numeric_limits<double>::infinity());
            }
        });
        std::array<double, 5> worst{};
        for (int i = 0; i < options.samples; ++i) {
            for (int k = 0; k < 5; ++k) worst[k] = std::max(worst[k], ratios[i][k]);
            if (!errors[i].empty()) rep.notes.push_back("radius " + std::to_string(rho) + ": " + errors[i]);
        }
        static constexpr const char* kNames[5] = {"four_point", "common_base", "affine_deviation", "smallness",
                                                  "symmetry"};
        for (int k = 0; k < 5; ++k) rep.values[std::string(kNames[k]) + "@" + std::to_string(rho)] = worst[k];
        rep.radii.push_back(rho);
        final_worst = worst;
        if (*std::max_element(worst.begin(), worst.end()) <= 1.0) {
            passing = rho;
            break;
        }
        rho *= 0.5;
    }
    rep.values["passing_radius"] = passing;
    rep.record(*std::max_element(final_worst.begin(), final_worst.end()));
    rep.finalize();
    return rep;
}

}  // namespace lipspray
