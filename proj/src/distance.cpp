#include "lipspray/distance.hpp"

#include "lipspray/parallel.hpp"
#include "lipspray/sampling.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lipspray {

std::string_view to_string(PerturbationMode m) {
    return m == PerturbationMode::piecewise_geodesic ? "piecewise-geodesic" : "smooth-bump";
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// g_{(x,w)}(w, w).
double norm2(const FundamentalTensor& g, const Vec& x, const Vec& w) {
    if (w.squaredNorm() == 0.0) return 0.0;
    return w.dot(eval_tensor(g, x, w) * w);
}

LogResult solve_log(const DistanceField& f, const Vec& a, const Vec& b) {
    return log_p(f.spray, f.constants, a, b, f.log);
}

/// Radius used for sampling around the base point when none is given.
double default_radius(const DistanceField& f) {
    const double limit = f.log.radius_limit > 0.0 ? f.log.radius_limit : delta_geo(f.constants);
    return 0.5 * limit;
}

Vec in_ball(Rng& rng, const Vec& center, double radius) { return random_in_ball(rng, center, radius); }

}  // namespace

LogOptions distance_log_options(const ConvexityConstants& c) {
    LogOptions opt;
    opt.tol = 1e-12;
    opt.max_iter = 300;
    opt.radius_limit = 2.0 * c.delta * (1.0 + 1e-12);
    opt.exp.picard.tol = 1e-13;
    return opt;
}

DistanceField make_distance_field(const SprayField& s, const FundamentalTensor& g, const ConvexityConstants& c,
                                  const Vec& p) {
    DistanceField f;
    f.spray = s;
    f.tensor = g;
    f.constants = c;
    f.p = p;
    f.log = distance_log_options(c);
    return f;
}

DistanceField rebase(const DistanceField& f, const Vec& p) {
    DistanceField out = f;
    out.p = p;
    return out;
}

DistanceSample distance_sample(const DistanceField& f, const Vec& q) {
    DistanceSample s;
    const int n = static_cast<int>(q.size());
    if ((q - f.p).norm() == 0.0) {
        s.gradient = Vec::Zero(n);
        s.v = Vec::Zero(n);
        s.P = Vec::Zero(n);
        return s;
    }
    const LogResult lr = solve_log(f, f.p, q);
    s.v = lr.v;
    s.P = lr.exp.P;
    s.value = norm2(f.tensor, f.p, s.v);
    s.gradient = 2.0 * (eval_tensor(f.tensor, q, s.P) * s.P);
    return s;
}

double squared_distance(const DistanceField& f, const Vec& q) { return distance_sample(f, q).value; }

Vec gauss_gradient(const DistanceField& f, const Vec& q) { return distance_sample(f, q).gradient; }

ProbeReport gauss_check(const DistanceField& f, const GaussCheckOptions& options) {
    ProbeReport rep;
    rep.name = "gauss";
    rep.threshold = options.tolerance;
    const int n = static_cast<int>(f.p.size());
    const double R = options.radius > 0.0 ? options.radius : default_radius(f);
    const double h = options.h > 0.0 ? options.h : 1e-4 * R;

    struct Outcome {
        double fd = 0.0, radial = 0.0;
        std::string error;
    };
    std::vector<Outcome> out(options.samples);
    parallel_for(out.size(), [&](std::size_t i) {
        Rng rng = sample_rng(options.seed, i);
        Vec q;
        do q = in_ball(rng, f.p, R); while ((q - f.p).norm() < 0.1 * R);
        const Vec w = random_unit(rng, n);
        try {
            const DistanceSample s = distance_sample(f, q);
            const double plus = squared_distance(f, Vec(q + h * w));
            const double minus = squared_distance(f, Vec(q - h * w));
            out[i].fd = std::abs((plus - minus) / (2.0 * h) - s.gradient.dot(w));
            out[i].radial = std::abs(s.gradient.dot(s.P) - 2.0 * s.value);
        } catch (const Error& e) {
            out[i].error = e.what();
        }
    });
    double worst_radial = 0.0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        if (!out[i].error.empty()) {
            rep.record(kInf);
            rep.notes.push_back("sample " + std::to_string(i) + ": " + out[i].error);
            continue;
        }
        rep.record(out[i].fd);
        worst_radial = std::max(worst_radial, out[i].radial);
        if (!(out[i].radial <= 1e-6)) {
            ++rep.failures;
            rep.notes.push_back("sample " + std::to_string(i) + ": radial identity off by " +
                                std::to_string(out[i].radial));
        }
    }
    rep.values["h"] = h;
    rep.values["C"] = rep.worst_residual / h;
    rep.values["radial_residual"] = worst_radial;
    rep.finalize();
    return rep;
}

std::vector<Vec> level_points(const DistanceField& f, double level, int count, std::uint64_t seed) {
    const int n = static_cast<int>(f.p.size());
    const double reach = 0.9 * default_radius(f);
    std::vector<Vec> pts;
    ExpOptions eo = f.log.exp;
    for (std::uint64_t i = 0; static_cast<int>(pts.size()) < count; ++i) {
        if (i > 1000u * static_cast<std::uint64_t>(count) + 1000u)
            throw Error(ErrorCode::precondition, "level " + std::to_string(level) + " is not reachable from the base point");
        Rng rng = sample_rng(seed, i);
        const Vec u = random_unit(rng, n);
        const double G = norm2(f.tensor, f.p, u);
        if (level == 0.0 || G * level <= 0.0 || std::abs(G) < 1e-3) continue;
        const double lambda = std::sqrt(level / G);
        if (lambda > reach) continue;
        pts.push_back(exp_p(f.spray, f.constants, f.p, Vec(lambda * u), eo).q);
    }
    return pts;
}

ProbeReport radial_flow_probe(const DistanceField& f, const RadialFlowOptions& options) {
    ProbeReport rep;
    rep.name = "radial-flow";
    rep.threshold = options.tolerance;
    const auto start = level_points(f, options.level, options.samples, options.seed);
    const double target = options.level * std::exp(-2.0 * options.time);
    std::vector<double> err(start.size(), kInf);
    std::vector<std::string> errors(start.size());
    parallel_for(start.size(), [&](std::size_t i) {
        try {
            auto field = [&](const Vec& x) { return Vec(-distance_sample(f, x).P); };
            Vec x = start[i];
            const int steps = std::max(options.steps, 1);
            const double dt = options.time / steps;
            if (options.time > 0.0) {
                for (int k = 0; k < steps; ++k) {
                    const Vec k1 = field(x);
                    const Vec k2 = field(Vec(x + 0.5 * dt * k1));
                    const Vec k3 = field(Vec(x + 0.5 * dt * k2));
                    const Vec k4 = field(Vec(x + dt * k3));
                    x += dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
                }
            }
            err[i] = std::abs(squared_distance(f, x) - target);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (std::size_t i = 0; i < start.size(); ++i) {
        rep.record(err[i]);
        if (!errors[i].empty()) rep.notes.push_back("sample " + std::to_string(i) + ": " + errors[i]);
    }
    rep.values["level"] = options.level;
    rep.values["time"] = options.time;
    rep.values["target"] = target;
    rep.finalize();
    return rep;
}

NormalizedProblem normalized_problem(const ConvexityCertificate& cert, const SprayField& s, const FundamentalTensor& g,
                                     const NormalizedChart& chart, const CertifyOptions& options) {
    NormalizedProblem np;
    np.spray = transform_spray(s, chart.map);
    np.tensor = transform_tensor(g, chart.map);
    const double stretch = chart.basis.operatorNorm();
    const Vec origin = Vec::Zero(cert.box.center.size());
    np.cert = certify_ball(np.spray, origin, 0.9 * cert.box.radius / stretch, options);
    np.field = make_distance_field(np.spray, np.tensor, np.cert.constants, origin);
    return np;
}

namespace {

/// Deficit of the midpoint inequality normalized so that 1 is the ε limit.
double midpoint_ratio(double mid, double a, double b, double dist2, double eps) {
    const double deficit = mid - (0.5 * (a + b) - 0.25 * dist2);
    return deficit / (eps * dist2 / 8.0);
}

struct ClauseSweep {
    std::vector<std::string> names;
    /// ratios[sample][clause]
    std::function<std::vector<double>(const DistanceField& f, const Vec& origin, double rho, std::size_t i)> sample;
    std::function<bool(const DistanceField& f, double rho, ProbeReport& rep)> extra;
};

/// Halves the radius from rho until every clause ratio is at most one.
void halving_sweep(ProbeReport& rep, const DistanceField& f, double rho, int max_halvings, int samples,
                   const ClauseSweep& sweep) {
    const Vec origin = Vec::Zero(f.p.size());
    double passing = 0.0;
    double final_worst = kInf;
    for (int h = 0; h <= max_halvings; ++h) {
        std::vector<std::vector<double>> ratios(samples);
        std::vector<std::string> errors(samples);
        parallel_for(static_cast<std::size_t>(samples), [&](std::size_t i) {
            try {
                ratios[i] = sweep.sample(f, origin, rho, i);
            } catch (const Error& e) {
                errors[i] = e.what();
                ratios[i].assign(sweep.names.size(), kInf);
            }
        });
        std::vector<double> worst(sweep.names.size(), -kInf);
        // worst over the samples whose geodesics could be computed
        std::vector<double> completed(sweep.names.size(), -kInf);
        int errored = 0;
        for (int i = 0; i < samples; ++i) {
            for (std::size_t k = 0; k < worst.size(); ++k) {
                worst[k] = std::max(worst[k], ratios[i][k]);
                if (errors[i].empty()) completed[k] = std::max(completed[k], ratios[i][k]);
            }
            if (!errors[i].empty()) {
                ++errored;
                rep.notes.push_back("radius " + std::to_string(rho) + ": " + errors[i]);
            }
        }
        const std::string at = "@" + std::to_string(rho);
        for (std::size_t k = 0; k < worst.size(); ++k) {
            rep.values[sweep.names[k] + at] = worst[k];
            rep.values[sweep.names[k] + "_completed" + at] = completed[k];
        }
        rep.values["errored" + at] = errored;
        rep.radii.push_back(rho);
        const bool extra_ok = !sweep.extra || sweep.extra(f, rho, rep);
        final_worst = *std::max_element(worst.begin(), worst.end());
        if (final_worst <= 1.0 && extra_ok) {
            passing = rho;
            break;
        }
        if (!extra_ok) final_worst = kInf;
        rho *= 0.5;
    }
    rep.values["passing_radius"] = passing;
    rep.record(final_worst, 1.0);
    rep.finalize();
}

DistanceField probe_field(const NormalizedProblem& np, double rho, const ExpOptions& exp) {
    DistanceField f = np.field;
    f.log.radius_limit = std::max(f.log.radius_limit, 2.0 * rho * (1.0 + 1e-9));
    f.log.exp = exp;
    f.log.exp.picard.tol = std::min(exp.picard.tol, 1e-13);
    return f;
}

}  // namespace

ProbeReport strong_convexity_probe_riemannian(const ConvexityCertificate& cert, const SprayField& s,
                                              const FundamentalTensor& g, const NormalizedChart& chart,
                                              const ConvexityProbeOptions& options) {
    if (g.signature != Signature::riemannian)
        throw Error(ErrorCode::precondition, "strong convexity probe needs a Riemannian metric");
    ProbeReport rep;
    rep.name = "strong-convexity";
    rep.threshold = 1.0;
    const NormalizedProblem np = normalized_problem(cert, s, g, chart);
    const double rho0 = options.radius > 0.0 ? options.radius : 0.98 * np.cert.delta_ball;
    const DistanceField f = probe_field(np, rho0, options.exp);
    const double eps = options.epsilon;
    rep.values["epsilon"] = eps;

    ClauseSweep sweep;
    sweep.names = {"affine", "arc_length", "midpoint"};
    sweep.sample = [&](const DistanceField& fld, const Vec& origin, double rho, std::size_t i) {
        Rng rng = sample_rng(options.seed, i);
        const Vec q = in_ball(rng, origin, rho);
        const Vec q1 = in_ball(rng, origin, rho);
        const Vec q2 = in_ball(rng, origin, rho);
        const DistanceField fq = rebase(fld, q);
        const DistanceSample a = distance_sample(fq, q1);
        const DistanceSample b = distance_sample(fq, q2);
        const LogResult lr = solve_log(fld, q1, q2);
        const double d2 = norm2(fld.tensor, q1, lr.v);
        const double d = std::sqrt(d2);
        const Vec dq = q2 - q1;
        const double e2 = dq.squaredNorm();
        const double affine = std::abs((b.gradient - a.gradient).dot(dq) - 2.0 * e2) / (eps * e2);
        const double arc =
            std::abs(b.gradient.dot(lr.exp.P) / d - a.gradient.dot(lr.v) / d - 2.0 * d) / (eps * d);
        const double mid = squared_distance(fq, lr.exp.solution.position_at(0.5));
        return std::vector<double>{affine, arc, midpoint_ratio(mid, a.value, b.value, d2, eps)};
    };
    halving_sweep(rep, f, rho0, options.max_halvings, options.samples, sweep);
    return rep;
}

ProbeReport midpoint_probe(const DistanceField& f, const Vec& center, double radius, double lambda, int samples,
                           std::uint64_t seed) {
    ProbeReport rep;
    rep.name = "midpoint";
    rep.threshold = 1.0;
    const double eps = 2.0 - lambda;
    DistanceField fld = f;
    fld.log.radius_limit = std::max(fld.log.radius_limit, 2.0 * radius * (1.0 + 1e-9));
    std::vector<double> ratio(samples, kInf);
    std::vector<std::string> errors(samples);
    parallel_for(static_cast<std::size_t>(samples), [&](std::size_t i) {
        Rng rng = sample_rng(seed, i);
        const Vec q = in_ball(rng, center, radius);
        const Vec q1 = in_ball(rng, center, radius);
        const Vec q2 = in_ball(rng, center, radius);
        try {
            const DistanceField fq = rebase(fld, q);
            const double a = squared_distance(fq, q1);
            const double b = squared_distance(fq, q2);
            const LogResult lr = solve_log(fld, q1, q2);
            const double d2 = norm2(fld.tensor, q1, lr.v);
            const double mid = squared_distance(fq, lr.exp.solution.position_at(0.5));
            ratio[i] = midpoint_ratio(mid, a, b, d2, eps);
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (int i = 0; i < samples; ++i) {
        rep.record(ratio[i], 1.0);
        if (!errors[i].empty()) rep.notes.push_back("triple " + std::to_string(i) + ": " + errors[i]);
    }
    rep.values["lambda"] = lambda;
    rep.values["radius"] = radius;
    rep.finalize();
    return rep;
}

ProbeReport metric_ball_probe(const DistanceField& f, double r, int pairs, std::uint64_t seed) {
    ProbeReport rep;
    rep.name = "metric-ball";
    rep.threshold = 0.0;
    const double r2 = r * r;
    std::vector<double> excess(pairs, kInf);
    std::vector<std::string> errors(pairs);
    parallel_for(static_cast<std::size_t>(pairs), [&](std::size_t i) {
        Rng rng = sample_rng(seed, i);
        try {
            auto draw = [&] {
                for (;;) {
                    const Vec x = in_ball(rng, f.p, 1.5 * r);
                    const double d = squared_distance(f, x);
                    if (d < r2) return std::pair{x, d};
                }
            };
            const auto [a, da] = draw();
            const auto [b, db] = draw();
            const LogResult lr = solve_log(f, a, b);
            double worst = -kInf;
            for (double t : {0.25, 0.5, 0.75}) {
                const double d = squared_distance(f, lr.exp.solution.position_at(t));
                worst = std::max(worst, d - std::max(da, db));
                if (!(d < r2)) worst = std::max(worst, d - r2 + 1.0);
            }
            excess[i] = worst;
        } catch (const Error& e) {
            errors[i] = e.what();
        }
    });
    for (int i = 0; i < pairs; ++i) {
        rep.record(excess[i], 1e-10);
        if (!errors[i].empty()) rep.notes.push_back("pair " + std::to_string(i) + ": " + errors[i]);
    }
    rep.values["radius"] = r;
    rep.finalize();
    return rep;
}

ProbeReport lorentzian_two_point_probe(const ConvexityCertificate& cert, const SprayField& s,
                                       const FundamentalTensor& g, const NormalizedChart& chart,
                                       const ConvexityProbeOptions& options) {
    if (g.signature != Signature::lorentzian)
        throw Error(ErrorCode::precondition, "two-point probe needs a Lorentzian metric");
    ProbeReport rep;
    rep.name = "lorentz-two-point";
    rep.threshold = 1.0;
    const NormalizedProblem np = normalized_problem(cert, s, g, chart);
    const double rho0 = options.radius > 0.0 ? options.radius : 0.98 * np.cert.delta_ball;
    const DistanceField f = probe_field(np, rho0, options.exp);
    const double eps = options.epsilon;
    const int n = static_cast<int>(f.p.size());
    rep.values["epsilon"] = eps;

    std::vector<double> lhs_per_sample(options.samples, 0.0);
    double worst_lhs = 0.0;
    double min_eig = kInf;
    ClauseSweep sweep;
    sweep.names = {"two_point"};
    sweep.sample = [&](const DistanceField& fld, const Vec& origin, double rho, std::size_t i) {
        Rng rng = sample_rng(options.seed, i);
        const Vec q = in_ball(rng, origin, rho);
        const Vec x0 = in_ball(rng, origin, rho);
        const Vec x1 = in_ball(rng, origin, rho);
        const DistanceField fq = rebase(fld, q);
        const LogResult lr = solve_log(fld, x0, x1);
        const double d2 = norm2(fld.tensor, x0, lr.v);
        const double d1 = gauss_gradient(fq, x1).dot(lr.exp.P);
        const double d0 = gauss_gradient(fq, x0).dot(lr.v);
        const double lhs = std::abs(d1 - d0 - 2.0 * d2);
        lhs_per_sample[i] = lhs;
        return std::vector<double>{lhs / (eps * (x1 - x0).squaredNorm())};
    };
    sweep.extra = [&](const DistanceField& fld, double rho, ProbeReport& r) {
        worst_lhs = *std::max_element(lhs_per_sample.begin(), lhs_per_sample.end());
        r.values["worst_lhs@" + std::to_string(rho)] = worst_lhs;
        Vec e0 = Vec::Zero(n);
        e0[0] = 1.0;
        double lo = kInf;
        for (int i = 0; i < options.samples; ++i) {
            Rng rng = sample_rng(options.seed ^ 0x9e3779b97f4a7c15ull, i);
            const Vec x = in_ball(rng, Vec::Zero(n), rho);
            const Mat rm = eval_tensor(fld.tensor, x, e0) + 2.0 * e0 * e0.transpose();
            lo = std::min(lo, Eigen::SelfAdjointEigenSolver<Mat>(rm).eigenvalues().minCoeff());
        }
        min_eig = lo;
        r.values["min_r_eigenvalue@" + std::to_string(rho)] = lo;
        return lo > 0.0;
    };
    halving_sweep(rep, f, rho0, options.max_halvings, options.samples, sweep);
    rep.values["worst_lhs"] = worst_lhs;
    rep.values["min_r_eigenvalue"] = min_eig;
    return rep;
}

ProbeReport spacelike_level_probe(const DistanceField& f, const ChartBox& O, const SpacelikeLevelOptions& options) {
    if (f.signature() != Signature::lorentzian)
        throw Error(ErrorCode::precondition, "spacelike level probe needs a Lorentzian metric");
    if (!(options.level < 0.0)) throw Error(ErrorCode::precondition, "level must be negative");
    ProbeReport rep;
    rep.name = "spacelike-level";
    rep.threshold = 1.0;
    const int n = static_cast<int>(f.p.size());
    const double c = options.level;
    const double eps = options.epsilon;
    const TimeOrientation T = default_time_orientation(n);

    struct Outcome {
        std::vector<double> ratios;
        double sublevel_excess = -kInf;
        bool spacelike = true;
        bool chronology = true;
        bool off_level = false;
        std::string error;
    };
    std::vector<Outcome> out(options.samples);
    parallel_for(static_cast<std::size_t>(options.samples), [&](std::size_t i) {
        Rng rng = sample_rng(options.seed, i);
        auto& o = out[i];
        try {
            std::array<Vec, 2> ends;
            std::array<double, 2> values{};
            for (int k = 0; k < 2; ++k) {
                const Vec target = in_ball(rng, O.center, O.radius);
                const LogResult lr = solve_log(f, f.p, target);
                const CausalClass cls = classify_vector(f.tensor, T, f.p, lr.v);
                if (cls.kind != CausalKind::timelike || cls.orientation != TimeDirection::future) {
                    o.chronology = false;
                    return;
                }
                const double lambda = std::sqrt(c / norm2(f.tensor, f.p, lr.v));
                ends[k] = exp_p(f.spray, f.constants, f.p, Vec(lambda * lr.v), f.log.exp).q;
                values[k] = squared_distance(f, ends[k]);
                if (std::abs(values[k] - c) > 1e-9) {
                    o.off_level = true;
                    return;
                }
            }
            const LogResult lr = solve_log(f, ends[0], ends[1]);
            const double d2 = norm2(f.tensor, ends[0], lr.v);
            if (!(d2 > 0.0)) {
                o.spacelike = false;
                return;
            }
            const double d = std::sqrt(d2);
            const Vec ga = gauss_gradient(f, ends[0]);
            const Vec gb = gauss_gradient(f, ends[1]);
            const double arc = std::abs(gb.dot(lr.exp.P) / d - ga.dot(lr.v) / d - 2.0 * d) / (eps * d);
            const double mid = squared_distance(f, lr.exp.solution.position_at(0.5));
            o.ratios = {arc, midpoint_ratio(mid, values[0], values[1], d2, eps)};
            for (int k = 1; k <= options.interior_nodes; ++k) {
                const double t = static_cast<double>(k) / (options.interior_nodes + 1);
                o.sublevel_excess =
                    std::max(o.sublevel_excess, squared_distance(f, lr.exp.solution.position_at(t)) - c);
            }
        } catch (const Error& e) {
            o.error = e.what();
        }
    });
    double worst_arc = -kInf, worst_mid = -kInf, worst_sub = -kInf;
    std::size_t rejected = 0;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& o = out[i];
        const std::string tag = "pair " + std::to_string(i) + ": ";
        if (!o.error.empty()) {
            rep.record(kInf);
            rep.notes.push_back(tag + o.error);
        } else if (!o.chronology) {
            rep.record(kInf);
            rep.notes.push_back(tag + "sub-ball point not in the chronological future of the base point");
        } else if (o.off_level) {
            ++rejected;
            rep.notes.push_back(tag + "endpoint not on the level set within 1e-9, rejected");
        } else if (!o.spacelike) {
            rep.record(kInf);
            rep.notes.push_back(tag + "connecting geodesic is not spacelike");
        } else {
            rep.record(std::max(o.ratios[0], o.ratios[1]));
            worst_arc = std::max(worst_arc, o.ratios[0]);
            worst_mid = std::max(worst_mid, o.ratios[1]);
            worst_sub = std::max(worst_sub, o.sublevel_excess);
            if (!(o.sublevel_excess < 0.0)) {
                ++rep.failures;
                rep.notes.push_back(tag + "connecting geodesic leaves the open sublevel set");
            }
        }
    }
    rep.values["level"] = c;
    rep.values["epsilon"] = eps;
    rep.values["arc_length"] = worst_arc;
    rep.values["midpoint"] = worst_mid;
    rep.values["sublevel_excess"] = worst_sub;
    rep.values["rejected"] = static_cast<double>(rejected);
    rep.finalize();
    return rep;
}

namespace {

struct BaseGeodesic {
    LogResult log;
    double length = 0.0;
    double dist = 0.0;
};

BaseGeodesic base_geodesic(const DistanceField& f, const Vec& q) {
    BaseGeodesic b;
    b.log = solve_log(f, f.p, q);
    b.length = std::sqrt(std::abs(norm2(f.tensor, f.p, b.log.v)));
    b.dist = (q - f.p).norm();
    return b;
}

/// Unit chart direction Euclidean-orthogonal to v.
Vec transverse(Rng& rng, const Vec& v) {
    const int n = static_cast<int>(v.size());
    const Vec vh = v.normalized();
    for (;;) {
        Vec u = random_unit(rng, n);
        u -= u.dot(vh) * vh;
        if (u.norm() > 1e-3) return u.normalized();
    }
}

Curve bump_curve(const GeodesicSolution& sol, const Vec& u, double amp) {
    Curve c;
    c.position = [&sol, u, amp](double t) { return Vec(sol.position_at(t) + amp * std::sin(M_PI * t) * u); };
    c.velocity = [&sol, u, amp](double t) {
        return Vec(sol.velocity_at(t) + amp * M_PI * std::cos(M_PI * t) * u);
    };
    return c;
}

}  // namespace

ProbeReport minimization_probe(const DistanceField& f, const Vec& q, const PerturbationFamily& family) {
    if (f.signature() != Signature::riemannian)
        throw Error(ErrorCode::precondition, "minimization probe needs a Riemannian or Finsler metric");
    ProbeReport rep;
    rep.name = "minimization";
    rep.threshold = 1e-9;
    const BaseGeodesic base = base_geodesic(f, q);
    const GeodesicSolution& sol = base.log.exp.solution;
    const std::size_t nm = family.modes.size();

    struct Outcome {
        double length = 0.0;
        double amplitude = 0.0;
        std::string error;
    };
    std::vector<Outcome> out(family.count);
    parallel_for(out.size(), [&](std::size_t i) {
        Rng rng = sample_rng(family.seed, i);
        const PerturbationMode mode = family.modes[i % nm];
        const double amp = family.amplitudes[(i / nm) % family.amplitudes.size()] * base.dist;
        const Vec u = transverse(rng, base.log.v);
        out[i].amplitude = amp;
        try {
            if (mode == PerturbationMode::piecewise_geodesic) {
                const Vec m = sol.position_at(0.5) + amp * u;
                const Vec w1 = solve_log(f, f.p, m).v;
                const Vec w2 = solve_log(f, m, q).v;
                out[i].length = std::sqrt(norm2(f.tensor, f.p, w1)) + std::sqrt(norm2(f.tensor, m, w2));
            } else {
                out[i].length = curve_length(f.tensor, bump_curve(sol, u, amp), LengthKind::finsler);
            }
        } catch (const Error& e) {
            out[i].error = e.what();
        }
    });
    double min_excess = kInf;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const std::string tag = "curve " + std::to_string(i) + ": ";
        if (!out[i].error.empty()) {
            rep.record(kInf);
            rep.notes.push_back(tag + out[i].error);
            continue;
        }
        const double excess = out[i].length - base.length;
        rep.record(-excess);
        min_excess = std::min(min_excess, excess);
        if (!(excess > 0.0)) {
            ++rep.failures;
            rep.notes.push_back(tag + "no strict length increase");
        }
    }
    rep.values["geodesic_length"] = base.length;
    rep.values["min_excess"] = min_excess;

    if (!f.tensor.reversible) {
        // the forward geodesic run backwards competes with the backward geodesic
        const DistanceField back = rebase(f, q);
        const BaseGeodesic bb = base_geodesic(back, f.p);
        Curve rev;
        rev.position = [&sol](double t) { return sol.position_at(1.0 - t); };
        rev.velocity = [&sol](double t) { return Vec(-sol.velocity_at(1.0 - t)); };
        const double reversed = curve_length(f.tensor, rev, LengthKind::finsler);
        rep.values["backward_length"] = bb.length;
        rep.values["reversed_forward_length"] = reversed;
        rep.record(bb.length - reversed);
    }
    rep.finalize();
    return rep;
}

ProbeReport maximization_probe(const DistanceField& f, const Vec& q, PerturbationFamily family) {
    if (f.signature() != Signature::lorentzian)
        throw Error(ErrorCode::precondition, "maximization probe needs a Lorentzian metric");
    family.causal = true;
    ProbeReport rep;
    rep.name = "maximization";
    rep.threshold = 1e-9;
    const int n = static_cast<int>(f.p.size());
    const TimeOrientation T = default_time_orientation(n);
    const BaseGeodesic base = base_geodesic(f, q);
    const CausalClass bc = classify_vector(f.tensor, T, f.p, base.log.v);
    if (bc.kind != CausalKind::timelike || bc.orientation != TimeDirection::future)
        throw Error(ErrorCode::precondition, "target is not in the chronological future of the base point");
    const GeodesicSolution& sol = base.log.exp.solution;
    const std::size_t nm = family.modes.size();
    auto future_causal = [&](const Vec& x, const Vec& v) {
        const CausalClass c = classify_vector(f.tensor, T, x, v);
        return c.orientation == TimeDirection::future &&
               (c.kind == CausalKind::timelike || c.kind == CausalKind::lightlike);
    };

    struct Outcome {
        bool accepted = false;
        int rejections = 0;
        double proper_time = 0.0;
        bool causal_log = true;
        bool decreasing = true;
        std::string error;
    };
    std::vector<Outcome> out(family.count);
    parallel_for(out.size(), [&](std::size_t i) {
        Rng rng = sample_rng(family.seed, i);
        const PerturbationMode mode = family.modes[i % nm];
        double amp = family.amplitudes[(i / nm) % family.amplitudes.size()] * base.dist;
        const Vec u = random_unit(rng, n);
        auto& o = out[i];
        try {
            for (int attempt = 0; attempt < 10 && !o.accepted; ++attempt, amp *= 0.5) {
                std::function<Vec(double)> point;
                if (mode == PerturbationMode::piecewise_geodesic) {
                    const Vec m = sol.position_at(0.5) + amp * u;
                    const LogResult l1 = solve_log(f, f.p, m);
                    const LogResult l2 = solve_log(f, m, q);
                    if (!future_causal(f.p, l1.v) || !future_causal(m, l2.v)) {
                        ++o.rejections;
                        continue;
                    }
                    o.proper_time = std::sqrt(std::max(0.0, -norm2(f.tensor, f.p, l1.v))) +
                                    std::sqrt(std::max(0.0, -norm2(f.tensor, m, l2.v)));
                    const GeodesicSolution s1 = l1.exp.solution, s2 = l2.exp.solution;
                    point = [s1, s2](double t) { return t <= 0.5 ? s1.position_at(2.0 * t) : s2.position_at(2.0 * t - 1.0); };
                } else {
                    const Curve c = bump_curve(sol, u, amp);
                    bool ok = true;
                    for (int k = 0; k <= 256 && ok; ++k) {
                        const double t = k / 256.0;
                        ok = future_causal(c.position(t), c.velocity(t));
                    }
                    if (!ok) {
                        ++o.rejections;
                        continue;
                    }
                    o.proper_time = curve_length(f.tensor, c, LengthKind::lorentzian);
                    point = c.position;
                }
                o.accepted = true;
                double previous = 0.0;
                for (double t : {0.25, 0.5, 0.75, 1.0}) {
                    const Vec x = t == 1.0 ? q : point(t);
                    const Vec w = solve_log(f, f.p, x).v;
                    o.causal_log = o.causal_log && future_causal(f.p, w);
                    const double d2 = norm2(f.tensor, f.p, w);
                    o.decreasing = o.decreasing && d2 < previous;
                    previous = d2;
                }
            }
        } catch (const Error& e) {
            o.error = e.what();
        }
    });
    std::size_t accepted = 0, rejections = 0;
    double max_excess = -kInf;
    for (std::size_t i = 0; i < out.size(); ++i) {
        const auto& o = out[i];
        const std::string tag = "curve " + std::to_string(i) + ": ";
        rejections += o.rejections;
        if (!o.error.empty()) {
            rep.record(kInf);
            rep.notes.push_back(tag + o.error);
            continue;
        }
        if (!o.accepted) {
            rep.notes.push_back(tag + "no causal perturbation found");
            continue;
        }
        ++accepted;
        rep.record(o.proper_time - base.length);
        max_excess = std::max(max_excess, o.proper_time - base.length);
        if (!o.causal_log) {
            ++rep.failures;
            rep.notes.push_back(tag + "log along the curve is not future causal");
        }
        if (!o.decreasing) {
            ++rep.failures;
            rep.notes.push_back(tag + "squared distance does not decrease along the curve");
        }
    }
    rep.values["proper_time"] = base.length;
    rep.values["max_excess"] = max_excess;
    rep.values["accepted"] = static_cast<double>(accepted);
    rep.values["rejections"] = static_cast<double>(rejections);
    rep.finalize();
    return rep;
}

}  // namespace lipspray
