// Command-line driver: certify balls, integrate geodesics, invert exp and
// run probe suites on gallery geometries.
#include "lipspray/distance.hpp"
#include "lipspray/gallery.hpp"
#include "lipspray/report.hpp"
#include "lipspray/sampling.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

using namespace lipspray;

namespace {

constexpr int kExitPass = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
    std::string geometry;
    std::vector<std::string> params;
    std::vector<double> center;
    double radius = 0.0;
    std::uint64_t seed = 0;
    std::string out;
};

void add_common(CLI::App* app, CommonArgs& a, bool with_out = true) {
    app->add_option("--geometry", a.geometry, "gallery name or geometry JSON file")->required();
    app->add_option("--param", a.params, "gallery parameter key=value (repeatable)");
    app->add_option("--center", a.center, "ball center (comma or space separated)")->delimiter(',');
    app->add_option("--radius", a.radius, "ball radius in chart units");
    app->add_option("--seed", a.seed, "random seed");
    if (with_out) app->add_option("--out", a.out, "JSON report path");
}

Params parse_params(const std::vector<std::string>& items) {
    Params p;
    for (const auto& item : items) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw Error(ErrorCode::invalid_params, "parameter '" + item + "' is not key=value");
        try {
            p[item.substr(0, eq)] = std::stod(item.substr(eq + 1));
        } catch (const std::exception&) {
            throw Error(ErrorCode::invalid_params, "parameter '" + item + "' has a non-numeric value");
        }
    }
    return p;
}

Geometry resolve(const CommonArgs& a) {
    const auto names = gallery_names();
    if (std::find(names.begin(), names.end(), a.geometry) != names.end())
        return build_gallery(a.geometry, parse_params(a.params));
    if (!a.params.empty()) throw Error(ErrorCode::invalid_params, "--param only applies to gallery names");
    return load_geometry(a.geometry);
}

Vec to_vec(const std::vector<double>& xs, int n, const char* what) {
    if (static_cast<int>(xs.size()) != n)
        throw Error(ErrorCode::precondition, std::string(what) + " needs " + std::to_string(n) + " components");
    Vec v(n);
    for (int i = 0; i < n; ++i) v[i] = xs[i];
    return v;
}

ChartBox working_box(const CommonArgs& a, const Geometry& g) {
    ChartBox box = g.box();
    if (!a.center.empty()) box.center = to_vec(a.center, g.dim(), "--center");
    if (a.radius > 0.0) box.radius = a.radius;
    return box;
}

std::string input_json(const std::string& command, const CommonArgs& a, const nlohmann::ordered_json& extra = {}) {
    nlohmann::ordered_json j;
    j["command"] = command;
    j["geometry"] = a.geometry;
    j["params"] = a.params;
    j["center"] = a.center;
    j["radius"] = a.radius;
    j["seed"] = a.seed;
    if (!extra.is_null()) j["options"] = extra;
    return j.dump();
}

std::string fmt(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string fmt(const Vec& v) {
    std::string s = "[";
    for (Eigen::Index i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
    return s + "]";
}

void write_report(const RunReport& r, const std::string& path) {
    if (path.empty()) return;
    std::ofstream os(path);
    if (!os) throw Error(ErrorCode::precondition, "cannot write " + path);
    os << to_json(r);
}

void print_probe(const ProbeReport& p) {
    std::printf("%-24s %s  worst=%s  threshold=%s  samples=%zu  failures=%zu\n", p.name.c_str(),
                p.passed ? "PASS" : "FAIL", fmt(p.worst_residual).c_str(), fmt(p.threshold).c_str(), p.samples,
                p.failures);
    for (std::size_t i = 0; i < std::min<std::size_t>(p.notes.size(), 5); ++i)
        std::printf("    note: %s\n", p.notes[i].c_str());
}

const FundamentalTensor& need_tensor(const Geometry& g) {
    if (!g.tensor) throw Error(ErrorCode::precondition, "geometry '" + g.name + "' has no metric tensor");
    return *g.tensor;
}

std::optional<NormalizedChart> normalized_chart(const Geometry& g, const Vec& p) {
    if (g.tensor && g.tensor->velocity_independent) return normalize_chart_at(*g.tensor, levi_civita(*g.tensor), p);
    if (g.christoffel) return normalize_chart_at(*g.christoffel, p);
    return std::nullopt;
}

Vec axis(int n, int i) {
    Vec e = Vec::Zero(n);
    e[i] = 1.0;
    return e;
}

std::vector<ProbeReport> run_suite(const std::string& suite, const Geometry& g, const ConvexityCertificate& cert,
                                   std::uint64_t seed) {
    const int n = g.dim();
    const Vec& p = cert.box.center;
    const ConvexityConstants& c = cert.constants;
    const double delta = cert.delta_ball;
    std::vector<ProbeReport> out;

    if (suite == "homogeneity") {
        std::vector<std::pair<Vec, Vec>> samples;
        for (int i = 0; i < 32; ++i) {
            Rng rng = sample_rng(seed, i);
            const Vec x = random_in_ball(rng, p, delta);
            const Vec v = random_unit(rng, n) * (0.1 + 0.9 * std::uniform_real_distribution<double>()(rng));
            samples.emplace_back(x, v);
        }
        const std::vector<double> scales{0.25, 0.5, 2.0, 3.7};
        out.push_back(check_homogeneity(g.spray, samples, scales));
        if (g.tensor) out.push_back(check_fundamental_identities(*g.tensor, samples));
    } else if (suite == "dependence") {
        std::vector<InitialPair> pairs;
        for (int i = 0; i < 8; ++i) {
            Rng rng = sample_rng(seed, i);
            const Vec origin = Vec::Zero(n);
            pairs.push_back({random_in_ball(rng, p, 0.3 * delta), random_in_ball(rng, origin, 0.3 * delta),
                             random_in_ball(rng, p, 0.3 * delta), random_in_ball(rng, origin, 0.3 * delta)});
        }
        out.push_back(dependence_probe(g.spray, c, pairs));
    } else if (suite == "strongdiff") {
        std::vector<double> radii;
        for (double r : {0.2, 0.1, 0.05, 0.025})
            if (r < delta) radii.push_back(r);
        out.push_back(strong_differential_probe(g.spray, c, p, radii));
    } else if (suite == "position") {
        const auto chart = normalized_chart(g, p);
        PositionProbeOptions opt;
        opt.seed = seed;
        out.push_back(position_inequality_probe(cert, g.spray, chart ? &*chart : nullptr, opt));
    } else if (suite == "convexity") {
        const auto pairs = random_pairs(p, delta, 50, seed);
        out.push_back(containment_probe(cert, g.spray, pairs));
        if (g.signature == Signature::riemannian && g.tensor && g.tensor->velocity_independent) {
            ConvexityProbeOptions opt;
            opt.seed = seed;
            out.push_back(strong_convexity_probe_riemannian(cert, g.spray, *g.tensor, *normalized_chart(g, p), opt));
        }
    } else if (suite == "gauss") {
        const DistanceField f = make_distance_field(g.spray, need_tensor(g), c, p);
        GaussCheckOptions go;
        go.seed = seed;
        out.push_back(gauss_check(f, go));
        RadialFlowOptions ro;
        ro.seed = seed;
        ro.level = (g.signature == Signature::lorentzian ? -1.0 : 1.0) * 0.25 * delta * delta;
        ro.time = 0.5;
        out.push_back(radial_flow_probe(f, ro));
    } else if (suite == "lorentz-two-point") {
        if (g.signature != Signature::lorentzian)
            throw Error(ErrorCode::precondition, "suite lorentz-two-point needs a Lorentzian geometry");
        ConvexityProbeOptions opt;
        opt.seed = seed;
        opt.epsilon = 0.3;
        out.push_back(lorentzian_two_point_probe(cert, g.spray, *g.tensor, *normalized_chart(g, p), opt));
    } else if (suite == "spacelike-level") {
        if (g.signature != Signature::lorentzian)
            throw Error(ErrorCode::precondition, "suite spacelike-level needs a Lorentzian geometry");
        const DistanceField f = make_distance_field(g.spray, *g.tensor, c, p);
        SpacelikeLevelOptions opt;
        opt.seed = seed;
        opt.level = -0.25 * delta * delta;
        out.push_back(spacelike_level_probe(f, ChartBox{Vec(p + 0.6 * delta * axis(n, 0)), 0.1 * delta}, opt));
    } else if (suite == "minmax") {
        const DistanceField f = make_distance_field(g.spray, need_tensor(g), c, p);
        PerturbationFamily fam;
        fam.seed = seed;
        if (g.signature == Signature::lorentzian) {
            const Vec q = p + 0.5 * delta * axis(n, 0) + 0.1 * delta * axis(n, 1);
            out.push_back(maximization_probe(f, q, fam));
        } else {
            const Vec q = p + 0.5 * delta * Vec::Ones(n).normalized();
            out.push_back(minimization_probe(f, q, fam));
        }
    } else {
        throw Error(ErrorCode::precondition, "unknown suite '" + suite + "'");
    }
    return out;
}

/// Certificate or the unbounded-estimate diagnostic.
std::optional<ConvexityCertificate> try_certify(const Geometry& g, const ChartBox& box, RunReport& report) {
    try {
        return certify_ball(g.spray, box.center, box.radius);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::unbounded_estimate) throw;
        report.diagnostics.push_back(e.what());
        std::fprintf(stderr, "%s\n", e.what());
        return std::nullopt;
    }
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Lipschitz spray geometry toolkit"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    CommonArgs cert_args;
    auto* certify = app.add_subcommand("certify", "certify a convex coordinate ball");
    add_common(certify, cert_args);

    CommonArgs geo_args;
    std::vector<double> x0, v0;
    std::string method = "picard", csv;
    int steps = 1000;
    auto* geodesic = app.add_subcommand("geodesic", "integrate a geodesic on [0, 1]");
    add_common(geodesic, geo_args, false);
    geodesic->add_option("--x0", x0, "initial position")->delimiter(',');
    geodesic->add_option("--v0", v0, "initial velocity")->delimiter(',')->required();
    geodesic->add_option("--method", method, "picard or reference")->check(CLI::IsMember({"picard", "reference"}));
    geodesic->add_option("--steps", steps, "RK4 steps for the reference method");
    geodesic->add_option("--csv", csv, "trajectory CSV path");

    CommonArgs log_args;
    std::vector<double> lp, lq;
    auto* logmap = app.add_subcommand("logmap", "solve exp_p(v) = q for v");
    add_common(logmap, log_args, false);
    logmap->add_option("--p", lp, "base point")->delimiter(',');
    logmap->add_option("--q", lq, "target point")->delimiter(',')->required();

    CommonArgs probe_args;
    std::string suite;
    auto* probe = app.add_subcommand("probe", "run a probe suite");
    add_common(probe, probe_args);
    probe->add_option("--suite", suite, "probe suite")
        ->required()
        ->check(CLI::IsMember({"gauss", "convexity", "lorentz-two-point", "spacelike-level", "minmax", "position",
                               "strongdiff", "dependence", "homogeneity"}));

    std::vector<std::string> inputs;
    bool summary = false;
    auto* report = app.add_subcommand("report", "tabulate JSON reports");
    report->add_option("--in", inputs, "report files")->required()->check(CLI::ExistingFile);
    report->add_flag("--summary", summary, "print one line per probe");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitPass : kExitUsage;
    }

    const auto t0 = std::chrono::steady_clock::now();
    try {
        if (*certify) {
            const Geometry g = resolve(cert_args);
            const ChartBox box = working_box(cert_args, g);
            RunReport r;
            r.command = "certify";
            r.seed = cert_args.seed;
            r.input = input_json("certify", cert_args);
            const auto cert = try_certify(g, box, r);
            if (cert) {
                r.certificates.push_back(*cert);
                std::printf("geometry %s  center %s  radius %s\n", g.name.c_str(), fmt(box.center).c_str(),
                            fmt(box.radius).c_str());
                std::printf("alpha %s  beta %s  M %s\n", fmt(cert->estimate.alpha).c_str(),
                            fmt(cert->estimate.beta).c_str(), fmt(cert->estimate.M).c_str());
                std::printf("delta %s  D %s  z+ %s  z- %s\n", fmt(cert->delta_ball).c_str(),
                            fmt(cert->constants.D).c_str(), fmt(cert->z_min_plus).c_str(),
                            fmt(cert->z_min_minus).c_str());
                std::printf("status %s\n", std::string(to_string(cert->status)).c_str());
            }
            r.seconds = elapsed(t0);
            write_report(r, cert_args.out);
            return r.all_passed() ? kExitPass : kExitFail;
        }
        if (*geodesic) {
            const Geometry g = resolve(geo_args);
            const ChartBox box = working_box(geo_args, g);
            const Vec x = x0.empty() ? box.center : to_vec(x0, g.dim(), "--x0");
            const Vec v = to_vec(v0, g.dim(), "--v0");
            GeodesicSolution sol;
            if (method == "reference") {
                sol = reference_geodesic(g.spray, x, v, 1.0, steps);
            } else {
                const ConvexityCertificate cert = certify_ball(g.spray, box.center, box.radius);
                sol = picard_geodesic(g.spray, x, v, cert.constants, PicardOptions{.tol = 1e-12});
            }
            std::printf("method %s  nodes %zu\n", sol.method.c_str(), sol.t.size());
            std::printf("x(1) %s\nv(1) %s\nerror_bound %s\n", fmt(sol.end_position()).c_str(),
                        fmt(sol.end_velocity()).c_str(), fmt(sol.error_bound()).c_str());
            if (!csv.empty()) {
                std::ofstream os(csv);
                if (!os) throw Error(ErrorCode::precondition, "cannot write " + csv);
                write_trajectory_csv(os, sol);
            }
            return kExitPass;
        }
        if (*logmap) {
            const Geometry g = resolve(log_args);
            const ChartBox box = working_box(log_args, g);
            const ConvexityCertificate cert = certify_ball(g.spray, box.center, box.radius);
            const Vec p = lp.empty() ? box.center : to_vec(lp, g.dim(), "--p");
            const Vec q = to_vec(lq, g.dim(), "--q");
            const LogResult lr = log_p(g.spray, cert.constants, p, q, shooting_options(cert, 1e-12));
            std::printf("v %s\ndefect %s\niterations %d\ndamped %s\n", fmt(lr.v).c_str(), fmt(lr.defect).c_str(),
                        lr.iterations, lr.damped ? "yes" : "no");
            return kExitPass;
        }
        if (*probe) {
            const Geometry g = resolve(probe_args);
            const ChartBox box = working_box(probe_args, g);
            RunReport r;
            r.command = "probe";
            r.seed = probe_args.seed;
            r.input = input_json("probe", probe_args, nlohmann::ordered_json{{"suite", suite}});
            if (const auto cert = try_certify(g, box, r)) {
                r.certificates.push_back(*cert);
                if (cert->status != CertStatus::certified_sampled) {
                    r.diagnostics.push_back("ball is not certified; probes skipped");
                    std::fprintf(stderr, "ball is not certified; probes skipped\n");
                } else {
                    r.probes = run_suite(suite, g, *cert, probe_args.seed);
                }
            }
            for (const auto& p : r.probes) print_probe(p);
            r.seconds = elapsed(t0);
            write_report(r, probe_args.out);
            return r.all_passed() ? kExitPass : kExitFail;
        }
        if (*report) {
            bool ok = true;
            for (const auto& path : inputs) {
                std::ifstream is(path);
                std::stringstream ss;
                ss << is.rdbuf();
                const ReportSummary s = summarize_report(ss.str(), path);
                bool file_ok = s.certified;
                for (const auto& [name, passed] : s.probes) file_ok = file_ok && passed;
                ok = ok && file_ok;
                std::printf("%s  %s  %s\n", path.c_str(), s.command.c_str(), file_ok ? "PASS" : "FAIL");
                if (summary) {
                    if (!s.certified) std::printf("    %-24s FAIL\n", "certificate");
                    for (const auto& [name, passed] : s.probes)
                        std::printf("    %-24s %s\n", name.c_str(), passed ? "PASS" : "FAIL");
                }
            }
            return ok ? kExitPass : kExitFail;
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return e.code() == ErrorCode::unbounded_estimate ? kExitFail : kExitUsage;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kExitUsage;
    }
    return kExitUsage;
}
