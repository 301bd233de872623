#include "lipspray/spray.hpp"

#include "lipspray/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lipspray {

std::string_view to_string(SprayKind kind) {
    switch (kind) {
    case SprayKind::generic_spray: return "generic-spray";
    case SprayKind::connection: return "connection";
    case SprayKind::finsler_derived: return "finsler-derived";
    }
    return "unknown";
}

Vec Christoffel::contract(const Vec& u, const Vec& w) const {
    Vec out = Vec::Zero(n_);
    for (int mu = 0; mu < n_; ++mu) {
        double s = 0.0;
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b) s += (*this)(mu, a, b) * u[a] * w[b];
        out[mu] = s;
    }
    return out;
}

double Christoffel::max_asymmetry() const {
    double worst = 0.0;
    for (int mu = 0; mu < n_; ++mu)
        for (int a = 0; a < n_; ++a)
            for (int b = a + 1; b < n_; ++b)
                worst = std::max(worst, std::abs((*this)(mu, a, b) - (*this)(mu, b, a)));
    return worst;
}

double Christoffel::max_abs() const {
    double worst = 0.0;
    for (int mu = 0; mu < n_; ++mu)
        for (int a = 0; a < n_; ++a)
            for (int b = 0; b < n_; ++b) worst = std::max(worst, std::abs((*this)(mu, a, b)));
    return worst;
}

Vec ChartMap::invert(const Vec& xt, const Vec& guess) const {
    if (inverse) return inverse(xt);
    Vec x = guess;
    for (int it = 0; it < 50; ++it) {
        const Vec r = forward(x) - xt;
        if (r.norm() <= 1e-15 * (1.0 + xt.norm())) break;
        const Mat J = jacobian(x);
        Eigen::PartialPivLU<Mat> lu(J);
        if (std::abs(lu.determinant()) < 1e-300)
            throw Error(ErrorCode::singular_jacobian, "chart map Jacobian is singular during inversion");
        const Vec step = lu.solve(r);
        x -= step;
        if (step.norm() <= 1e-16 * (1.0 + x.norm())) break;
    }
    return x;
}

Vec ChartMap::invert(const Vec& xt) const { return invert(xt, xt); }

ChartMap identity_chart(int n) {
    ChartMap m;
    m.dim = n;
    m.forward = [](const Vec& x) { return x; };
    m.jacobian = [n](const Vec&) { return Mat(Mat::Identity(n, n)); };
    m.hessian = [n](const Vec&) { return Christoffel(n); };
    m.inverse = [](const Vec& xt) { return xt; };
    return m;
}

ChartMap linear_chart(const Mat& A, const Vec& shift) {
    const int n = static_cast<int>(A.rows());
    Eigen::PartialPivLU<Mat> lu(A);
    if (std::abs(lu.determinant()) < 1e-300)
        throw Error(ErrorCode::singular_jacobian, "linear chart map is singular");
    const Mat Ainv = lu.inverse();
    ChartMap m;
    m.dim = n;
    m.forward = [A, shift](const Vec& x) { return Vec(A * (x - shift)); };
    m.jacobian = [A](const Vec&) { return A; };
    m.hessian = [n](const Vec&) { return Christoffel(n); };
    m.inverse = [Ainv, shift](const Vec& xt) { return Vec(shift + Ainv * xt); };
    return m;
}

Vec eval_spray(const SprayField& s, const Vec& x, const Vec& v) {
    if (s.domain && !s.domain->contains(x)) {
        throw Error(ErrorCode::domain_violation,
                    "spray '" + s.name + "' evaluated outside its chart box (distance " +
                        std::to_string((x - s.domain->center).norm()) + " > " +
                        std::to_string(s.domain->radius) + ")");
    }
    if (v.squaredNorm() == 0.0) return Vec::Zero(x.size());
    return s.H(x, v);
}

SprayField connection_to_spray(const ChristoffelField& c) {
    SprayField s;
    s.dim = c.dim;
    s.kind = SprayKind::connection;
    s.reversible = true;
    s.domain = c.domain;
    s.name = c.name;
    auto gamma = c.gamma;
    s.H = [gamma](const Vec& x, const Vec& v) { return Vec(-gamma(x).contract(v, v)); };
    return s;
}

SprayField reverse_spray(const SprayField& s) {
    SprayField r = s;
    auto H = s.H;
    r.H = [H](const Vec& x, const Vec& v) { return H(x, Vec(-v)); };
    r.name = s.name + "~reverse";
    return r;
}

ProbeReport check_homogeneity(const SprayField& s, std::span<const std::pair<Vec, Vec>> samples,
                              std::span<const double> scales, double tolerance, double floor) {
    ProbeReport rep;
    rep.name = "homogeneity";
    rep.threshold = tolerance;
    for (const auto& [x, v] : samples) {
        const Vec h1 = eval_spray(s, x, v);
        for (double sc : scales) {
            if (!(sc > 0.0)) throw Error(ErrorCode::precondition, "homogeneity scales must be positive");
            const Vec hs = eval_spray(s, x, Vec(sc * v));
            const double res = (hs - sc * sc * h1).norm() / (sc * sc * h1.norm() + floor);
            rep.record(res);
        }
    }
    rep.finalize();
    return rep;
}

std::vector<Vec> unit_directions(int n, int count) {
    std::vector<Vec> dirs;
    if (n == 1) {
        dirs.push_back(make_vec({1.0}));
        dirs.push_back(make_vec({-1.0}));
        return dirs;
    }
    if (n == 2) {
        for (int k = 0; k < count; ++k) {
            const double a = 2.0 * std::numbers::pi * k / count;
            dirs.push_back(make_vec({std::cos(a), std::sin(a)}));
        }
        return dirs;
    }
    // Quasi-uniform points on S^{n-1}: golden-angle spiral for the first
    // three coordinates, remaining coordinates rotated in with a second
    // irrational sequence.
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int k = 0; k < count; ++k) {
        const double z = 1.0 - 2.0 * (k + 0.5) / count;
        const double rad = std::sqrt(std::max(0.0, 1.0 - z * z));
        const double phi = golden * k;
        Vec d = Vec::Zero(n);
        d[0] = rad * std::cos(phi);
        d[1] = rad * std::sin(phi);
        d[2] = z;
        for (int c = 3; c < n; ++c) {
            const double w = std::sin(std::sqrt(2.0 + c) * (k + 1));
            const double t = d[c - 1];
            d[c - 1] = t * std::cos(w);
            d[c] = t * std::sin(w);
        }
        dirs.push_back(d / d.norm());
    }
    return dirs;
}

namespace {

// Cube grid of `d` points per axis on [c - r, c + r]^n with an inside-ball
// mask; neighbors along the forward half of the {-1,0,1}^n stencil.
struct Grid {
    int n = 0;
    int d = 0;
    std::vector<Vec> points;     // all cube points
    std::vector<char> inside;    // ball mask
    std::vector<int> offsets;    // linear index offsets of forward neighbors
    std::vector<std::vector<int>> offset_steps;

    Grid(const Vec& center, double radius, int density) : n(static_cast<int>(center.size())), d(density) {
        std::size_t total = 1;
        for (int i = 0; i < n; ++i) total *= static_cast<std::size_t>(d);
        points.reserve(total);
        inside.reserve(total);
        std::vector<int> idx(n, 0);
        for (std::size_t lin = 0; lin < total; ++lin) {
            std::size_t rem = lin;
            Vec p(n);
            for (int a = n - 1; a >= 0; --a) {
                idx[a] = static_cast<int>(rem % d);
                rem /= d;
                p[a] = center[a] + radius * (-1.0 + 2.0 * idx[a] / (d - 1));
            }
            points.push_back(p);
            inside.push_back((p - center).norm() <= radius * (1.0 + 1e-12) ? 1 : 0);
        }
        // forward half-stencil: first nonzero step is +1
        std::size_t stencil = 1;
        for (int i = 0; i < n; ++i) stencil *= 3;
        for (std::size_t s = 0; s < stencil; ++s) {
            std::vector<int> step(n);
            std::size_t rem = s;
            for (int a = n - 1; a >= 0; --a) {
                step[a] = static_cast<int>(rem % 3) - 1;
                rem /= 3;
            }
            int first = 0;
            for (int a = 0; a < n; ++a)
                if (step[a] != 0) {
                    first = step[a];
                    break;
                }
            if (first == 1) offset_steps.push_back(step);
        }
    }

    // Linear index of the neighbor, or -1 when it leaves the cube.
    long neighbor(std::size_t lin, const std::vector<int>& step) const {
        long result = 0;
        long stride = 1;
        std::size_t rem = lin;
        std::vector<int> idx(n);
        for (int a = n - 1; a >= 0; --a) {
            idx[a] = static_cast<int>(rem % d);
            rem /= d;
        }
        for (int a = n - 1; a >= 0; --a) {
            const int j = idx[a] + step[a];
            if (j < 0 || j >= d) return -1;
            result += stride * j;
            stride *= d;
        }
        return result;
    }
};

// Grid budgets: cube points for α and M, spray evaluations for β.
constexpr double kAlphaPoints = 3.0e4;
constexpr double kBetaEvaluations = 6.0e5;

int cap_density(int n, int density, double max_points) {
    const int cap = static_cast<int>(std::floor(std::pow(max_points, 1.0 / n)));
    return std::max(2, std::min(density, cap));
}

struct RawLevel {
    double alpha = 0.0;
    double beta = 0.0;
    double M = 0.0;
};

RawLevel raw_estimate(const SprayField& s, const ChartBox& box, int density, const EstimateOptions& opt,
                      const std::vector<Vec>& dirs) {
    const int n = box.dim();
    RawLevel out;

    // α and M: position grid, fixed unit directions
    {
        const int d = cap_density(n, density, kAlphaPoints);
        Grid g(box.center, box.radius, d);
        std::vector<std::vector<long>> nbr(g.points.size());
        for (std::size_t i = 0; i < g.points.size(); ++i) {
            if (!g.inside[i]) continue;
            for (const auto& st : g.offset_steps) {
                const long j = g.neighbor(i, st);
                if (j >= 0 && g.inside[static_cast<std::size_t>(j)]) nbr[i].push_back(j);
            }
        }
        std::vector<double> alpha(dirs.size(), 0.0), M(dirs.size(), 0.0);
        parallel_for(dirs.size(), [&](std::size_t k) {
            std::vector<Vec> values(g.points.size());
            for (std::size_t i = 0; i < g.points.size(); ++i) {
                if (!g.inside[i]) continue;
                values[i] = eval_spray(s, g.points[i], dirs[k]);
                M[k] = std::max(M[k], values[i].norm());
            }
            for (std::size_t i = 0; i < g.points.size(); ++i) {
                for (long j : nbr[i]) {
                    const auto jj = static_cast<std::size_t>(j);
                    const double q = (values[jj] - values[i]).norm() / (g.points[jj] - g.points[i]).norm();
                    alpha[k] = std::max(alpha[k], q);
                }
            }
        });
        out.alpha = *std::max_element(alpha.begin(), alpha.end());
        out.M = *std::max_element(M.begin(), M.end());
    }

    // β: coarse position set, velocity grid on the unit ball
    {
        const int dp = std::max(2, std::min(density, opt.beta_position_density));
        Grid gp(box.center, box.radius, dp);
        std::vector<Vec> xs;
        for (std::size_t i = 0; i < gp.points.size(); ++i)
            if (gp.inside[i]) xs.push_back(gp.points[i]);
        const double budget = kBetaEvaluations / static_cast<double>(std::max<std::size_t>(1, xs.size()));
        const int dv = cap_density(n, density, budget);
        Grid gv(Vec::Zero(n), 1.0, dv);
        std::vector<std::vector<long>> nbr(gv.points.size());
        for (std::size_t i = 0; i < gv.points.size(); ++i) {
            if (!gv.inside[i]) continue;
            for (const auto& st : gv.offset_steps) {
                const long j = gv.neighbor(i, st);
                if (j >= 0 && gv.inside[static_cast<std::size_t>(j)]) nbr[i].push_back(j);
            }
        }
        std::vector<double> beta(xs.size(), 0.0);
        parallel_for(xs.size(), [&](std::size_t k) {
            std::vector<Vec> values(gv.points.size());
            for (std::size_t i = 0; i < gv.points.size(); ++i)
                if (gv.inside[i]) values[i] = eval_spray(s, xs[k], gv.points[i]);
            for (std::size_t i = 0; i < gv.points.size(); ++i) {
                for (long j : nbr[i]) {
                    const auto jj = static_cast<std::size_t>(j);
                    const double q = (values[jj] - values[i]).norm() / (gv.points[jj] - gv.points[i]).norm();
                    beta[k] = std::max(beta[k], q);
                }
            }
        });
        out.beta = beta.empty() ? 0.0 : *std::max_element(beta.begin(), beta.end());
    }
    return out;
}

}  // namespace

std::vector<Vec> ball_grid(const ChartBox& box, int density) {
    Grid g(box.center, box.radius, std::max(2, density));
    std::vector<Vec> pts;
    for (std::size_t i = 0; i < g.points.size(); ++i)
        if (g.inside[i]) pts.push_back(g.points[i]);
    return pts;
}

LipschitzEstimate estimate_constants(const SprayField& s, const ChartBox& box, const EstimateOptions& opt) {
    if (opt.grid_density < 2) throw Error(ErrorCode::precondition, "grid density must be at least 2 per axis");
    if (!(box.radius > 0.0)) throw Error(ErrorCode::precondition, "chart box radius must be positive");
    const auto dirs = unit_directions(box.dim(), opt.directions);

    LipschitzEstimate est;
    est.grid_density = opt.grid_density;
    est.certified = false;

    std::vector<int> levels;
    for (int d = opt.grid_density; d >= 2; d /= 2) levels.push_back(d);
    const RawLevel base = raw_estimate(s, box, opt.grid_density, opt, dirs);
    const RawLevel fine = raw_estimate(s, box, 2 * opt.grid_density, opt, dirs);
    const RawLevel finest = raw_estimate(s, box, 4 * opt.grid_density, opt, dirs);
    est.alpha_levels = {base.alpha, fine.alpha, finest.alpha};
    est.beta_levels = {base.beta, fine.beta, finest.beta};

    est.alpha = std::max({base.alpha, fine.alpha, finest.alpha});
    est.beta = std::max({base.beta, fine.beta, finest.beta});
    est.M = std::max({base.M, fine.M, finest.M});
    for (std::size_t k = 1; k < levels.size(); ++k) {
        const RawLevel r = raw_estimate(s, box, levels[k], opt, dirs);
        est.alpha = std::max(est.alpha, r.alpha);
        est.beta = std::max(est.beta, r.beta);
        est.M = std::max(est.M, r.M);
    }

    if (opt.detect_holder) {
        auto grows = [&](const std::array<double, 3>& lv) {
            return lv[0] > 1e-12 && lv[2] >= opt.holder_ratio * lv[0];
        };
        if (grows(est.alpha_levels) || grows(est.beta_levels)) {
            throw Error(ErrorCode::unbounded_estimate,
                        "difference quotients of spray '" + s.name + "' grew from alpha=" +
                            std::to_string(est.alpha_levels[0]) + ", beta=" + std::to_string(est.beta_levels[0]) +
                            " to alpha=" + std::to_string(est.alpha_levels[2]) +
                            ", beta=" + std::to_string(est.beta_levels[2]) +
                            " across two refinements; the spray looks Hölder, not Lipschitz");
        }
    }
    return est;
}

LipschitzEstimate estimate_constants(const SprayField& s, const ChartBox& box, int grid_density) {
    EstimateOptions opt;
    opt.grid_density = grid_density;
    return estimate_constants(s, box, opt);
}

SprayField transform_spray(const SprayField& s, const ChartMap& m) {
    SprayField out;
    out.dim = s.dim;
    out.kind = s.kind;
    out.reversible = s.reversible;
    out.name = s.name + "~chart";
    auto H = s.H;
    auto domain = s.domain;
    out.H = [H, domain, m](const Vec& xt, const Vec& vt) {
        const Vec x = m.invert(xt);
        const Mat J = m.jacobian(x);
        Eigen::PartialPivLU<Mat> lu(J);
        if (std::abs(lu.determinant()) < 1e-14)
            throw Error(ErrorCode::singular_jacobian, "chart map Jacobian is singular");
        const Vec v = lu.solve(vt);
        if (domain && !domain->contains(x))
            throw Error(ErrorCode::domain_violation, "transformed spray evaluated outside the source chart box");
        Vec h = m.hessian(x).contract(v, v);
        if (v.squaredNorm() > 0.0) h += J * H(x, v);
        return h;
    };
    return out;
}

}  // namespace lipspray
