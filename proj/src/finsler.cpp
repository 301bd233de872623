#include "lipspray/finsler.hpp"

#include <algorithm>
#include <cmath>

namespace lipspray {

std::string_view to_string(Signature s) { return s == Signature::lorentzian ? "lorentzian" : "riemannian"; }

std::string_view to_string(CausalKind k) {
    switch (k) {
    case CausalKind::timelike: return "timelike";
    case CausalKind::lightlike: return "lightlike";
    case CausalKind::spacelike: return "spacelike";
    case CausalKind::zero: return "zero";
    }
    return "unknown";
}

std::string_view to_string(TimeDirection d) {
    switch (d) {
    case TimeDirection::future: return "future";
    case TimeDirection::past: return "past";
    case TimeDirection::none: return "none";
    }
    return "unknown";
}

Mat eval_tensor(const FundamentalTensor& g, const Vec& x, const Vec& v) {
    if (v.squaredNorm() == 0.0) {
        if (!g.velocity_independent)
            throw Error(ErrorCode::precondition, "fundamental tensor '" + g.name + "' is undefined at v = 0");
        Vec e = Vec::Zero(g.dim);
        e[0] = 1.0;
        return g.g(x, e);
    }
    return g.g(x, v);
}

std::array<Mat, kMaxDim> tensor_x_derivative(const FundamentalTensor& g, const Vec& x, const Vec& v) {
    if (g.dg_dx) return g.dg_dx(x, v);
    const int n = g.dim;
    const double h = std::max(1e-5, 1e-5 * x.norm());
    std::array<Mat, kMaxDim> out;
    for (int m = 0; m < n; ++m) {
        Vec xp = x, xm = x;
        xp[m] += h;
        xm[m] -= h;
        out[m] = (eval_tensor(g, xp, v) - eval_tensor(g, xm, v)) / (2.0 * h);
    }
    return out;
}

double lagrangian(const FundamentalTensor& g, const Vec& x, const Vec& v) {
    if (v.squaredNorm() == 0.0) return 0.0;
    return 0.5 * v.dot(eval_tensor(g, x, v) * v);
}

ProbeReport check_fundamental_identities(const FundamentalTensor& g, std::span<const std::pair<Vec, Vec>> samples,
                                         double tolerance, double h) {
    ProbeReport rep;
    rep.name = "fundamental-identities";
    rep.threshold = tolerance;
    double worst_contract = 0.0, worst_grad = 0.0, worst_hess = 0.0, worst_homog = 0.0;
    for (const auto& [x, v] : samples) {
        const int n = g.dim;
        const double hv = h * std::max(1.0, v.norm());
        const Mat G = eval_tensor(g, x, v);

        // vertical derivatives of g contracted with v on either slot
        std::array<Mat, kMaxDim> dg;
        for (int a = 0; a < n; ++a) {
            Vec vp = v, vm = v;
            vp[a] += hv;
            vm[a] -= hv;
            dg[a] = (g.g(x, vp) - g.g(x, vm)) / (2.0 * hv);
        }
        double contract = 0.0;
        for (int mu = 0; mu < n; ++mu)
            for (int a = 0; a < n; ++a) {
                double s1 = 0.0, s2 = 0.0;
                for (int nu = 0; nu < n; ++nu) {
                    s1 += dg[a](mu, nu) * v[nu];
                    s2 += dg[nu](mu, a) * v[nu];
                }
                contract = std::max({contract, std::abs(s1), std::abs(s2)});
            }

        // ∂L/∂v = g v
        const Vec gv = G * v;
        double grad = 0.0;
        for (int mu = 0; mu < n; ++mu) {
            Vec vp = v, vm = v;
            vp[mu] += hv;
            vm[mu] -= hv;
            const double d = (lagrangian(g, x, vp) - lagrangian(g, x, vm)) / (2.0 * hv);
            grad = std::max(grad, std::abs(d - gv[mu]));
        }

        // ∂²L/∂v² = g; a larger step keeps rounding below truncation
        const double h2 = 10.0 * hv;
        const double L0 = lagrangian(g, x, v);
        double hess = 0.0;
        for (int mu = 0; mu < n; ++mu)
            for (int nu = 0; nu < n; ++nu) {
                double d;
                if (mu == nu) {
                    Vec vp = v, vm = v;
                    vp[mu] += h2;
                    vm[mu] -= h2;
                    d = (lagrangian(g, x, vp) - 2.0 * L0 + lagrangian(g, x, vm)) / (h2 * h2);
                } else {
                    Vec vpp = v, vpm = v, vmp = v, vmm = v;
                    vpp[mu] += h2, vpp[nu] += h2;
                    vpm[mu] += h2, vpm[nu] -= h2;
                    vmp[mu] -= h2, vmp[nu] += h2;
                    vmm[mu] -= h2, vmm[nu] -= h2;
                    d = (lagrangian(g, x, vpp) - lagrangian(g, x, vpm) - lagrangian(g, x, vmp) +
                         lagrangian(g, x, vmm)) /
                        (4.0 * h2 * h2);
                }
                hess = std::max(hess, std::abs(d - G(mu, nu)));
            }

        double homog = 0.0;
        for (double s : {0.5, 3.0}) homog = std::max(homog, (g.g(x, Vec(s * v)) - G).cwiseAbs().maxCoeff());

        worst_contract = std::max(worst_contract, contract);
        worst_grad = std::max(worst_grad, grad);
        worst_hess = std::max(worst_hess, hess);
        worst_homog = std::max(worst_homog, homog);
        rep.record(std::max({contract, grad, hess, homog}));
    }
    rep.values["vertical_contraction"] = worst_contract;
    rep.values["lagrangian_gradient"] = worst_grad;
    rep.values["lagrangian_hessian"] = worst_hess;
    rep.values["zero_homogeneity"] = worst_homog;
    rep.finalize();
    return rep;
}

namespace {

Eigen::PartialPivLU<Mat> checked_lu(const Mat& G, const std::string& name) {
    Eigen::PartialPivLU<Mat> lu(G);
    const double scale = std::pow(std::max(G.cwiseAbs().maxCoeff(), 1e-300), G.rows());
    if (!(std::abs(lu.determinant()) > 1e-14 * scale))
        throw Error(ErrorCode::singular_tensor, "fundamental tensor '" + name + "' is singular");
    return lu;
}

}  // namespace

SprayField finsler_spray(const FundamentalTensor& g) {
    SprayField s;
    s.dim = g.dim;
    s.kind = SprayKind::finsler_derived;
    s.reversible = g.reversible;
    s.domain = g.domain;
    s.name = g.name;
    s.H = [g](const Vec& x, const Vec& v) {
        const int n = g.dim;
        const Mat G = eval_tensor(g, x, v);
        const auto lu = checked_lu(G, g.name);
        const auto dg = tensor_x_derivative(g, x, v);
        Vec rhs = Vec::Zero(n);
        for (int nu = 0; nu < n; ++nu) rhs[nu] = -v.dot(dg[nu] * v);
        for (int b = 0; b < n; ++b) rhs += 2.0 * v[b] * (dg[b] * v);
        return Vec(-0.5 * lu.solve(rhs));
    };
    return s;
}

ChristoffelField levi_civita(const FundamentalTensor& g) {
    if (!g.velocity_independent)
        throw Error(ErrorCode::precondition, "Levi-Civita symbols need a velocity-independent tensor");
    ChristoffelField c;
    c.dim = g.dim;
    c.domain = g.domain;
    c.name = g.name;
    c.gamma = [g](const Vec& x) {
        const int n = g.dim;
        Vec e = Vec::Zero(n);
        e[0] = 1.0;
        const Mat G = g.g(x, e);
        const Mat Ginv = checked_lu(G, g.name).inverse();
        const auto dg = tensor_x_derivative(g, x, e);
        Christoffel gam(n);
        for (int mu = 0; mu < n; ++mu)
            for (int a = 0; a < n; ++a)
                for (int b = a; b < n; ++b) {
                    double s = 0.0;
                    for (int nu = 0; nu < n; ++nu)
                        s += Ginv(mu, nu) * (dg[a](nu, b) + dg[b](nu, a) - dg[nu](a, b));
                    gam(mu, a, b) = 0.5 * s;
                    gam(mu, b, a) = 0.5 * s;
                }
        return gam;
    };
    return c;
}

TimeOrientation default_time_orientation(int n) {
    return TimeOrientation{[n](const Vec&) {
        Vec t = Vec::Zero(n);
        t[0] = 1.0;
        return t;
    }};
}

CausalClass classify_vector(const FundamentalTensor& g, const TimeOrientation& T, const Vec& x, const Vec& v,
                            double tol_scale) {
    CausalClass out;
    const double vv = v.squaredNorm();
    if (vv == 0.0) return out;
    const Mat G = g.g(x, v);
    const double q = v.dot(G * v);
    const double band = tol_scale * vv;
    if (std::abs(q) <= band) {
        if (std::sqrt(vv) >= 1e8)
            throw Error(ErrorCode::ambiguous_classification,
                        "vector of norm " + std::to_string(std::sqrt(vv)) + " lies in the lightlike band");
        out.kind = CausalKind::lightlike;
    } else {
        out.kind = q < 0.0 ? CausalKind::timelike : CausalKind::spacelike;
    }
    if (g.signature == Signature::lorentzian && out.kind != CausalKind::spacelike) {
        const double s = v.dot(G * T.T(x));
        out.orientation = s < 0.0 ? TimeDirection::future : TimeDirection::past;
    }
    return out;
}

double curve_length(const FundamentalTensor& g, const Curve& c, LengthKind kind, double tol) {
    auto integrand = [&](double t) {
        const Vec x = c.position(t);
        const Vec v = c.velocity(t);
        if (v.squaredNorm() == 0.0) return 0.0;
        const double q = v.dot(g.g(x, v) * v);
        if (kind == LengthKind::lorentzian) {
            if (q > 1e-9 * v.squaredNorm())
                throw Error(ErrorCode::noncausal_tangent,
                            "spacelike tangent at t=" + std::to_string(t) + " (g(v,v)=" + std::to_string(q) + ")");
            return std::sqrt(std::max(0.0, -q));
        }
        return std::sqrt(std::max(0.0, q));
    };
    auto simpson = [&](int N, std::vector<double>& f) {
        const double h = (c.b - c.a) / N;
        if (f.empty()) {
            f.resize(N + 1);
            for (int i = 0; i <= N; ++i) f[i] = integrand(c.a + i * h);
        } else {
            std::vector<double> g2(N + 1);
            for (int i = 0; i <= N; ++i) g2[i] = (i % 2 == 0) ? f[i / 2] : integrand(c.a + i * h);
            f.swap(g2);
        }
        double s = f[0] + f[N];
        for (int i = 1; i < N; ++i) s += (i % 2 ? 4.0 : 2.0) * f[i];
        return s * h / 3.0;
    };
    std::vector<double> f;
    int N = 16;
    double prev = simpson(N, f);
    for (int level = 0; level < 14; ++level) {
        N *= 2;
        const double cur = simpson(N, f);
        if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    return prev;
}

ProbeReport reverse_cauchy_schwarz_check(const FundamentalTensor& g, const Vec& x, const Vec& v1, const Vec& v2,
                                         double tolerance) {
    ProbeReport rep;
    rep.name = "reverse-cauchy-schwarz";
    rep.threshold = tolerance;
    const auto T = default_time_orientation(g.dim);
    for (const Vec* v : {&v1, &v2}) {
        const auto cls = classify_vector(g, T, x, *v);
        if (cls.kind == CausalKind::spacelike || cls.kind == CausalKind::zero ||
            cls.orientation != TimeDirection::future) {
            rep.notes.push_back("precondition: vectors must be future-directed causal");
            rep.failures = 1;
            rep.samples = 1;
            rep.passed = false;
            return rep;
        }
    }
    const Mat G1 = g.g(x, v1);
    const Mat G2 = g.g(x, v2);
    const double lhs = -v1.dot(G1 * v2);
    const double rhs = std::sqrt(std::max(0.0, -v1.dot(G1 * v1))) * std::sqrt(std::max(0.0, -v2.dot(G2 * v2)));
    const double cross = std::abs(v1.normalized().dot(v2.normalized()));
    const bool proportional = std::abs(1.0 - cross) <= 1e-14;
    rep.values["lhs"] = lhs;
    rep.values["rhs"] = rhs;
    rep.values["proportional"] = proportional ? 1.0 : 0.0;
    // violation amount; proportional pairs must also attain equality
    const double scale = std::max(1.0, std::abs(rhs));
    rep.record((rhs - lhs) / scale);
    if (proportional) rep.record(std::abs(lhs - rhs) / scale);
    rep.finalize();
    return rep;
}

}  // namespace lipspray
