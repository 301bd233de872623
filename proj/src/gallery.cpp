#include "lipspray/gallery.hpp"

#include <json.hpp>

#include <Eigen/Geometry>

#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

namespace lipspray {

std::string_view to_string(EntryKind k) {
    switch (k) {
    case EntryKind::spray: return "spray";
    case EntryKind::christoffel: return "christoffel";
    case EntryKind::finsler_tensor: return "finsler";
    }
    return "unknown";
}

namespace {

constexpr double kPi = std::numbers::pi;

double param(const Params& p, const std::string& key, double fallback) {
    const auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

int dim_param(const Params& p, double fallback) {
    const double n = param(p, "n", fallback);
    if (n != std::floor(n) || n < 1 || n > kMaxDim)
        throw Error(ErrorCode::invalid_params, "dimension must be an integer in [1, " + std::to_string(kMaxDim) + "]");
    return static_cast<int>(n);
}

void check_known(const Params& p, std::initializer_list<const char*> keys, const std::string& name) {
    for (const auto& [k, v] : p) {
        bool ok = false;
        for (const char* key : keys) ok = ok || k == key;
        if (!ok) throw Error(ErrorCode::invalid_params, "unknown parameter '" + k + "' for " + name);
    }
}

void straight_line_oracle(Geometry& g, bool lorentz) {
    g.has_oracle = true;
    g.oracle_geodesic = [](const Vec& x0, const Vec& v0, double t) { return std::pair<Vec, Vec>{x0 + t * v0, v0}; };
    g.oracle_squared_distance = [lorentz](const Vec& p, const Vec& q) {
        const Vec d = q - p;
        double s = d.squaredNorm();
        if (lorentz) s -= 2.0 * d[0] * d[0];
        return s;
    };
}

FundamentalTensor constant_tensor(const Mat& G, Signature sig, const std::string& name) {
    FundamentalTensor t;
    t.dim = static_cast<int>(G.rows());
    t.g = [G](const Vec&, const Vec&) { return G; };
    t.signature = sig;
    t.reversible = true;
    t.velocity_independent = true;
    const int n = t.dim;
    t.dg_dx = [n](const Vec&, const Vec&) {
        std::array<Mat, kMaxDim> d;
        for (int m = 0; m < n; ++m) d[m] = Mat::Zero(n, n);
        return d;
    };
    t.name = name;
    return t;
}

Geometry flat(const std::string& name, int n, bool lorentz) {
    Geometry g;
    g.name = name;
    g.kind = EntryKind::christoffel;
    g.params = {{"n", static_cast<double>(n)}};
    Mat G = Mat::Identity(n, n);
    if (lorentz) G(0, 0) = -1.0;
    g.signature = lorentz ? Signature::lorentzian : Signature::riemannian;
    g.tensor = constant_tensor(G, g.signature, name);
    ChristoffelField c;
    c.dim = n;
    c.gamma = [n](const Vec&) { return Christoffel(n); };
    c.name = name;
    g.christoffel = c;
    g.spray = connection_to_spray(c);
    g.center = Vec::Zero(n);
    g.radius = 1.0;
    straight_line_oracle(g, lorentz);
    return g;
}

Vec sphere_embed(double th, double ph) {
    return make_vec({std::sin(th) * std::cos(ph), std::sin(th) * std::sin(ph), std::cos(th)});
}

Geometry sphere(double R) {
    if (!(R > 0.0)) throw Error(ErrorCode::invalid_params, "sphere radius must be positive");
    Geometry g;
    g.name = "sphere";
    g.kind = EntryKind::christoffel;
    g.params = {{"radius", R}};
    g.signature = Signature::riemannian;
    const ChartBox domain{make_vec({kPi / 2, 0.0}), 1.5};

    FundamentalTensor t;
    t.dim = 2;
    t.g = [R](const Vec& x, const Vec&) {
        Mat G = Mat::Zero(2, 2);
        G(0, 0) = R * R;
        G(1, 1) = R * R * std::sin(x[0]) * std::sin(x[0]);
        return G;
    };
    t.dg_dx = [R](const Vec& x, const Vec&) {
        std::array<Mat, kMaxDim> d;
        d[0] = Mat::Zero(2, 2);
        d[0](1, 1) = 2.0 * R * R * std::sin(x[0]) * std::cos(x[0]);
        d[1] = Mat::Zero(2, 2);
        return d;
    };
    t.velocity_independent = true;
    t.domain = domain;
    t.name = "sphere";
    g.tensor = t;

    ChristoffelField c;
    c.dim = 2;
    c.gamma = [](const Vec& x) {
        Christoffel gam(2);
        gam(0, 1, 1) = -std::sin(x[0]) * std::cos(x[0]);
        gam(1, 0, 1) = gam(1, 1, 0) = std::cos(x[0]) / std::sin(x[0]);
        return gam;
    };
    c.domain = domain;
    c.name = "sphere";
    g.christoffel = c;
    g.spray = connection_to_spray(c);
    g.center = domain.center;
    g.radius = 0.8;

    g.has_oracle = true;
    g.oracle_geodesic = [](const Vec& x0, const Vec& v0, double t) {
        const double th = x0[0], ph = x0[1];
        const Vec E = sphere_embed(th, ph);
        const Vec Et = make_vec({std::cos(th) * std::cos(ph), std::cos(th) * std::sin(ph), -std::sin(th)});
        const Vec Ep = make_vec({-std::sin(th) * std::sin(ph), std::sin(th) * std::cos(ph), 0.0});
        const Vec w = Et * v0[0] + Ep * v0[1];
        const double om = w.norm();
        if (om == 0.0) return std::pair<Vec, Vec>{x0, v0};
        const Vec X = E * std::cos(om * t) + (w / om) * std::sin(om * t);
        const Vec Xd = -E * om * std::sin(om * t) + w * std::cos(om * t);
        const double rxy2 = X[0] * X[0] + X[1] * X[1];
        const double th1 = std::atan2(std::sqrt(rxy2), X[2]);
        const double ph1 = ph + std::remainder(std::atan2(X[1], X[0]) - ph, 2.0 * kPi);
        const double vth = -Xd[2] / std::sin(th1);
        const double vph = (X[0] * Xd[1] - X[1] * Xd[0]) / rxy2;
        return std::pair<Vec, Vec>{make_vec({th1, ph1}), make_vec({vth, vph})};
    };
    g.oracle_squared_distance = [R](const Vec& p, const Vec& q) {
        const Vec a = sphere_embed(p[0], p[1]);
        const Vec b = sphere_embed(q[0], q[1]);
        const Eigen::Vector3d a3(a[0], a[1], a[2]), b3(b[0], b[1], b[2]);
        const double arc = std::atan2(a3.cross(b3).norm(), a3.dot(b3));
        return R * R * arc * arc;
    };
    return g;
}

}  // namespace

CylinderProfile capped_cylinder_profile(double rho, double R) {
    const double s = rho / R;
    CylinderProfile p{};
    if (s >= kPi / 2) {
        const double r2 = rho * rho, r4 = r2 * r2, R2 = R * R;
        p.h = R2 / r2;
        p.k = 1.0 / r2 - R2 / r4;
        p.a = -2.0 * R2 / r4;
        p.b = -2.0 / r4 + 4.0 * R2 / (r4 * r2);
        return p;
    }
    double sinc2, ds_over_s, q, qp_over_s;
    if (s <= 0.5) {
        // sinc² = Σ c_k s^{2k}, c_k = (−1)^k 2^{2k+1}/(2k+2)!
        sinc2 = 1.0;
        ds_over_s = q = qp_over_s = 0.0;
        const double s2 = s * s;
        double fact = 2.0, pow2 = 2.0;
        double pw = 1.0;       // s^{2k-2}
        double pw_prev = 0.0;  // s^{2k-4}
        for (int k = 1; k <= 14; ++k) {
            pow2 *= 4.0;
            fact *= (2.0 * k + 1.0) * (2.0 * k + 2.0);
            const double ck = (k % 2 ? -1.0 : 1.0) * pow2 / fact;
            sinc2 += ck * pw * s2;
            ds_over_s += 2.0 * k * ck * pw;
            q -= ck * pw;
            if (k >= 2) qp_over_s -= (2.0 * k - 2.0) * ck * pw_prev;
            pw_prev = pw;
            pw *= s2;
        }
    } else {
        const double sinc = std::sin(s) / s;
        const double dsinc = (s * std::cos(s) - std::sin(s)) / (s * s);
        const double dsinc2 = 2.0 * sinc * dsinc;
        sinc2 = sinc * sinc;
        ds_over_s = dsinc2 / s;
        q = (1.0 - sinc2) / (s * s);
        const double qp = -dsinc2 / (s * s) - 2.0 * (1.0 - sinc2) / (s * s * s);
        qp_over_s = qp / s;
    }
    const double R2 = R * R;
    p.h = sinc2;
    p.a = ds_over_s / R2;
    p.k = q / R2;
    p.b = qp_over_s / (R2 * R2);
    return p;
}

namespace {

Mat cylinder_metric(const Vec& y, double R) {
    const auto p = capped_cylinder_profile(y.norm(), R);
    return p.h * Mat::Identity(2, 2) + p.k * y * y.transpose();
}

std::array<Mat, kMaxDim> cylinder_derivative(const Vec& y, double R) {
    const auto p = capped_cylinder_profile(y.norm(), R);
    std::array<Mat, kMaxDim> d;
    for (int m = 0; m < 2; ++m) {
        Mat D = p.a * y[m] * Mat::Identity(2, 2) + p.b * y[m] * y * y.transpose();
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) D(i, j) += p.k * ((i == m ? y[j] : 0.0) + (j == m ? y[i] : 0.0));
        d[m] = D;
    }
    return d;
}

Geometry from_tensor(const std::string& name, FundamentalTensor t, const Vec& center, double radius) {
    Geometry g;
    g.name = name;
    g.kind = EntryKind::christoffel;
    g.signature = t.signature;
    g.tensor = t;
    g.christoffel = levi_civita(t);
    g.spray = connection_to_spray(*g.christoffel);
    g.center = center;
    g.radius = radius;
    return g;
}

Geometry capped_cylinder(double R) {
    if (!(R > 0.0)) throw Error(ErrorCode::invalid_params, "cylinder radius must be positive");
    FundamentalTensor t;
    t.dim = 2;
    t.g = [R](const Vec& x, const Vec&) { return cylinder_metric(x, R); };
    t.dg_dx = [R](const Vec& x, const Vec&) { return cylinder_derivative(x, R); };
    t.velocity_independent = true;
    t.name = "capped_cylinder";
    Geometry g = from_tensor("capped_cylinder", t, make_vec({kPi * R / 2, 0.0}), 0.8 * R);
    g.params = {{"radius", R}};
    return g;
}

Geometry product_lorentz(double R) {
    if (!(R > 0.0)) throw Error(ErrorCode::invalid_params, "cylinder radius must be positive");
    FundamentalTensor t;
    t.dim = 3;
    t.signature = Signature::lorentzian;
    t.g = [R](const Vec& x, const Vec&) {
        Mat G = Mat::Zero(3, 3);
        G(0, 0) = -1.0;
        G.block(1, 1, 2, 2) = cylinder_metric(x.tail(2), R);
        return G;
    };
    t.dg_dx = [R](const Vec& x, const Vec&) {
        const auto dc = cylinder_derivative(x.tail(2), R);
        std::array<Mat, kMaxDim> d;
        d[0] = Mat::Zero(3, 3);
        for (int m = 0; m < 2; ++m) {
            d[m + 1] = Mat::Zero(3, 3);
            d[m + 1].block(1, 1, 2, 2) = dc[m];
        }
        return d;
    };
    t.velocity_independent = true;
    t.name = "product_lorentz";
    Geometry g = from_tensor("product_lorentz", t, make_vec({0.0, kPi * R / 2, 0.0}), 0.8 * R);
    g.params = {{"radius", R}};
    return g;
}

Geometry hartman_wintner(double al) {
    if (!(al > 0.0 && al < 1.0)) throw Error(ErrorCode::invalid_params, "Hölder exponent must lie in (0, 1)");
    // conformal factor λ = 1 + |y|^{1+α}
    auto lam = [al](const Vec& x) { return 1.0 + std::pow(std::abs(x[1]), 1.0 + al); };
    auto lam_y = [al](const Vec& x) {
        const double y = x[1];
        return (1.0 + al) * std::pow(std::abs(y), al) * (y > 0 ? 1.0 : (y < 0 ? -1.0 : 0.0));
    };
    FundamentalTensor t;
    t.dim = 2;
    t.g = [lam](const Vec& x, const Vec&) { return Mat(lam(x) * Mat::Identity(2, 2)); };
    t.dg_dx = [lam_y](const Vec& x, const Vec&) {
        std::array<Mat, kMaxDim> d;
        d[0] = Mat::Zero(2, 2);
        d[1] = lam_y(x) * Mat::Identity(2, 2);
        return d;
    };
    t.velocity_independent = true;
    t.name = "hartman_wintner";

    ChristoffelField c;
    c.dim = 2;
    c.name = "hartman_wintner";
    c.gamma = [lam, lam_y](const Vec& x) {
        const double dl[2] = {0.0, lam_y(x)};
        const double inv = 1.0 / (2.0 * lam(x));
        Christoffel gam(2);
        for (int mu = 0; mu < 2; ++mu)
            for (int a = 0; a < 2; ++a)
                for (int b = 0; b < 2; ++b)
                    gam(mu, a, b) = inv * ((mu == a ? dl[b] : 0.0) + (mu == b ? dl[a] : 0.0) - (a == b ? dl[mu] : 0.0));
        return gam;
    };

    Geometry g;
    g.name = "hartman_wintner";
    g.kind = EntryKind::christoffel;
    g.params = {{"alpha", al}};
    g.tensor = t;
    g.christoffel = c;
    g.spray = connection_to_spray(c);
    g.center = Vec::Zero(2);
    g.radius = 0.5;
    return g;
}

Geometry randers(double b0, double b1, double curl) {
    const Vec base = make_vec({b0, b1});
    if (!(base.norm() < 1.0)) throw Error(ErrorCode::invalid_params, "Randers drift must have Euclidean norm < 1");
    // b(x) = base + curl·(−x₂, x₁); |b| < 1 on the domain ball
    std::optional<ChartBox> domain;
    if (curl != 0.0) domain = ChartBox{Vec::Zero(2), 0.99 * (1.0 - base.norm()) / std::abs(curl)};

    auto drift = [base, curl](const Vec& x) { return Vec(base + curl * make_vec({-x[1], x[0]})); };
    FundamentalTensor t;
    t.dim = 2;
    t.reversible = false;
    t.g = [drift](const Vec& x, const Vec& v) {
        const double nv = v.norm();
        const Vec l = v / nv;
        const Vec b = drift(x);
        const double F = nv + b.dot(v);
        const Mat P = Mat::Identity(2, 2) - l * l.transpose();
        const Vec lb = l + b;
        return Mat(F / nv * P + lb * lb.transpose());
    };
    t.dg_dx = [drift, curl](const Vec& x, const Vec& v) {
        const double nv = v.norm();
        const Vec l = v / nv;
        const Vec lb = l + drift(x);
        const Mat P = Mat::Identity(2, 2) - l * l.transpose();
        std::array<Mat, kMaxDim> d;
        const Vec db[2] = {make_vec({0.0, curl}), make_vec({-curl, 0.0})};
        for (int m = 0; m < 2; ++m)
            d[m] = (db[m].dot(v) / nv) * P + db[m] * lb.transpose() + lb * db[m].transpose();
        return d;
    };
    t.domain = domain;
    t.name = "randers";

    Geometry g;
    g.name = "randers";
    g.kind = EntryKind::finsler_tensor;
    g.params = {{"b0", b0}, {"b1", b1}, {"curl", curl}};
    g.tensor = t;
    g.spray = finsler_spray(t);
    g.center = Vec::Zero(2);
    g.radius = 0.8;
    return g;
}

}  // namespace

std::vector<std::string> gallery_names() {
    return {"euclidean", "minkowski", "sphere", "capped_cylinder", "hartman_wintner", "randers", "product_lorentz"};
}

Geometry build_gallery(const std::string& name, const Params& params) {
    Geometry g;
    if (name == "euclidean") {
        check_known(params, {"n"}, name);
        g = flat(name, dim_param(params, 2), false);
    } else if (name == "minkowski") {
        check_known(params, {"n"}, name);
        const int n = dim_param(params, 2);
        if (n < 2) throw Error(ErrorCode::invalid_params, "Minkowski space needs dimension ≥ 2");
        g = flat(name, n, true);
    } else if (name == "sphere") {
        check_known(params, {"radius"}, name);
        g = sphere(param(params, "radius", 1.0));
    } else if (name == "capped_cylinder") {
        check_known(params, {"radius"}, name);
        g = capped_cylinder(param(params, "radius", 1.0));
    } else if (name == "hartman_wintner") {
        check_known(params, {"alpha"}, name);
        g = hartman_wintner(param(params, "alpha", 0.5));
    } else if (name == "randers") {
        check_known(params, {"b0", "b1", "curl"}, name);
        g = randers(param(params, "b0", 0.3), param(params, "b1", 0.0), param(params, "curl", 0.2));
    } else if (name == "product_lorentz") {
        check_known(params, {"radius"}, name);
        g = product_lorentz(param(params, "radius", 1.0));
    } else {
        throw Error(ErrorCode::unknown_name, "no gallery entry named '" + name + "'");
    }
    return g;
}

Geometry geometry_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::invalid_params, std::string("geometry file is not valid JSON: ") + e.what());
    }
    if (!j.is_object() || !j.contains("gallery") || !j["gallery"].is_string())
        throw Error(ErrorCode::invalid_params, "geometry file needs a string field 'gallery'");
    Params params;
    if (j.contains("params")) {
        if (!j["params"].is_object()) throw Error(ErrorCode::invalid_params, "'params' must be an object");
        for (const auto& [k, v] : j["params"].items()) {
            if (!v.is_number()) throw Error(ErrorCode::invalid_params, "parameter '" + k + "' must be numeric");
            params[k] = v.get<double>();
        }
    }
    if (j.contains("dimension") && !params.count("n")) {
        const std::string gal = j["gallery"].get<std::string>();
        if (gal == "euclidean" || gal == "minkowski") params["n"] = j["dimension"].get<double>();
    }
    Geometry g = build_gallery(j["gallery"].get<std::string>(), params);
    if (j.contains("dimension") && j["dimension"].get<int>() != g.dim())
        throw Error(ErrorCode::invalid_params, "declared dimension does not match gallery entry '" + g.name + "'");
    if (j.contains("kind")) {
        const std::string kind = j["kind"].get<std::string>();
        const bool ok = kind == "spray" || (kind == "christoffel" && g.christoffel) || (kind == "finsler" && g.tensor);
        if (!ok) throw Error(ErrorCode::invalid_params, "gallery entry '" + g.name + "' cannot provide kind '" + kind + "'");
    }
    return g;
}

Geometry load_geometry(const std::string& name_or_path) {
    const auto names = gallery_names();
    if (std::find(names.begin(), names.end(), name_or_path) != names.end()) return build_gallery(name_or_path);
    std::ifstream in(name_or_path);
    if (!in) throw Error(ErrorCode::unknown_name, "'" + name_or_path + "' is neither a gallery name nor a readable file");
    std::stringstream ss;
    ss << in.rdbuf();
    return geometry_from_json(ss.str());
}

}  // namespace lipspray
