#include "lipspray/convexity.hpp"
#include "lipspray/gallery.hpp"

#include <doctest.h>

#include <cmath>

using namespace lipspray;

namespace {

FundamentalTensor constant_metric(const Mat& G, Signature sig) {
    FundamentalTensor t;
    t.dim = static_cast<int>(G.rows());
    t.g = [G](const Vec&, const Vec&) { return G; };
    t.signature = sig;
    t.velocity_independent = true;
    return t;
}

}  // namespace

TEST_CASE("normalized chart on the sphere") {
    const Geometry g = build_gallery("sphere");
    const Vec p = make_vec({1.2, 0.3});
    const NormalizedChart chart = normalize_chart_at(*g.tensor, *g.christoffel, p);
    CHECK(chart.map.forward(p).norm() < 1e-15);
    // g(b_i, b_j) = δ_ij
    const Mat G = eval_tensor(*g.tensor, p, Vec::Zero(2));
    CHECK((chart.basis.transpose() * G * chart.basis - Mat::Identity(2, 2)).norm() < 1e-14);
    // moved metric is the identity at the origin and the moved spray vanishes there
    const FundamentalTensor gt = transform_tensor(*g.tensor, chart.map);
    CHECK((eval_tensor(gt, Vec::Zero(2), Vec::Zero(2)) - Mat::Identity(2, 2)).norm() < 1e-13);
    const SprayField st = transform_spray(g.spray, chart.map);
    for (const Vec& v : {make_vec({1.0, 0.0}), make_vec({0.3, -0.8}), make_vec({-0.5, 2.0})})
        CHECK(eval_spray(st, Vec::Zero(2), v).norm() < 1e-12);
    // away from the origin the curvature is still there
    CHECK(eval_spray(st, make_vec({0.2, 0.1}), make_vec({0.0, 1.0})).norm() > 1e-3);
    // forward and inverse agree
    const Vec x = p + make_vec({0.05, -0.07});
    CHECK((chart.map.invert(chart.map.forward(x)) - x).norm() < 1e-13);
}

TEST_CASE("normalized chart in Lorentzian signature") {
    const Geometry g = build_gallery("product_lorentz");
    const Vec p = g.center + make_vec({0.1, -0.05, 0.2});
    const NormalizedChart chart = normalize_chart_at(*g.tensor, *g.christoffel, p);
    CHECK(chart.signature == Signature::lorentzian);
    const FundamentalTensor gt = transform_tensor(*g.tensor, chart.map);
    Mat eta = Mat::Identity(3, 3);
    eta(0, 0) = -1.0;
    CHECK((eval_tensor(gt, Vec::Zero(3), Vec::Zero(3)) - eta).norm() < 1e-13);
    const SprayField st = transform_spray(g.spray, chart.map);
    CHECK(eval_spray(st, Vec::Zero(3), make_vec({1.0, 0.4, -0.3})).norm() < 1e-12);
}

TEST_CASE("connection-only normalization keeps the axes") {
    const Geometry g = build_gallery("sphere");
    const Vec p = make_vec({1.2, 0.3});
    const NormalizedChart chart = normalize_chart_at(*g.christoffel, p);
    CHECK((chart.linear - Mat::Identity(2, 2)).norm() == 0.0);
    const SprayField st = transform_spray(g.spray, chart.map);
    CHECK(eval_spray(st, Vec::Zero(2), make_vec({0.6, 0.8})).norm() < 1e-12);
    CHECK_THROWS_AS(normalize_chart_at(*build_gallery("randers").tensor, *g.christoffel, p), Error);
}

TEST_CASE("degenerate and wrong-signature metrics are refused") {
    ChristoffelField flat;
    flat.dim = 2;
    flat.gamma = [](const Vec&) { return Christoffel(2); };
    Mat G = Mat::Identity(2, 2);
    G(1, 1) = 0.0;
    auto code_of = [&](const FundamentalTensor& t) {
        try {
            normalize_chart_at(t, flat, Vec::Zero(2));
        } catch (const Error& e) {
            return e.code();
        }
        return ErrorCode::precondition;
    };
    CHECK(code_of(constant_metric(G, Signature::riemannian)) == ErrorCode::degenerate_metric);
    Mat M = Mat::Identity(2, 2);
    M(0, 0) = -1.0;
    CHECK(code_of(constant_metric(M, Signature::riemannian)) == ErrorCode::degenerate_metric);
    CHECK(code_of(constant_metric(Mat::Identity(2, 2), Signature::lorentzian)) == ErrorCode::degenerate_metric);
    // timelike axis second: the Gram–Schmidt order fails and the eigen fallback is used
    Mat S(2, 2);
    S << 1.0, 0.0, 0.0, -1.0;
    const NormalizedChart c = normalize_chart_at(constant_metric(S, Signature::lorentzian), flat, Vec::Zero(2));
    const Mat N = c.basis.transpose() * S * c.basis;
    CHECK(N(0, 0) == doctest::Approx(-1.0));
    CHECK(N(1, 1) == doctest::Approx(1.0));
    CHECK(std::abs(N(0, 1)) < 1e-14);
}

TEST_CASE("tensor transformation under a linear chart") {
    Mat G(2, 2);
    G << 2.0, 0.5, 0.5, 1.0;
    Mat A(2, 2);
    A << 1.0, 2.0, 0.0, 3.0;
    const FundamentalTensor gt = transform_tensor(constant_metric(G, Signature::riemannian),
                                                  linear_chart(A, Vec::Zero(2)));
    const Mat Ai = A.inverse();
    CHECK((eval_tensor(gt, make_vec({0.3, 0.1}), make_vec({1.0, 1.0})) - Ai.transpose() * G * Ai).norm() < 1e-14);
}

TEST_CASE("z functional") {
    const Geometry e = build_gallery("euclidean");
    CHECK(z_functional(e.spray, Vec::Zero(2), make_vec({0.3, 0.2}), make_vec({1.0, 0.0}), 1) == 1.0);
    // single symbol Γ¹₁₁ = 1: z± = 1 − x₁ e₁²
    ChristoffelField c;
    c.dim = 2;
    c.gamma = [](const Vec&) {
        Christoffel g(2);
        g(0, 0, 0) = 1.0;
        return g;
    };
    const SprayField s = connection_to_spray(c);
    const Vec e1 = make_vec({0.6, 0.8});
    CHECK(z_functional(s, Vec::Zero(2), make_vec({0.5, 0.0}), e1, 1) == doctest::Approx(1.0 - 0.5 * 0.36));
    CHECK(z_functional(s, Vec::Zero(2), make_vec({0.5, 0.0}), e1, -1) == doctest::Approx(1.0 - 0.5 * 0.36));
}

TEST_CASE("certificates") {
    const Geometry e = build_gallery("euclidean");
    const ConvexityCertificate flat = certify_ball(e.spray, e.center, 1.0);
    CHECK(flat.status == CertStatus::certified_sampled);
    CHECK(flat.delta_ball == doctest::Approx(0.45));
    CHECK(flat.z_min_plus == 1.0);
    CHECK(to_string(flat.status) == "certified-sampled");

    const Geometry s = build_gallery("sphere");
    const ConvexityCertificate sc = certify_ball(s.spray, s.center, s.radius);
    CHECK(sc.status == CertStatus::certified_sampled);
    CHECK(sc.delta_ball > 0.1);
    CHECK(sc.delta_ball < s.radius);
    CHECK(sc.z_min_plus > 0.0);
    CHECK(sc.z_min_minus > 0.0);

    const Geometry hw = build_gallery("hartman_wintner", {{"alpha", 0.5}});
    try {
        certify_ball(hw.spray, hw.center, hw.radius);
        FAIL("expected an unbounded estimate");
    } catch (const Error& err) {
        CHECK(err.code() == ErrorCode::unbounded_estimate);
    }
}

TEST_CASE("random pairs are reproducible and inside the ball") {
    const Vec p = make_vec({1.0, 2.0, 3.0});
    const auto a = random_pairs(p, 0.5, 40, 9);
    const auto b = random_pairs(p, 0.5, 40, 9);
    REQUIRE(a.size() == 40);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK((a[i].a - p).norm() < 0.5);
        CHECK((a[i].b - p).norm() < 0.5);
        CHECK(a[i].a == b[i].a);
    }
    CHECK(random_pairs(p, 0.5, 40, 10)[0].a != a[0].a);
}

TEST_CASE("containment on certified balls") {
    for (const char* name : {"euclidean", "sphere", "randers"}) {
        CAPTURE(name);
        const Geometry g = build_gallery(name);
        const ConvexityCertificate cert = certify_ball(g.spray, g.center, g.radius);
        const auto pairs = random_pairs(g.center, cert.delta_ball, 20, 1);
        const ProbeReport rep = containment_probe(cert, g.spray, pairs);
        CHECK(rep.passed);
        CHECK(rep.failures == 0);
        CHECK(rep.samples == 20);
        CHECK(rep.values.at("min_radius_second_derivative") > 0.0);
    }
}

TEST_CASE("position inequalities") {
    const Geometry g = build_gallery("sphere");
    const ConvexityCertificate cert = certify_ball(g.spray, g.center, g.radius);
    const NormalizedChart chart = normalize_chart_at(*g.tensor, *g.christoffel, g.center);
    PositionProbeOptions opt;
    opt.samples = 12;
    const ProbeReport rep = position_inequality_probe(cert, g.spray, &chart, opt);
    CHECK(rep.passed);
    CHECK(rep.values.at("passing_radius") > 0.0);

    const Geometry e = build_gallery("euclidean");
    const ConvexityCertificate flat = certify_ball(e.spray, e.center, 1.0);
    const ProbeReport fr = position_inequality_probe(flat, e.spray, nullptr, opt);
    CHECK(fr.passed);
    // straight lines have P(q1, q2) = q2 − q1, so only the smallness clause
    // ‖P‖ ≤ ε forces halving, down to 2ρ ≤ ε
    const std::string first = std::to_string(0.98 * flat.delta_ball);
    CHECK(fr.values.at("affine_deviation@" + first) < 1e-12);
    CHECK(fr.values.at("common_base@" + first) < 1e-12);
    CHECK(fr.values.at("four_point@" + first) < 1e-12);
    CHECK(fr.values.at("smallness@" + first) > 1.0);
    CHECK(fr.values.at("passing_radius") == doctest::Approx(0.98 * flat.delta_ball / 8.0));
}
