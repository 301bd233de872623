#include "lipspray/gallery.hpp"
#include "lipspray/spray.hpp"

#include <doctest.h>

#include <cmath>

using namespace lipspray;

namespace {

/// Γ¹₁₁ = 1, every other symbol zero: H(x, v) = (−v₁², 0).
ChristoffelField single_symbol() {
    ChristoffelField c;
    c.dim = 2;
    c.gamma = [](const Vec&) {
        Christoffel g(2);
        g(0, 0, 0) = 1.0;
        return g;
    };
    c.name = "single";
    return c;
}

SprayField flat_spray(int n) {
    SprayField s;
    s.dim = n;
    s.H = [n](const Vec&, const Vec&) { return Vec(Vec::Zero(n)); };
    s.reversible = true;
    s.name = "flat";
    return s;
}

}  // namespace

TEST_CASE("connection spray is minus the Christoffel contraction") {
    const SprayField s = connection_to_spray(single_symbol());
    CHECK(s.kind == SprayKind::connection);
    CHECK(s.reversible);
    const Vec h = eval_spray(s, make_vec({0.3, -0.2}), make_vec({0.5, 2.0}));
    CHECK(h[0] == doctest::Approx(-0.25));
    CHECK(h[1] == 0.0);
    CHECK(eval_spray(s, make_vec({0.0, 0.0}), make_vec({0.0, 0.0})).norm() == 0.0);
}

TEST_CASE("euclidean gallery spray vanishes") {
    const Geometry g = build_gallery("euclidean");
    CHECK(g.dim() == 2);
    CHECK(eval_spray(g.spray, make_vec({0.1, 0.4}), make_vec({3.0, -1.0})).norm() == 0.0);
}

TEST_CASE("reverse spray flips the velocity argument") {
    SprayField s;
    s.dim = 1;
    s.H = [](const Vec& x, const Vec& v) { return Vec(x * std::abs(v[0]) * v[0]); };
    const SprayField r = reverse_spray(s);
    const Vec x = make_vec({2.0}), v = make_vec({0.5});
    CHECK(eval_spray(r, x, v)[0] == doctest::Approx(-0.5));
    CHECK(eval_spray(s, x, v)[0] == doctest::Approx(0.5));
}

TEST_CASE("domain violations are reported") {
    SprayField s = flat_spray(2);
    s.domain = ChartBox{make_vec({0.0, 0.0}), 1.0};
    CHECK_NOTHROW(eval_spray(s, make_vec({0.5, 0.5}), make_vec({1.0, 0.0})));
    try {
        eval_spray(s, make_vec({1.0, 1.0}), make_vec({1.0, 0.0}));
        FAIL("expected a domain violation");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::domain_violation);
    }
}

TEST_CASE("homogeneity check separates degree two from degree one") {
    std::vector<std::pair<Vec, Vec>> samples{{make_vec({1.4, 0.1}), make_vec({0.3, 0.7})},
                                             {make_vec({1.7, -0.2}), make_vec({-0.5, 0.2})}};
    const std::vector<double> scales{0.5, 2.0, 3.0};
    const Geometry sphere = build_gallery("sphere");
    CHECK(check_homogeneity(sphere.spray, samples, scales).passed);

    SprayField linear;
    linear.dim = 2;
    linear.H = [](const Vec&, const Vec& v) { return v; };
    const ProbeReport bad = check_homogeneity(linear, samples, scales);
    CHECK_FALSE(bad.passed);
    CHECK(bad.failures > 0);
}

TEST_CASE("estimates of a constant quadratic spray") {
    const SprayField s = connection_to_spray(single_symbol());
    const LipschitzEstimate est = estimate_constants(s, ChartBox{make_vec({0.0, 0.0}), 1.0}, 8);
    CHECK(est.alpha == doctest::Approx(0.0));
    // sup over unit e of e₁² is attained on the first axis
    CHECK(est.M == doctest::Approx(1.0));
    // |a₁² − b₁²| / |a − b| ≤ |a₁ + b₁| < 2 on the unit ball
    CHECK(est.beta <= 2.0);
    CHECK(est.beta > 1.5);
}

TEST_CASE("flat spray estimates vanish") {
    const LipschitzEstimate est = estimate_constants(flat_spray(3), ChartBox{Vec::Zero(3), 0.5}, 8);
    CHECK(est.alpha == 0.0);
    CHECK(est.beta == 0.0);
    CHECK(est.M == 0.0);
}

TEST_CASE("sphere M is bounded by the closed-form supremum") {
    const Geometry g = build_gallery("sphere");
    const LipschitzEstimate est = estimate_constants(g.spray, g.box());
    // brute force of |H(θ, e)|² = sin²θcos²θ e_φ⁴ + 4cot²θ e_θ² e_φ² over the ball
    double sup = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double th = M_PI / 2 - g.radius + 2.0 * g.radius * i / 400.0;
        for (int k = 0; k < 720; ++k) {
            const double a = M_PI * k / 360.0;
            const double et = std::cos(a), ep = std::sin(a);
            const double h1 = std::sin(th) * std::cos(th) * ep * ep;
            const double h2 = -2.0 * std::cos(th) / std::sin(th) * et * ep;
            sup = std::max(sup, std::hypot(h1, h2));
        }
    }
    CHECK(est.M <= sup * (1.0 + 1e-9));
    CHECK(est.M >= 0.9 * sup);
}

TEST_CASE("Hölder sprays are refused") {
    const Geometry hw = build_gallery("hartman_wintner", {{"alpha", 0.5}});
    try {
        estimate_constants(hw.spray, hw.box());
        FAIL("expected an unbounded estimate");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::unbounded_estimate);
        CHECK(std::string(e.what()).find("unbounded-estimate") == 0);
    }

    SprayField root;
    root.dim = 2;
    root.H = [](const Vec& x, const Vec& v) {
        return Vec(make_vec({-std::sqrt(std::abs(x[0])) * v.squaredNorm(), 0.0}));
    };
    CHECK_THROWS_AS(estimate_constants(root, ChartBox{make_vec({0.0, 0.0}), 0.5}), Error);

    EstimateOptions lax;
    lax.detect_holder = false;
    CHECK_NOTHROW(estimate_constants(root, ChartBox{make_vec({0.0, 0.0}), 0.5}, lax));

    const Geometry sphere = build_gallery("sphere");
    CHECK_NOTHROW(estimate_constants(sphere.spray, sphere.box()));
}

TEST_CASE("spray transformation under a shear") {
    // x̃ = (x₁, x₂ + x₁²) sends straight lines to curves with x̃'' = (0, 2ẋ₁²)
    ChartMap m;
    m.dim = 2;
    m.forward = [](const Vec& x) { return Vec(make_vec({x[0], x[1] + x[0] * x[0]})); };
    m.jacobian = [](const Vec& x) {
        Mat J(2, 2);
        J << 1.0, 0.0, 2.0 * x[0], 1.0;
        return J;
    };
    m.hessian = [](const Vec&) {
        Christoffel h(2);
        h(1, 0, 0) = 2.0;
        return h;
    };
    const SprayField t = transform_spray(flat_spray(2), m);
    const Vec h = eval_spray(t, make_vec({0.4, 0.9}), make_vec({0.3, -1.2}));
    CHECK(h[0] == doctest::Approx(0.0));
    CHECK(h[1] == doctest::Approx(2.0 * 0.09));
    // Newton inverse
    const Vec x = m.invert(make_vec({0.4, 0.9}));
    CHECK(x[0] == doctest::Approx(0.4));
    CHECK(x[1] == doctest::Approx(0.9 - 0.16));
}

TEST_CASE("spray transformation under a linear chart") {
    Mat A(2, 2);
    A << 2.0, 1.0, 0.0, 1.0;
    const SprayField s = connection_to_spray(single_symbol());
    const SprayField t = transform_spray(s, linear_chart(A, make_vec({0.1, 0.2})));
    const Vec vt = make_vec({1.0, 0.5});
    const Vec v = A.inverse() * vt;
    const Vec expect = A * make_vec({-v[0] * v[0], 0.0});
    const Vec got = eval_spray(t, make_vec({0.3, 0.3}), vt);
    CHECK((got - expect).norm() < 1e-14);
}

TEST_CASE("sampling helpers") {
    for (int n : {1, 2, 3, 4}) {
        const auto dirs = unit_directions(n, 16);
        CHECK(dirs.size() == (n == 1 ? 2u : 16u));
        for (const auto& d : dirs) CHECK(d.norm() == doctest::Approx(1.0));
    }
    const ChartBox box{make_vec({1.0, -1.0}), 0.5};
    const auto pts = ball_grid(box, 8);
    CHECK(!pts.empty());
    for (const auto& p : pts) CHECK(box.contains(p));
}
