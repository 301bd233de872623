#include "lipspray/expmap.hpp"
#include "lipspray/gallery.hpp"
#include "lipspray/sampling.hpp"

#include <doctest.h>

#include <cmath>

using namespace lipspray;

namespace {

ConvexityConstants certified(const Geometry& g) {
    const LipschitzEstimate est = estimate_constants(g.spray, g.box());
    return compute_constants(est.alpha, est.beta, est.M, g.radius, 0.9, g.center);
}

}  // namespace

TEST_CASE("exp matches the great-circle oracle") {
    const Geometry g = build_gallery("sphere");
    const ConvexityConstants c = certified(g);
    for (int i = 0; i < 10; ++i) {
        Rng rng = sample_rng(11, i);
        const Vec p = random_in_ball(rng, g.center, 0.4 * c.delta);
        const Vec v = random_in_ball(rng, Vec::Zero(2), 0.5 * c.delta);
        const ExpResult e = exp_p(g.spray, c, p, v);
        const auto [qo, Po] = g.oracle_geodesic(p, v, 1.0);
        CHECK((e.q - qo).norm() < 1e-10);
        CHECK((e.P - Po).norm() < 1e-10);
        CHECK(e.pieces == 1);
    }
}

TEST_CASE("exp chains pieces for speeds near delta") {
    const Geometry g = build_gallery("sphere");
    const ConvexityConstants c = certified(g);
    const Vec v = make_vec({0.0, 1.5 * c.delta});
    const ExpResult e = exp_p(g.spray, c, g.center, v);
    CHECK(e.pieces == 2);
    // equator: φ(1) = |v|, constant velocity
    CHECK(e.q[0] == doctest::Approx(M_PI / 2).epsilon(1e-12));
    CHECK(e.q[1] == doctest::Approx(1.5 * c.delta).epsilon(1e-10));
    CHECK((e.P - v).norm() < 1e-10);
    CHECK(e.solution.t.back() == doctest::Approx(1.0));
    CHECK((e.solution.velocity_at(0.3) - v).norm() < 1e-9);
}

TEST_CASE("reference integrator option") {
    const Geometry g = build_gallery("sphere");
    const ConvexityConstants c = certified(g);
    const Vec v = make_vec({0.1, -0.1});
    const ExpResult a = exp_p(g.spray, c, g.center, v);
    const ExpResult b = exp_p(g.spray, c, g.center, v, {.integrator = Integrator::reference});
    CHECK((a.q - b.q).norm() < 1e-10);
}

TEST_CASE("log inverts exp on sphere and randers") {
    for (const char* name : {"sphere", "randers"}) {
        CAPTURE(name);
        const Geometry g = build_gallery(name);
        const ConvexityConstants c = certified(g);
        for (int i = 0; i < 8; ++i) {
            Rng rng = sample_rng(5, i);
            const Vec p = random_in_ball(rng, g.center, 0.5 * delta_geo(c));
            const Vec q = random_in_ball(rng, p, 0.9 * delta_geo(c));
            const LogResult l = log_p(g.spray, c, p, q, {.tol = 1e-12});
            CHECK(l.defect <= 1e-12);
            CHECK((exp_p(g.spray, c, p, l.v).q - q).norm() < 1e-11);
            CHECK((position_vector(g.spray, c, p, q, {.tol = 1e-12}) - l.exp.P).norm() < 1e-14);
        }
    }
}

TEST_CASE("log is the difference vector in flat space") {
    const Geometry g = build_gallery("euclidean", {{"n", 3}});
    const ConvexityConstants c = compute_constants(0.0, 0.0, 0.0, 1.0);
    const Vec p = make_vec({0.1, 0.0, -0.1}), q = make_vec({0.05, 0.03, -0.05});
    const LogResult l = log_p(g.spray, c, p, q);
    CHECK((l.v - (q - p)).norm() < 1e-15);
    CHECK(l.iterations == 1);
}

TEST_CASE("log refuses targets outside its ball") {
    const Geometry g = build_gallery("sphere");
    const ConvexityConstants c = certified(g);
    try {
        log_p(g.spray, c, g.center, Vec(g.center + make_vec({1.01 * delta_geo(c), 0.0})));
        FAIL("expected a precondition error");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::precondition);
    }
}

TEST_CASE("reverse exp equals exp of the opposite vector for connections") {
    for (const char* name : {"sphere", "capped_cylinder"}) {
        CAPTURE(name);
        const Geometry g = build_gallery(name);
        const ConvexityConstants c = certified(g);
        for (int i = 0; i < 4; ++i) {
            Rng rng = sample_rng(9, i);
            const Vec v = random_in_ball(rng, Vec::Zero(2), 0.5 * c.delta);
            const ExpResult r = reverse_exp_p(g.spray, c, g.center, v);
            const ExpResult e = exp_p(g.spray, c, g.center, Vec(-v));
            CHECK((r.q - e.q).norm() < 1e-8);
        }
    }
}

TEST_CASE("randers reverse exp differs from exp of the opposite vector") {
    const Geometry g = build_gallery("randers");
    const ConvexityConstants c = certified(g);
    double widest = 0.0;
    for (int i = 0; i < 8; ++i) {
        Rng rng = sample_rng(13, i);
        const Vec v = random_unit(rng, 2) * (0.5 * c.delta);
        const ExpResult r = reverse_exp_p(g.spray, c, g.center, v);
        widest = std::max(widest, (r.q - exp_p(g.spray, c, g.center, Vec(-v)).q).norm());
        // γ_v(−1) flows forward back to p with velocity v
        const ExpResult back = exp_p(g.spray, c, r.q, r.P);
        CHECK((back.q - g.center).norm() < 1e-9);
        CHECK((back.P - v).norm() < 1e-9);
    }
    CHECK(widest > 1e-4);
}

TEST_CASE("strong differential probe") {
    const std::vector<double> radii{0.2, 0.1, 0.05, 0.025};
    const Geometry s = build_gallery("sphere");
    const ConvexityConstants c = certified(s);
    const ProbeReport rep = strong_differential_probe(s.spray, c, s.center, radii);
    CHECK(rep.passed);
    for (std::size_t i = 1; i < radii.size(); ++i)
        CHECK(rep.values.at("slope@" + std::to_string(radii[i])) <=
              rep.values.at("slope@" + std::to_string(radii[i - 1])) + 1e-9);
    // sphere geodesics curve, so the slope is not zero
    CHECK(rep.values.at("slope@" + std::to_string(0.2)) > 1e-6);

    const Geometry e = build_gallery("euclidean");
    const ProbeReport flat =
        strong_differential_probe(e.spray, compute_constants(0.0, 0.0, 0.0, 1.0), e.center, radii);
    CHECK(flat.passed);
    CHECK(flat.worst_residual <= 1e-12);

    const std::vector<double> too_big{0.5};
    CHECK_THROWS_AS(strong_differential_probe(s.spray, c, s.center, too_big), Error);
}
