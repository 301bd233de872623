#include "lipspray/distance.hpp"
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

DistanceField field_of(const Geometry& g, const ConvexityConstants& c, const Vec& p) {
    return make_distance_field(g.spray, *g.tensor, c, p);
}

DistanceField flat_field(const char* name, double r) {
    const Geometry g = build_gallery(name);
    return field_of(g, compute_constants(0.0, 0.0, 0.0, r, 0.9, g.center), g.center);
}

Mat eta2() {
    Mat e = Mat::Identity(2, 2);
    e(0, 0) = -1.0;
    return e;
}

}  // namespace

TEST_CASE("squared distance in flat space") {
    const DistanceField e = flat_field("euclidean", 1.0);
    const Vec q = make_vec({0.3, -0.2});
    const DistanceSample s = distance_sample(e, q);
    CHECK(s.value == doctest::Approx(0.13).epsilon(1e-14));
    CHECK((s.gradient - 2.0 * q).norm() < 1e-13);
    CHECK((s.P - q).norm() < 1e-14);

    const DistanceField m = flat_field("minkowski", 3.0);
    const Vec t = make_vec({1.0, 0.5});
    CHECK(squared_distance(m, t) == doctest::Approx(-0.75).epsilon(1e-14));
    CHECK((gauss_gradient(m, t) - 2.0 * eta2() * t).norm() < 1e-13);
    // rebased field
    const DistanceField m2 = rebase(m, make_vec({0.2, 0.1}));
    CHECK(squared_distance(m2, t) == doctest::Approx(-0.64 + 0.16).epsilon(1e-14));
}

TEST_CASE("sphere squared distance against the arc length") {
    const Geometry g = build_gallery("sphere");
    const ConvexityConstants c = certified(g);
    const DistanceField f = field_of(g, c, g.center);
    CHECK(squared_distance(f, Vec(g.center + make_vec({0.0, 0.3}))) == doctest::Approx(0.09).epsilon(1e-7));
    for (int i = 0; i < 10; ++i) {
        Rng rng = sample_rng(21, i);
        const Vec q = random_in_ball(rng, g.center, 0.4);
        CHECK(std::abs(squared_distance(f, q) - g.oracle_squared_distance(g.center, q)) < 1e-10);
    }
}

TEST_CASE("sphere gradient annihilates the level-circle tangent") {
    const Geometry g = build_gallery("sphere");
    const DistanceField f = field_of(g, certified(g), g.center);
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i) {
        Rng rng = sample_rng(22, i);
        const Vec q = random_in_ball(rng, g.center, 0.4);
        // tangent of the oracle level set from its central-difference gradient
        Vec grad(2);
        for (int k = 0; k < 2; ++k) {
            Vec e = Vec::Zero(2);
            e[k] = h;
            grad[k] = (g.oracle_squared_distance(g.center, Vec(q + e)) -
                       g.oracle_squared_distance(g.center, Vec(q - e))) / (2.0 * h);
        }
        const Vec w = make_vec({-grad[1], grad[0]}).normalized();
        CHECK(std::abs(gauss_gradient(f, q).dot(w)) < 1e-6);
        // radial identity dD²(P) = 2D²
        const DistanceSample s = distance_sample(f, q);
        CHECK(std::abs(s.gradient.dot(s.P) - 2.0 * s.value) < 1e-6);
    }
}

TEST_CASE("gauss check") {
    const ProbeReport flat = gauss_check(flat_field("euclidean", 1.0));
    CHECK(flat.passed);
    CHECK(flat.worst_residual <= 1e-10);

    const Geometry s = build_gallery("sphere");
    const DistanceField fs = field_of(s, certified(s), s.center);
    const ProbeReport rs = gauss_check(fs, {.samples = 50, .h = 1e-4});
    CHECK(rs.passed);
    CHECK(rs.samples == 50);
    CHECK(rs.worst_residual <= 1e-5);
    CHECK(rs.values.at("radial_residual") <= 1e-6);
    // residual / h does not grow as the step shrinks
    const ProbeReport coarse = gauss_check(fs, {.samples = 20, .h = 1e-3});
    const ProbeReport fine = gauss_check(fs, {.samples = 20, .h = 1e-4});
    CHECK(fine.values.at("C") <= coarse.values.at("C") + 1e-6);

    const Geometry r = build_gallery("randers");
    const ProbeReport rr = gauss_check(field_of(r, certified(r), r.center), {.samples = 20, .h = 1e-4});
    CHECK(rr.passed);
    CHECK(rr.worst_residual <= 1e-4);
}

TEST_CASE("radial flow decays the level exponentially") {
    const DistanceField e = flat_field("euclidean", 1.0);
    const ProbeReport re = radial_flow_probe(e);
    CHECK(re.passed);
    CHECK(re.values.at("target") == doctest::Approx(0.01).epsilon(1e-15));
    // RK4 on q' = −q multiplies q by R(−dt) per step, R(z) = Σ_{k≤4} z^k/k!
    const double z = -std::log(2.0) / 12.0;
    const double R = 1.0 + z + z * z / 2.0 + z * z * z / 6.0 + z * z * z * z / 24.0;
    CHECK(re.worst_residual == doctest::Approx(std::abs(0.04 * std::pow(R, 24) - 0.01)).epsilon(1e-6));
    CHECK(re.worst_residual < 1e-8);

    const ProbeReport still = radial_flow_probe(e, {.level = 0.04, .time = 0.0});
    CHECK(still.worst_residual < 1e-13);

    // level 0.09 sits at arc 0.3; the log ball is widened to reach it
    const Geometry s = build_gallery("sphere");
    DistanceField fs = field_of(s, certified(s), s.center);
    fs.log.radius_limit = 0.8;
    const ProbeReport rs = radial_flow_probe(fs, {.level = 0.09, .time = 0.5});
    CHECK(rs.passed);
    CHECK(rs.values.at("target") == doctest::Approx(0.09 * std::exp(-1.0)));
    CHECK(rs.worst_residual <= 1e-5);
}

TEST_CASE("level points") {
    const Geometry s = build_gallery("sphere");
    const DistanceField fs = field_of(s, certified(s), s.center);
    for (const Vec& q : level_points(fs, 0.01, 5, 3)) CHECK(squared_distance(fs, q) == doctest::Approx(0.01).epsilon(1e-9));
    const DistanceField m = flat_field("minkowski", 3.0);
    for (const Vec& q : level_points(m, -0.2, 5, 3)) CHECK(squared_distance(m, q) == doctest::Approx(-0.2).epsilon(1e-12));
    CHECK_THROWS_AS(level_points(fs, -0.01, 1, 0), Error);
}

TEST_CASE("strong convexity and midpoints on the sphere") {
    const Geometry g = build_gallery("sphere");
    const ConvexityCertificate cert = certify_ball(g.spray, g.center, g.radius);
    const NormalizedChart chart = normalize_chart_at(*g.tensor, *g.christoffel, g.center);
    ConvexityProbeOptions opt;
    opt.samples = 12;
    const ProbeReport rep = strong_convexity_probe_riemannian(cert, g.spray, *g.tensor, chart, opt);
    CHECK(rep.passed);
    CHECK(rep.values.at("passing_radius") > 0.0);

    const DistanceField f = field_of(g, cert.constants, g.center);
    const ProbeReport mid = midpoint_probe(f, g.center, 0.1, 1.9, 20, 4);
    CHECK(mid.passed);
    CHECK(mid.samples == 20);

    const ProbeReport ball = metric_ball_probe(f, 0.1, 20, 4);
    CHECK(ball.passed);
}

TEST_CASE("flat midpoint identity") {
    // D²_q(mid) = ½D²_q(a) + ½D²_q(b) − ¼|b − a|², so the ratio is 0 for any λ
    const DistanceField e = flat_field("euclidean", 1.0);
    const ProbeReport rep = midpoint_probe(e, e.p, 0.2, 1.9, 20, 1);
    CHECK(rep.passed);
    CHECK(std::abs(rep.worst_residual) < 1e-9);
}

TEST_CASE("two-point inequality on Minkowski space") {
    const Geometry g = build_gallery("minkowski");
    const ConvexityCertificate cert = certify_ball(g.spray, g.center, 1.0);
    const NormalizedChart chart = normalize_chart_at(*g.tensor, levi_civita(*g.tensor), g.center);
    ConvexityProbeOptions opt;
    opt.epsilon = 0.3;
    opt.samples = 16;
    const ProbeReport rep = lorentzian_two_point_probe(cert, g.spray, *g.tensor, chart, opt);
    CHECK(rep.passed);
    CHECK(rep.values.at("worst_lhs") <= 1e-12);
    // r = η + 2dx⁰⊗dx⁰ is the identity
    CHECK(rep.values.at("min_r_eigenvalue") == doctest::Approx(1.0));
}

TEST_CASE("hyperboloid sublevel convexity") {
    const DistanceField m = flat_field("minkowski", 3.0);
    // chord midpoint of (cosh a, ±sinh a) is (cosh a, 0), where D² = −cosh²a
    for (double a : {0.1, 0.3, 0.6}) {
        const Vec x = make_vec({std::cosh(a), std::sinh(a)});
        const Vec y = make_vec({std::cosh(a), -std::sinh(a)});
        CHECK(squared_distance(m, x) == doctest::Approx(-1.0).epsilon(1e-13));
        CHECK(squared_distance(m, y) == doctest::Approx(-1.0).epsilon(1e-13));
        const double mid = squared_distance(m, Vec(0.5 * (x + y)));
        CHECK(mid == doctest::Approx(-std::cosh(a) * std::cosh(a)).epsilon(1e-13));
        CHECK(mid < -1.0);
    }
    // the probe on the hyperboloid of radius 0.5, whose chords stay in the certified ball
    const ProbeReport rep = spacelike_level_probe(m, ChartBox{make_vec({0.6, 0.0}), 0.1}, {.level = -0.25});
    CHECK(rep.passed);
    CHECK(rep.values.at("arc_length") < 1e-9);
    CHECK(rep.values.at("midpoint") < 1e-9);
    CHECK(rep.values.at("sublevel_excess") < 0.0);
    CHECK(rep.values.at("rejected") == 0.0);

    // a sub-ball reaching outside the light cone breaks the chronology precondition
    const ProbeReport bad = spacelike_level_probe(m, ChartBox{make_vec({0.0, 0.6}), 0.1}, {.level = -0.25});
    CHECK_FALSE(bad.passed);
}

TEST_CASE("geodesics minimize length") {
    const DistanceField e = flat_field("euclidean", 1.0);
    const ProbeReport re = minimization_probe(e, make_vec({0.3, 0.1}));
    CHECK(re.passed);
    CHECK(re.samples >= 50);
    CHECK(re.values.at("min_excess") > 0.0);

    const Geometry s = build_gallery("sphere");
    const ConvexityConstants c = certified(s);
    const ProbeReport rs = minimization_probe(field_of(s, c, s.center), Vec(s.center + make_vec({0.1, 0.1})));
    CHECK(rs.passed);

    const Geometry r = build_gallery("randers");
    const ProbeReport rr = minimization_probe(field_of(r, certified(r), r.center), make_vec({0.1, 0.05}));
    CHECK(rr.passed);
    CHECK(rr.values.count("backward_length") == 1);
    CHECK(std::abs(rr.values.at("reversed_forward_length") - rr.values.at("geodesic_length")) > 1e-4);

    const DistanceField m = flat_field("minkowski", 1.0);
    CHECK_THROWS_AS(minimization_probe(m, make_vec({0.3, 0.1})), Error);
}

TEST_CASE("timelike geodesics maximize proper time") {
    // twin paradox: a kinked worldline from 0 to (1, 0) through (0.5, 0.3)
    const Geometry g = build_gallery("minkowski");
    Curve kink;
    kink.position = [](double t) {
        return Vec(t <= 0.5 ? make_vec({t, 0.6 * t}) : make_vec({t, 0.6 * (1.0 - t)}));
    };
    kink.velocity = [](double t) { return Vec(make_vec({1.0, t <= 0.5 ? 0.6 : -0.6})); };
    const double tau = curve_length(*g.tensor, kink, LengthKind::lorentzian);
    CHECK(tau == doctest::Approx(0.8).epsilon(1e-6));
    const DistanceField m = flat_field("minkowski", 3.0);
    CHECK(std::sqrt(-squared_distance(m, make_vec({1.0, 0.0}))) == doctest::Approx(1.0));

    const ProbeReport rep = maximization_probe(flat_field("minkowski", 1.0), make_vec({0.3, 0.1}));
    CHECK(rep.passed);
    CHECK(rep.values.at("accepted") == 50.0);
    CHECK(rep.values.at("max_excess") < 0.0);

    CHECK_THROWS_AS(maximization_probe(m, make_vec({0.1, 0.3})), Error);
}
