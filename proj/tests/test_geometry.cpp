#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include <legknot/fixtures.hpp>
#include <legknot/geometry.hpp>
#include <legknot/io.hpp>

#include "oracles.hpp"

using namespace legknot;

namespace {

SpaceCurveR3 xi1_example() {
    return SpaceCurveR3::from_trig(TrigPoly::cos_mode(1, -1.0), TrigPoly::cos_mode(1), TrigPoly::cos_mode(2, 0.25),
                                   ContactModel::xi1);
}

// front y = cos t, z = cos(2t)/4 with cusps at 0 and pi
FrontCurve two_cusp_front() {
    FrontCurve f;
    f.arcs.push_back({0.0, two_pi, TrigPoly::cos_mode(1), TrigPoly::cos_mode(2, 0.25)});
    f.cusps = {0.0, pi};
    return f;
}

template <class F>
errc code_of(F&& f) {
    try {
        f();
    } catch (const error& e) {
        return e.code();
    }
    ADD_FAILURE() << "no error raised";
    return errc::invalid_input;
}

} // namespace

TEST(Geometry, Xi1ExampleIsLegendrian) {
    EXPECT_LE(legendrian_residual_r3(xi1_example()), 1e-12);
}

TEST(Geometry, Xi2CircleIsNotLegendrian) {
    auto c = SpaceCurveR3::from_trig(TrigPoly::cos_mode(1), TrigPoly::sin_mode(1), TrigPoly(), ContactModel::xi2);
    EXPECT_NEAR(legendrian_residual_r3(c), 1.0, 1e-12);
}

TEST(Geometry, LiftOutputIsLegendrian) {
    auto c = SpaceCurveR3::from_legendrian(fixtures::best_fig8());
    EXPECT_LE(legendrian_residual_r3(c), 1e-10);
}

TEST(Geometry, ConstantPointS3Residual) {
    auto f = io::read_curve(std::string(LEGKNOT_DATA_DIR) + "/constant.json");
    auto r = legendrian_residual_s3(f.curve);
    EXPECT_EQ(r.re, 0.0);
    EXPECT_EQ(r.im, 0.0);
}

TEST(Geometry, TorusCurveIsLegendrian) {
    auto r = legendrian_residual_s3(torus_curve());
    EXPECT_LE(r.re, 1e-12);
    EXPECT_LE(r.im, 1e-12);
    auto f = io::read_curve(std::string(LEGKNOT_DATA_DIR) + "/torus.json");
    auto r2 = legendrian_residual_s3(f.curve);
    EXPECT_LE(std::max(r2.re, r2.im), 1e-12);
}

TEST(Geometry, HopfFiberIsTransverse) {
    auto f = io::read_curve(std::string(LEGKNOT_DATA_DIR) + "/hopf_fiber.json");
    auto r = legendrian_residual_s3(f.curve);
    EXPECT_LE(r.re, 1e-12);
    EXPECT_NEAR(r.im, 1.0, 1e-12);
    // same fiber written directly
    auto g = [](double t, cplx& z1, cplx& z2, cplx& d1, cplx& d2) {
        z1 = z2 = std::polar(1 / std::sqrt(2.0), t);
        d1 = d2 = cplx(0, 1) * z1;
    };
    EXPECT_NEAR(legendrian_residual_s3(g).im, 1.0, 1e-15);
}

TEST(Geometry, Xi1ToXi2Points) {
    Vec3 o = xi1_to_xi2(Vec3(0, 0, 0));
    EXPECT_EQ(o, Vec3(0, 0, 0));
    Vec3 p = xi1_to_xi2(Vec3(1, 2, 3));
    EXPECT_DOUBLE_EQ(p.x(), 1.5);
    EXPECT_DOUBLE_EQ(p.y(), 0.5);
    EXPECT_DOUBLE_EQ(p.z(), 4.0);
}

TEST(Geometry, Xi1ExampleMapsToXi2Legendrian) {
    auto c = xi1_to_xi2(xi1_example());
    EXPECT_EQ(c.model, ContactModel::xi2);
    EXPECT_LE(legendrian_residual_r3(c), 1e-10);
}

// property: phi pulls alpha2 back to alpha1, so residuals stay within a factor 10
TEST(Geometry, Xi1ToXi2PreservesResidualClass) {
    std::mt19937_64 rng(21);
    for (int trial = 0; trial < 20; ++trial) {
        auto l = legendrian_lift(oracle::random_poly(rng, 3), oracle::random_poly(rng, 3));
        // phi^-1: x = X - Y, y = X + Y, z = Z - x y / 2, plus a perturbation of size eps
        double eps = trial % 2 ? 1e-6 : 0.0;
        TrigPoly x = l.X - l.Y, y = l.X + l.Y;
        TrigPoly z = l.Z - 0.5 * (x * y) + TrigPoly::sin_mode(2, eps);
        auto c1 = SpaceCurveR3::from_trig(x, y, z, ContactModel::xi1);
        double r1 = legendrian_residual_r3(c1);
        double r2 = legendrian_residual_r3(xi1_to_xi2(c1));
        EXPECT_LE(r2, 10 * std::max(r1, 1e-12));
        if (eps > 0) EXPECT_GT(r1, 1e-7);
    }
}

TEST(Geometry, FrontLiftTwoCusps) {
    auto c = front_lift(two_cusp_front());
    double worst = 0;
    for (int k = 0; k < 4001; ++k) {
        double t = two_pi * k / 4001;
        worst = std::max(worst, std::abs(c.pos(t).x() + std::cos(t)));
    }
    EXPECT_LE(worst, 1e-8);
    EXPECT_NEAR(c.pos(0.0).x(), -1.0, 1e-12);
    EXPECT_NEAR(c.pos(pi).x(), 1.0, 1e-12);
    EXPECT_LE(legendrian_residual_r3(c, 4096), 1e-6);
    EXPECT_LE((c.pos(0.0) - c.pos(two_pi)).norm(), 1e-12);
}

TEST(Geometry, FrontLiftStraightFront) {
    FrontCurve f;
    // z constant; y' vanishes only at pi/2 and 3pi/2, which are avoided
    f.arcs.push_back({0.0, two_pi, TrigPoly::sin_mode(1), TrigPoly(1.0)});
    auto c = front_lift(f);
    for (double t : {0.1, 0.5, 1.0, 2.0, 4.0}) EXPECT_EQ(c.pos(t).x(), 0.0);
}

TEST(Geometry, FrontLiftDegenerateCuspRaises) {
    // y = sin^3 t has y' = y'' = 0 at t = 0
    FrontCurve f;
    TrigPoly s = TrigPoly::sin_mode(1);
    f.arcs.push_back({0.0, two_pi, s * s * s, TrigPoly::cos_mode(2, 0.25)});
    f.cusps = {0.0};
    EXPECT_EQ(code_of([&] { front_lift(f); }), errc::cusp_ill_conditioned);
}

TEST(Geometry, FrontLiftJumpRaises) {
    // x = 150 sin t cos t - cos t moves far from its cusp value across a wide guard band
    FrontCurve f;
    TrigPoly s = TrigPoly::sin_mode(1);
    f.arcs.push_back({0.0, two_pi, TrigPoly::cos_mode(1), s * s * s * 50.0 + TrigPoly::cos_mode(2, 0.25)});
    f.cusps = {0.0};
    FrontLiftOptions o;
    o.guard = 0.05;
    EXPECT_EQ(code_of([&] { front_lift(f, o); }), errc::cusp_ill_conditioned);
}

TEST(Geometry, CrossingSignFront) {
    EXPECT_TRUE(crossing_sign_front(-1.0, 1.0));
    EXPECT_FALSE(crossing_sign_front(1.0, -1.0));
    EXPECT_EQ(code_of([] { crossing_sign_front(0.5, 0.5); }), errc::equal_slopes);
    EXPECT_EQ(code_of([] { crossing_sign_front(INFINITY, 0.5); }), errc::invalid_input);
}

TEST(Geometry, TangentSpacePointBasics) {
    EXPECT_EQ(tangent_space_point({1, 0, 0, 0}), Vec3(0, 0, 0));
    EXPECT_EQ(code_of([] { tangent_space_point({-1, 0, 0, 0}); }), errc::not_in_right_half_sphere);
    EXPECT_EQ(code_of([] { tangent_space_point({0, 1, 0, 0}); }), errc::not_in_right_half_sphere);
}

// property: s3_from_tangent_space and tangent_space_point are inverse
TEST(Geometry, TangentSpaceRoundtrip) {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> g(0, 3);
    for (int k = 0; k < 500; ++k) {
        Vec3 q(g(rng), g(rng), g(rng));
        auto p = s3_from_tangent_space(q);
        EXPECT_NEAR(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3], 1.0, 1e-14);
        EXPECT_LE((tangent_space_point(p) - q).norm(), 1e-12 * std::max(1.0, q.norm()));
    }
}

TEST(Geometry, TangentSpaceProjectRoundtripOnFixtures) {
    for (auto l : {fixtures::best_fig8(), legendrian_lift(fixtures::trefoil().X, fixtures::trefoil().Y)}) {
        auto s = project_to_s3(l);
        auto q = tangent_space_project(s);
        for (int k = 0; k < 64; ++k) {
            double t = two_pi * k / 64;
            Vec3 expect(l.X(t), l.Y(t), l.Z(t));
            EXPECT_LE((q.pos(t) - expect).norm(), 1e-12 * std::max(1.0, expect.norm()));
            // and back up to S^3
            auto p = s3_from_tangent_space(q.pos(t));
            auto p0 = s.point(t);
            for (int i = 0; i < 4; ++i) EXPECT_NEAR(p[i], p0[i], 1e-12);
        }
        EXPECT_LE(legendrian_residual_r3(q), 1e-9);
    }
}

TEST(Geometry, TorusLeavesRightHalfSphere) {
    EXPECT_EQ(code_of([] { tangent_space_project(torus_curve()); }), errc::not_in_right_half_sphere);
}

// property: the S^3 contact residual is the R^3 residual divided by rho, so never larger
TEST(Geometry, S3ResidualBoundedByR3Residual) {
    std::mt19937_64 rng(9);
    for (int trial = 0; trial < 20; ++trial) {
        auto l = legendrian_lift(oracle::random_poly(rng, 2), oracle::random_poly(rng, 3));
        double eps = std::pow(10.0, -2 - trial % 6);
        l.Z = l.Z + TrigPoly::cos_mode(1 + trial % 3, eps);
        double r3 = legendrian_residual_r3(SpaceCurveR3::from_legendrian(l));
        auto s3 = legendrian_residual_s3(project_to_s3(l));
        EXPECT_LE(s3.im, r3 * (1 + 1e-9) + 1e-13);
        EXPECT_LE(s3.re, 1e-12);
    }
}
