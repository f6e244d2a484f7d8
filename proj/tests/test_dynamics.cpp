#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <random>

#include <boost/numeric/odeint.hpp>

#include <legknot/dynamics.hpp>
#include <legknot/fixtures.hpp>
#include <legknot/tangency.hpp>

using namespace legknot;

namespace {

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

Vec3 random_point(std::mt19937_64& rng, double scale = 2.0) {
    std::uniform_real_distribution<double> u(-scale, scale);
    return {u(rng), u(rng), u(rng)};
}

// dq/ds = V(q, s) with an adaptive Dormand-Prince integrator
Vec3 flow(const Vec3& p, double t) {
    using state = std::array<double, 3>;
    namespace ode = boost::numeric::odeint;
    state q{p.x(), p.y(), p.z()};
    auto rhs = [](const state& x, state& dx, double s) {
        Vec3 v = poynting_V(x[0], x[1], x[2], s);
        dx = {v.x(), v.y(), v.z()};
    };
    ode::integrate_adaptive(ode::make_controlled<ode::runge_kutta_dopri5<state>>(1e-13, 1e-13), rhs, q, 0.0, t,
                            t > 0 ? 1e-3 : -1e-3);
    return {q[0], q[1], q[2]};
}

} // namespace

TEST(Dynamics, Phi0Basics) {
    EXPECT_LE(phi0(cplx(-1.0), cplx(0.0)).norm(), 1e-15);
    EXPECT_EQ(code_of([] { phi0(cplx(1.0), cplx(0.0)); }), errc::at_infinity);
    EXPECT_EQ(code_of([] { phi0(std::array<double, 4>{1, 0, 0, 0}); }), errc::at_infinity);
}

TEST(Dynamics, Phi0InvertsAlphaBetaAtTimeZero) {
    std::mt19937_64 rng(1);
    for (int k = 0; k < 100; ++k) {
        Vec3 q = random_point(rng, 3);
        auto [a, b] = alpha_beta(q.x(), q.y(), q.z(), 0.0);
        EXPECT_LE((phi0(a, b) - q).norm(), 1e-10 * std::max(1.0, q.norm()));
    }
}

TEST(Dynamics, PhiInverseAtTimeZeroIsIdentity) {
    std::mt19937_64 rng(2);
    for (int k = 0; k < 100; ++k) {
        Vec3 q = random_point(rng, 3);
        EXPECT_LE((phi_t_inverse(q, 0.0) - q).norm(), 1e-13 * std::max(1.0, q.norm()));
        EXPECT_EQ(phi_t_forward(q, 0.0), q);
    }
}

TEST(Dynamics, PhiInverseOriginAtTimeOne) {
    Vec3 p = phi_t_inverse(Vec3(0, 0, 0), 1.0);
    EXPECT_NEAR(p.x(), 0.0, 1e-15);
    EXPECT_NEAR(p.y(), 0.0, 1e-15);
    EXPECT_NEAR(p.z(), 1.0, 1e-15);
}

TEST(Dynamics, PhiInverseIsPhi0OfAlphaBeta) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> ut(-5, 5);
    for (int k = 0; k < 100; ++k) {
        Vec3 q = random_point(rng, 3);
        double t = ut(rng);
        auto [a, b] = alpha_beta(q.x(), q.y(), q.z(), t);
        Vec3 want = phi0(a, b);
        EXPECT_LE((phi_t_inverse(q, t) - want).norm(), 1e-10 * std::max(1.0, want.norm()));
    }
}

TEST(Dynamics, InverseJacobianMatchesDifferences) {
    std::mt19937_64 rng(4);
    const double h = 1e-6;
    for (int k = 0; k < 30; ++k) {
        Vec3 q = random_point(rng);
        double t = 0.3 * k - 4;
        Eigen::Matrix3d J = phi_t_inverse_jacobian(q, t), F;
        for (int c = 0; c < 3; ++c) {
            Vec3 e = Vec3::Zero();
            e[c] = h;
            F.col(c) = (phi_t_inverse(q + e, t) - phi_t_inverse(q - e, t)) / (2 * h);
        }
        EXPECT_LE((J - F).norm(), 1e-6 * std::max(1.0, J.norm()));
    }
}

TEST(Dynamics, ForwardRoundtrip) {
    std::mt19937_64 rng(5);
    for (double t : {0.5, -0.5, 2.0, -2.0, 100.0, -100.0}) {
        for (int k = 0; k < 20; ++k) {
            Vec3 p = random_point(rng);
            Vec3 q = phi_t_forward(p, t);
            EXPECT_LE((phi_t_inverse(q, t) - p).norm(), 1e-9 * std::max(1.0, p.norm())) << "t = " << t;
            // and back: forward of the inverse returns the start
            Vec3 q2 = phi_t_forward(phi_t_inverse(q, t), t, q);
            EXPECT_LE((q2 - q).norm(), 1e-8 * std::max(1.0, q.norm()));
        }
    }
}

// Poynting flow and the diffeomorphism agree
TEST(Dynamics, ForwardMatchesPoyntingFlow) {
    std::mt19937_64 rng(6);
    std::uniform_real_distribution<double> ut(-2, 2);
    for (int k = 0; k < 20; ++k) {
        Vec3 p = random_point(rng);
        double t = ut(rng);
        EXPECT_LE((flow(p, t) - phi_t_forward(p, t)).norm(), 1e-6) << "t = " << t;
    }
}

TEST(Dynamics, PoyntingIsUnit) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ut(-10, 10);
    for (int k = 0; k < 1000; ++k) {
        Vec3 q = random_point(rng, 5);
        EXPECT_NEAR(poynting_V(q, ut(rng)).norm(), 1.0, 1e-12);
    }
}

TEST(Dynamics, PoyntingOnZAxis) {
    for (double z : {-3.0, 0.0, 0.7, 5.0})
        for (double t : {-2.0, 0.0, 1.0, 8.0}) EXPECT_EQ(poynting_V(0, 0, z, t), Vec3(0, 0, -1));
}

TEST(Dynamics, PoyntingLimitAtLargeTime) {
    std::mt19937_64 rng(8);
    for (int k = 0; k < 50; ++k) {
        Vec3 q = random_point(rng, 5);
        EXPECT_LE((poynting_V(q, 1e6) - Vec3(0, 0, -1)).norm(), 1e-4);
    }
}

// V is the normalised Re x Im of grad alpha x grad beta
TEST(Dynamics, PoyntingFromBatemanBivector) {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> ut(-3, 3);
    for (int k = 0; k < 100; ++k) {
        Vec3 q = random_point(rng);
        double t = ut(rng);
        CVec3 w = bateman_bivector(alpha_beta_jet(q.x(), q.y(), q.z(), t));
        Vec3 v = Vec3(w.real()).cross(Vec3(w.imag()));
        EXPECT_LE((v.normalized() - poynting_V(q, t)).norm(), 1e-12);
    }
}

TEST(Dynamics, EvolveAtTimeZeroIsPhi0) {
    auto c = fixtures::best_fig8_s3();
    auto frames = evolve_frames(c, {0.0}, 64);
    ASSERT_EQ(frames.size(), 1u);
    auto base = curve_in_r3(c, 64);
    for (int k = 0; k < 64; ++k) {
        EXPECT_TRUE(frames[0].converged[k]);
        EXPECT_LE((frames[0].points[k] - base[k]).norm(), 1e-12);
    }
}

TEST(Dynamics, EvolveFigureEightToLargeTimes) {
    auto c = fixtures::best_fig8_s3();
    std::vector<double> times{0, 0.5, -0.5, 1, -1, 2, -2, 5, -5, 100, -100, 1e6, -1e6};
    auto frames = evolve_frames(c, times, 128, 2);
    ASSERT_EQ(frames.size(), times.size());
    for (std::size_t i = 0; i < frames.size(); ++i) {
        EXPECT_EQ(frames[i].t, times[i]);
        EXPECT_EQ(frames[i].points.size(), 128u);
        for (std::size_t k = 0; k < 128; ++k) {
            ASSERT_TRUE(frames[i].converged[k]) << "t = " << times[i];
            Vec3 back = phi_t_inverse(frames[i].points[k], times[i]);
            EXPECT_LE((back - frames[0].points[k]).norm(), 1e-9 * std::max(1.0, frames[0].points[k].norm()));
        }
    }
    EXPECT_LT(mean_z(frames[11]), -1e5);
    EXPECT_GT(mean_z(frames[12]), 1e5);
    int total = 0;
    for (int v : z_histogram(frames[11], 10)) total += v;
    EXPECT_EQ(total, 128);
}

TEST(Dynamics, EvolveIsDeterministicAcrossThreads) {
    auto c = fixtures::best_fig8_s3();
    auto a = evolve_frames(c, {0, 1, -1, 5}, 64, 1), b = evolve_frames(c, {0, 1, -1, 5}, 64, 3);
    for (std::size_t i = 0; i < a.size(); ++i)
        for (std::size_t k = 0; k < 64; ++k) EXPECT_EQ(a[i].points[k], b[i].points[k]);
}

// link type at t = 1 matches t = 0
TEST(Dynamics, LinkTypePreserved) {
    auto c = fixtures::best_fig8_s3();
    auto frames = evolve_frames(c, {0.0, 1.0}, 2048, 2);
    auto s0 = signature(polyline_gauss_code(frames[0].points));
    auto s1 = signature(polyline_gauss_code(frames[1].points));
    EXPECT_EQ(s0.determinant, 5);
    EXPECT_EQ(s1.determinant, s0.determinant);
}

TEST(Dynamics, EscapeFigureEight) {
    auto c = fixtures::best_fig8_s3();
    auto r = escape_time(c, 10.0, {0.5, 1, 2, 5, 10, 20, 50, 100, 1000, 10000}, 128, 2);
    EXPECT_GT(r.T_plus, 0.0);
    EXPECT_LE(r.T_plus, 1e4);
    EXPECT_LT(r.T_minus, 0.0);
    EXPECT_GE(r.T_minus, -1e4);
    // the distance profile grows once the curve has left
    double prev = 0;
    for (const auto& [t, d] : r.profile)
        if (t >= r.T_plus) {
            EXPECT_GT(d, 10.0);
            EXPECT_GE(d, prev);
            prev = d;
        }
}

TEST(Dynamics, EscapeRadiusZero) {
    auto r = escape_time(fixtures::best_fig8_s3(), 0.0, {1, 2}, 64);
    EXPECT_EQ(r.T_plus, 0.0);
    EXPECT_EQ(r.T_minus, 0.0);
}

TEST(Dynamics, EscapeGridTooShort) {
    EXPECT_EQ(code_of([] { escape_time(fixtures::best_fig8_s3(), 10.0, {0.5}, 64); }), errc::not_escaped_in_grid);
}

// the preimage of a ball at large |t| sits near (1, 0)
TEST(Dynamics, PreimageShrinks) {
    std::mt19937_64 rng(10);
    std::normal_distribution<double> N;
    std::uniform_real_distribution<double> U;
    for (double t : {1e3, -1e3}) {
        double worst = 0;
        for (int k = 0; k < 2000; ++k) {
            Vec3 d(N(rng), N(rng), N(rng));
            Vec3 q = d.normalized() * 10 * std::cbrt(U(rng));
            auto [a, b] = alpha_beta(q.x(), q.y(), q.z(), t);
            worst = std::max(worst, std::sqrt(std::norm(a - 1.0) + std::norm(b)));
        }
        EXPECT_LE(worst, 0.1);
    }
}
