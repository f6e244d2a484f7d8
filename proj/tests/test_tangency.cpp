#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include <legknot/dynamics.hpp>
#include <legknot/fixtures.hpp>
#include <legknot/io.hpp>
#include <legknot/tangency.hpp>

#include "oracles.hpp"

using namespace legknot;

namespace {

const cplx I(0.0, 1.0);

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

// (n1 + i n2)^i (n3 + i n4)^j rho^{(2n - i - j)/2}, term by term
cplx basis_direct(const S3Curve& c, int n, int i, int j, double t) {
    cplx w1(oracle::direct_eval(c.n1, t), oracle::direct_eval(c.n2, t));
    cplx w2(oracle::direct_eval(c.n3, t), oracle::direct_eval(c.n4, t));
    double rho = oracle::direct_eval(c.rho, t);
    return std::pow(w1, i) * std::pow(w2, j) * std::pow(rho, 0.5 * (2 * n - i - j));
}

// G = z1^2 z2^3 - (2/5)(3/5)^{3/2}, constant on the torus curve
PolyC2 torus_G() {
    PolyC2 g(3);
    g.c(2, 3) = 1.0;
    g.c(0, 0) = -0.4 * std::pow(0.6, 1.5);
    return g;
}

S3Curve small_lift_fixture() {
    std::mt19937_64 rng(4);
    return project_to_s3(legendrian_lift(oracle::random_poly(rng, 1), oracle::random_poly(rng, 1)));
}

Eigen::Vector3d fd_partial(const std::function<Eigen::Vector3cd(double, double, double, double)>& F, int axis,
                           double x, double y, double z, double t, double h, bool imag) {
    double p[4] = {x, y, z, t}, m[4] = {x, y, z, t};
    p[axis] += h;
    m[axis] -= h;
    Eigen::Vector3cd d = (F(p[0], p[1], p[2], p[3]) - F(m[0], m[1], m[2], m[3])) / (2 * h);
    return imag ? Eigen::Vector3d(d.imag()) : Eigen::Vector3d(d.real());
}

} // namespace

TEST(Tangency, DegreeElevenCurveDimensions) {
    auto c = fixtures::best_fig8_s3();
    EXPECT_EQ(c.degree(), 11);
    auto [rows, cols] = system_dimensions(c, 87, Parity::even_only);
    EXPECT_EQ(rows, 3829);
    EXPECT_EQ(cols, 3872);
}

// property: even-only counts are 2(2mn)+1 rows and ceil((n+1)^2/2) columns
TEST(Tangency, EvenOnlyDimensionCounts) {
    auto c = fixtures::best_fig8_s3();
    const int m = c.degree();
    for (int n : {1, 2, 3, 5, 8, 13, 20}) {
        auto [rows, cols] = system_dimensions(c, n, Parity::even_only);
        EXPECT_EQ(cols, ((n + 1) * (n + 1) + 1) / 2) << n;
        EXPECT_EQ(rows, 2 * (2 * m * n) + 1) << n;
        if (n <= 5) {
            auto s = assemble_A(c, n);
            EXPECT_EQ(s.parity, Parity::even_only);
            EXPECT_EQ(s.rows(), rows);
            EXPECT_EQ(s.cols(), cols);
        }
    }
}

TEST(Tangency, TorusDimensions) {
    auto s = assemble_A(torus_curve(), 3);
    EXPECT_EQ(s.parity, Parity::all);
    EXPECT_EQ(s.cols(), 16);
    EXPECT_EQ(s.D, 15);
    EXPECT_EQ(s.rows(), 31);
}

TEST(Tangency, DegreeZeroSystem) {
    auto s = assemble_A(fixtures::best_fig8_s3(), 0);
    ASSERT_EQ(s.cols(), 1);
    EXPECT_EQ(s.D, 0);
    EXPECT_NEAR(std::abs(s.A(0, 0) - 1.0), 0.0, 1e-15);
}

TEST(Tangency, AllParityNeedsConstantRho) {
    EXPECT_EQ(code_of([] { assemble_A(fixtures::best_fig8_s3(), 2, Parity::all); }), errc::invalid_input);
    EXPECT_EQ(code_of([] { assemble_A(torus_curve(), -1); }), errc::invalid_input);
}

// property: Fourier synthesis of each column reproduces its basis function
TEST(Tangency, ColumnSynthesisMatchesBasis) {
    std::mt19937_64 rng(2);
    std::uniform_real_distribution<double> u(0, two_pi);
    for (const auto& [c, n] : {std::pair{fixtures::best_fig8_s3(), 6}, std::pair{torus_curve(), 4},
                               std::pair{small_lift_fixture(), 5}}) {
        auto s = assemble_A(c, n);
        std::uniform_int_distribution<int> pick(0, s.cols() - 1);
        for (int trial = 0; trial < 20; ++trial) {
            int k = pick(rng);
            double t = u(rng);
            auto [i, j] = s.index[k];
            cplx want = basis_direct(c, n, i, j, t);
            // relative to the column's size on the curve; single values can be tiny
            double scale = 1.0;
            for (int q = 0; q < 64; ++q) scale = std::max(scale, std::abs(basis_direct(c, n, i, j, two_pi * q / 64)));
            EXPECT_LE(std::abs(synthesize_column(s, k, t) - want), 1e-9 * scale) << "n = " << n;
        }
    }
}

TEST(Tangency, ThreadCountDoesNotChangeA) {
    auto c = fixtures::best_fig8_s3();
    auto a = assemble_A(c, 7, Parity::automatic, 1), b = assemble_A(c, 7, Parity::automatic, 4);
    EXPECT_EQ((a.A - b.A).cwiseAbs().maxCoeff(), 0.0);
}

TEST(Tangency, TorusGInNullspace) {
    auto c = torus_curve();
    auto s = assemble_A(c, 3);
    Eigen::VectorXcd g = s.to_vector(torus_G());
    EXPECT_LE((s.A * g).norm(), 1e-10);
    auto ns = nullspace(s);
    ASSERT_FALSE(ns.candidates.empty());
    // membership: g lies in the span of the returned candidates
    Eigen::MatrixXcd V(s.cols(), ns.candidates.size());
    for (std::size_t k = 0; k < ns.candidates.size(); ++k) V.col(k) = s.to_vector(ns.candidates[k].g);
    Eigen::VectorXcd proj = V * (V.adjoint() * g);
    EXPECT_LE((g - proj).norm(), 1e-8 * g.norm());
    for (std::size_t k = 1; k < ns.candidates.size(); ++k)
        EXPECT_GE(ns.candidates[k].sigma, ns.candidates[k - 1].sigma);
}

TEST(Tangency, CandidatesVanishOnCurve) {
    for (const auto& [c, n] : {std::pair{torus_curve(), 3}, std::pair{small_lift_fixture(), 8}}) {
        auto s = assemble_A(c, n);
        auto ns = nullspace(s);
        double rmax = 0;
        for (int k = 0; k < 512; ++k) rmax = std::max(rmax, std::pow(c.rho(two_pi * k / 512), n));
        for (const auto& cand : ns.candidates)
            EXPECT_LE(on_curve_residual(cand.g, c), 1e-6 * cand.g.norm() * rmax);
    }
}

// property: max_t rho^n |G_x| <= |A x| sqrt(2D + 1)
TEST(Tangency, ParsevalBound) {
    std::mt19937_64 rng(8);
    std::normal_distribution<double> N;
    for (const auto& [c, n] : {std::pair{fixtures::best_fig8_s3(), 4}, std::pair{torus_curve(), 3}}) {
        auto s = assemble_A(c, n);
        for (int trial = 0; trial < 10; ++trial) {
            Eigen::VectorXcd x(s.cols());
            for (auto& v : x) v = cplx(N(rng), N(rng));
            double lhs = on_curve_residual(s.to_poly(x), c, 1024);
            EXPECT_LE(lhs, (s.A * x).norm() * std::sqrt(2.0 * s.D + 1) * (1 + 1e-9));
        }
    }
}

// property: above the rank-nullity bound the nullspace is never empty
TEST(Tangency, SolvableAboveBound) {
    for (const auto& c : {torus_curve(), small_lift_fixture()}) {
        const int m = c.degree();
        int bound = int(std::floor(4 * m - 1 + std::sqrt(2.0) * std::sqrt(4.0 * m - 1 + 8.0 * m * m)));
        auto s = assemble_A(c, bound + 1);
        EXPECT_FALSE(nullspace(s).candidates.empty()) << "m = " << m;
    }
}

TEST(Tangency, TangentSectionMatchesDirect) {
    for (const auto& c : {fixtures::best_fig8_s3(), torus_curve(), small_lift_fixture()}) {
        auto ts = tangent_section(c);
        EXPECT_EQ(ts.n_min, 2);
        for (int k = 0; k < 200; ++k) {
            double t = two_pi * k / 200;
            double r = c.rho(t);
            cplx H = tangent_section_direct(c, t);
            EXPECT_LE(std::abs(ts.P(t) - r * r * H), 1e-9 * std::max(1.0, r * r * std::abs(H)));
            // H = X.v2 + i X.v1
            auto [v1, v2] = contact_frame_components(c, t);
            EXPECT_LE(std::abs(H - cplx(v2, v1)), 1e-10 * std::max(1.0, std::abs(H)));
            // v1, v2 span the contact plane, so they carry the whole tangent
            auto [d1, d2] = c.dz(t);
            double X2 = std::norm(d1) + std::norm(d2);
            EXPECT_NEAR(v1 * v1 + v2 * v2, X2, 1e-9 * std::max(1.0, X2));
        }
    }
}

TEST(Tangency, TorusSectionHasConstantModulus) {
    auto c = torus_curve();
    std::vector<double> mod;
    for (int k = 0; k < 256; ++k) mod.push_back(std::abs(tangent_section_direct(c, two_pi * k / 256)));
    double mean = 0, var = 0;
    for (double v : mod) mean += v / mod.size();
    for (double v : mod) var += (v - mean) * (v - mean) / mod.size();
    EXPECT_LE(std::sqrt(var), 1e-10);
    EXPECT_GT(mean, 0.1);
}

TEST(Tangency, ConstantCurveSectionIsZero) {
    auto f = io::read_curve(std::string(LEGKNOT_DATA_DIR) + "/constant.json");
    auto ts = tangent_section(f.curve);
    EXPECT_LE(ts.P.norm2(), 1e-15);
    auto s = assemble_y(f.curve, 2, assemble_A(f.curve, 2));
    EXPECT_EQ(s.y.size(), s.rows());
    EXPECT_EQ(s.y.norm(), 0.0);
    auto ls = least_squares(s);
    EXPECT_TRUE(ls.h.is_zero());
    EXPECT_EQ(ls.residual, 0.0);
}

TEST(Tangency, SectionRequiresLegendrian) {
    auto f = io::read_curve(std::string(LEGKNOT_DATA_DIR) + "/hopf_fiber.json");
    EXPECT_EQ(code_of([&] { tangent_section(f.curve); }), errc::not_legendrian);
}

TEST(Tangency, AssembleYNeedsDegreeTwo) {
    auto c = torus_curve();
    EXPECT_EQ(code_of([&] { assemble_y(c, 1, assemble_A(c, 1)); }), errc::degree_too_small);
}

TEST(Tangency, LeastSquaresConsistentSystem) {
    std::mt19937_64 rng(6);
    std::normal_distribution<double> N;
    auto s = assemble_A(fixtures::best_fig8_s3(), 5);
    Eigen::VectorXcd x0(s.cols());
    for (auto& v : x0) v = cplx(N(rng), N(rng));
    s.y = s.A * x0;
    auto ls = least_squares(s);
    EXPECT_LE(ls.residual, 1e-10);
}

TEST(Tangency, TorusSolvedH) {
    auto c = torus_curve();
    auto s = assemble_y(c, 3, assemble_A(c, 3));
    EXPECT_EQ(s.y.size(), s.rows());
    auto ls = least_squares(s);
    EXPECT_LE(ls.residual, 1e-10);
    // H = -(5 / sqrt(3/5)) z1 z2^2 on the curve
    EXPECT_NEAR(ls.h.c(1, 2).real(), -5 / std::sqrt(0.6), 1e-9);
    EXPECT_NEAR(ls.h.c(1, 2).imag(), 0.0, 1e-9);
    auto rep = verify_candidate_h(ls.h, c);
    EXPECT_FALSE(rep.degenerate);
    EXPECT_LE(rep.max_parallelism, 1e-4);
    EXPECT_LE(rep.max_section_error, 1e-9 * rep.max_section);
}

TEST(Tangency, KediaHIsTangent) {
    auto rep = verify_candidate_h(kedia_h(2, 3), torus_curve());
    EXPECT_FALSE(rep.degenerate);
    EXPECT_LE(rep.max_parallelism, 1e-6);
}

TEST(Tangency, ZeroHIsDegenerate) {
    EXPECT_TRUE(verify_candidate_h(PolyC2(2), torus_curve()).degenerate);
}

TEST(Tangency, VerifyTorusG) {
    auto r = verify_candidate_G(torus_G(), torus_curve(), 512, 500);
    EXPECT_FALSE(r.trivial);
    EXPECT_LE(r.max_on_curve, 1e-10);
    // |grad G| = |(2 z1 z2^3, 3 z1^2 z2^2)| is constant on the curve
    double g1 = 2 * std::sqrt(0.4) * std::pow(0.6, 1.5), g2 = 3 * 0.4 * 0.6;
    EXPECT_NEAR(r.min_gradient, std::hypot(g1, g2), 1e-12);
    EXPECT_TRUE(verify_candidate_G(PolyC2(3), torus_curve()).trivial);
}

TEST(Tangency, VerifyGReportsOffCurveResidual) {
    PolyC2 g(1);
    g.c(1, 0) = 1.0;
    g.c(0, 0) = -1.0;
    auto c = fixtures::best_fig8_s3();
    auto r = verify_candidate_G(g, c, 512, 200);
    double worst = 0;
    for (int k = 0; k < 512; ++k) {
        auto p = c.point(two_pi * k / 512);
        worst = std::max(worst, std::abs(cplx(p[0], p[1]) - 1.0));
    }
    EXPECT_NEAR(r.max_on_curve, worst, 1e-14);
    EXPECT_GT(r.max_on_curve, 0.1);
}

TEST(Tangency, AlphaBetaValues) {
    auto [a, b] = alpha_beta(0, 0, 0, 0);
    EXPECT_NEAR(std::abs(a - cplx(-1.0)), 0.0, 1e-15);
    EXPECT_NEAR(std::abs(b), 0.0, 1e-15);
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-3, 3);
    for (int k = 0; k < 200; ++k) {
        auto [a2, b2] = alpha_beta(u(rng), u(rng), u(rng), u(rng));
        EXPECT_NEAR(std::norm(a2) + std::norm(b2), 1.0, 1e-12);
    }
    for (double t : {1e6, -1e6}) {
        auto [a3, b3] = alpha_beta(0.3, -0.7, 1.1, t);
        EXPECT_NEAR(std::abs(a3 - 1.0), 0.0, 1e-5);
        EXPECT_NEAR(std::abs(b3), 0.0, 1e-5);
    }
}

TEST(Tangency, AlphaBetaGradientsMatchDifferences) {
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(-2, 2);
    const double h = 1e-5;
    for (int k = 0; k < 50; ++k) {
        double p[4] = {u(rng), u(rng), u(rng), u(rng)};
        auto j = alpha_beta_jet(p[0], p[1], p[2], p[3]);
        for (int ax = 0; ax < 4; ++ax) {
            double q[4] = {p[0], p[1], p[2], p[3]}, r[4] = {p[0], p[1], p[2], p[3]};
            q[ax] += h;
            r[ax] -= h;
            auto [aq, bq] = alpha_beta(q[0], q[1], q[2], q[3]);
            auto [ar, br] = alpha_beta(r[0], r[1], r[2], r[3]);
            cplx da = (aq - ar) / (2 * h), db = (bq - br) / (2 * h);
            cplx ea = ax < 3 ? j.grad_alpha[ax] : j.dt_alpha, eb = ax < 3 ? j.grad_beta[ax] : j.dt_beta;
            EXPECT_LE(std::abs(da - ea), 1e-6 * std::max(1.0, std::abs(ea)));
            EXPECT_LE(std::abs(db - eb), 1e-6 * std::max(1.0, std::abs(eb)));
        }
    }
}

TEST(Tangency, BatemanBivectorIdentity) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(-2, 2);
    for (int k = 0; k < 100; ++k) {
        auto j = alpha_beta_jet(u(rng), u(rng), u(rng), u(rng));
        CVec3 lhs = bateman_bivector(j);
        CVec3 rhs = I * (j.dt_alpha * j.grad_beta - j.dt_beta * j.grad_alpha);
        EXPECT_LE((lhs - rhs).norm(), 1e-6 * lhs.norm());
    }
}

TEST(Tangency, BatemanFieldIsNull) {
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> u(-2, 2);
    PolyC2 h = kedia_h(2, 3);
    for (int k = 0; k < 100; ++k) {
        CVec3 F = bateman_field(h, u(rng), u(rng), u(rng), u(rng));
        cplx FF = F[0] * F[0] + F[1] * F[1] + F[2] * F[2];
        EXPECT_LE(std::abs(FF), 1e-8 * F.squaredNorm());
    }
}

// vacuum Maxwell by central differences, for h = 1 and for Kedia's h
TEST(Tangency, BatemanFieldSolvesMaxwell) {
    std::mt19937_64 rng(14);
    std::uniform_real_distribution<double> u(-1.5, 1.5);
    PolyC2 kedia = kedia_h(2, 3);
    std::vector<std::function<Eigen::Vector3cd(double, double, double, double)>> fields{
        [](double x, double y, double z, double t) { return bateman_field([](cplx, cplx) { return cplx(1.0); }, x, y, z, t); },
        [kedia](double x, double y, double z, double t) { return bateman_field(kedia, x, y, z, t); }};
    const double h = 1e-4;
    for (const auto& F : fields) {
        for (int k = 0; k < 30; ++k) {
            double x = u(rng), y = u(rng), z = u(rng), t = u(rng);
            Eigen::Vector3d dE[4], dB[4];
            for (int ax = 0; ax < 4; ++ax) {
                dE[ax] = fd_partial(F, ax, x, y, z, t, h, false);
                dB[ax] = fd_partial(F, ax, x, y, z, t, h, true);
            }
            double scale = 0;
            for (int ax = 0; ax < 4; ++ax) scale = std::max({scale, dE[ax].norm(), dB[ax].norm()});
            auto div = [&](const Eigen::Vector3d* d) { return d[0].x() + d[1].y() + d[2].z(); };
            auto curl = [&](const Eigen::Vector3d* d) {
                return Eigen::Vector3d(d[1].z() - d[2].y(), d[2].x() - d[0].z(), d[0].y() - d[1].x());
            };
            EXPECT_LE(std::abs(div(dE)), 1e-5 * scale);
            EXPECT_LE(std::abs(div(dB)), 1e-5 * scale);
            EXPECT_LE((curl(dE) + dB[3]).norm(), 1e-5 * scale);
            EXPECT_LE((curl(dB) - dE[3]).norm(), 1e-5 * scale);
        }
    }
}

TEST(Tangency, MatrixMarketExport) {
    auto s = assemble_A(torus_curve(), 2);
    std::ostringstream os;
    write_matrix_market(os, s.A);
    std::istringstream is(os.str());
    std::string header;
    std::getline(is, header);
    EXPECT_EQ(header, "%%MatrixMarket matrix coordinate complex general");
    long r, c, nnz;
    is >> r >> c >> nnz;
    EXPECT_EQ(r, s.rows());
    EXPECT_EQ(c, s.cols());
    long count = 0;
    int i, j;
    double re, im;
    while (is >> i >> j >> re >> im) {
        ++count;
        EXPECT_EQ(s.A(i - 1, j - 1), cplx(re, im));
    }
    EXPECT_EQ(count, nnz);

    std::ostringstream co;
    write_coefficients(co, torus_G());
    EXPECT_NE(co.str().find("2 3 1 0"), std::string::npos);
}
