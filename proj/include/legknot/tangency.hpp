#pragma once

// Linear systems for polynomials G(z1, z2) vanishing on a Legendrian curve in S^3
// and for h(z1, z2) agreeing with the tangent section H, plus the Bateman field
// F = h(alpha, beta) grad alpha x grad beta and candidate verification.

#include <algorithm>
#include <cmath>
#include <complex>
#include <ostream>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "dynamics.hpp"
#include "errors.hpp"
#include "geometry.hpp"
#include "legendrify.hpp"
#include "parallel.hpp"
#include "trigpoly.hpp"

namespace legknot {

// sum c(i, j) z1^i z2^j, 0 <= i, j <= n
struct PolyC2 {
    int n = 0;
    Eigen::MatrixXcd c = Eigen::MatrixXcd::Zero(1, 1);

    PolyC2() = default;
    explicit PolyC2(int deg) : n(deg), c(Eigen::MatrixXcd::Zero(deg + 1, deg + 1)) {}

    static PolyC2 monomial(int n, int i, int j, cplx coeff = 1.0) {
        PolyC2 p(n);
        p.c(i, j) = coeff;
        return p;
    }

    cplx operator()(cplx z1, cplx z2) const {
        cplx s = 0.0, p1 = 1.0;
        for (int i = 0; i <= n; ++i, p1 *= z1) {
            cplx row = 0.0;
            for (int j = n; j >= 0; --j) row = row * z2 + c(i, j);
            s += p1 * row;
        }
        return s;
    }
    std::pair<cplx, cplx> gradient(cplx z1, cplx z2) const {
        cplx g1 = 0.0, g2 = 0.0;
        for (int i = 0; i <= n; ++i)
            for (int j = 0; j <= n; ++j) {
                if (c(i, j) == cplx(0.0)) continue;
                if (i > 0) g1 += c(i, j) * double(i) * std::pow(z1, i - 1) * std::pow(z2, j);
                if (j > 0) g2 += c(i, j) * double(j) * std::pow(z1, i) * std::pow(z2, j - 1);
            }
        return {g1, g2};
    }
    double norm() const { return c.norm(); }
    bool is_zero() const { return c.cwiseAbs().maxCoeff() == 0.0; }
};

enum class Parity { automatic, even_only, all };

inline const char* parity_name(Parity p) {
    return p == Parity::automatic ? "auto" : p == Parity::even_only ? "even" : "all";
}

struct TangencySystem {
    int n = 0, D = 0;
    Parity parity = Parity::automatic;  // resolved policy after assembly
    std::vector<std::pair<int, int>> index;
    Eigen::MatrixXcd A;  // row k + D holds Fourier mode k
    Eigen::VectorXcd y;  // empty for the homogeneous system
    std::string curve_id;

    int rows() const { return int(A.rows()); }
    int cols() const { return int(A.cols()); }
    bool has_y() const { return y.size() > 0; }

    PolyC2 to_poly(const Eigen::VectorXcd& x) const {
        PolyC2 p(n);
        for (std::size_t k = 0; k < index.size(); ++k) p.c(index[k].first, index[k].second) = x[k];
        return p;
    }
    Eigen::VectorXcd to_vector(const PolyC2& p) const {
        Eigen::VectorXcd x(index.size());
        for (std::size_t k = 0; k < index.size(); ++k)
            x[k] = (index[k].first <= p.n && index[k].second <= p.n) ? p.c(index[k].first, index[k].second) : 0.0;
        return x;
    }
};

inline bool rho_is_constant(const S3Curve& c, double tol = 1e-13) {
    return c.rho.normalized(tol * std::max(1.0, std::abs(c.rho.a0))).degree() == 0;
}

inline ComplexTrigPoly z1_numerator(const S3Curve& c) { return ComplexTrigPoly::from_parts(c.n1, c.n2); }
inline ComplexTrigPoly z2_numerator(const S3Curve& c) { return ComplexTrigPoly::from_parts(c.n3, c.n4); }

// basis function for (i, j): w1^i w2^j rho^{(2n-i-j)/2}
struct BasisTables {
    std::vector<ComplexTrigPoly> w1, w2, rho;
    bool rho_const = false;
    double rho0 = 1.0;
    int n = 0;

    ComplexTrigPoly basis(int i, int j) const {
        ComplexTrigPoly p = w1[i] * w2[j];
        int e = 2 * n - i - j;
        if (rho_const) return p * cplx(std::pow(rho0, 0.5 * e));
        return p * rho[e / 2];
    }
};

inline BasisTables basis_tables(const S3Curve& c, int n, bool rho_const) {
    BasisTables b;
    b.n = n;
    b.rho_const = rho_const;
    b.rho0 = c.rho.a0;
    ComplexTrigPoly w1 = z1_numerator(c), w2 = z2_numerator(c);
    b.w1.push_back(ComplexTrigPoly(cplx(1.0)));
    b.w2.push_back(ComplexTrigPoly(cplx(1.0)));
    for (int k = 1; k <= n; ++k) {
        b.w1.push_back(b.w1.back() * w1);
        b.w2.push_back(b.w2.back() * w2);
    }
    if (!rho_const) {
        ComplexTrigPoly r = ComplexTrigPoly::from_real(c.rho);
        b.rho.push_back(ComplexTrigPoly(cplx(1.0)));
        for (int k = 1; k <= n; ++k) b.rho.push_back(pow(r, k));
    }
    return b;
}

inline std::vector<std::pair<int, int>> monomial_index(int n, bool even_only) {
    std::vector<std::pair<int, int>> idx;
    for (int i = 0; i <= n; ++i)
        for (int j = 0; j <= n; ++j)
            if (!even_only || (i + j) % 2 == 0) idx.push_back({i, j});
    return idx;
}

// Only dimensions; avoids allocating A.
inline std::pair<int, int> system_dimensions(const S3Curve& c, int n, Parity parity = Parity::automatic) {
    bool rc = rho_is_constant(c);
    bool even = parity == Parity::even_only || (parity == Parity::automatic && !rc);
    int d1 = z1_numerator(c).degree(), d2 = z2_numerator(c).degree(), dr = rc ? 0 : c.rho.degree();
    int D = 0, cols = 0;
    for (auto [i, j] : monomial_index(n, even)) {
        D = std::max(D, d1 * i + d2 * j + dr * ((2 * n - i - j) / 2));
        ++cols;
    }
    return {2 * D + 1, cols};
}

inline TangencySystem assemble_A(const S3Curve& c, int n, Parity parity = Parity::automatic, int threads = 1) {
    if (n < 0) throw error(errc::invalid_input, "n must be >= 0");
    bool rc = rho_is_constant(c);
    if (parity == Parity::all && !rc)
        throw error(errc::invalid_input, "odd i + j needs rho == const; use even-only");
    bool even = parity == Parity::even_only || (parity == Parity::automatic && !rc);
    TangencySystem s;
    s.n = n;
    s.parity = even ? Parity::even_only : Parity::all;
    s.index = monomial_index(n, even);
    BasisTables b = basis_tables(c, n, rc);
    std::vector<ComplexTrigPoly> cols(s.index.size());
    parallel_for(cols.size(), threads, [&](std::size_t k) { cols[k] = b.basis(s.index[k].first, s.index[k].second); });
    for (const auto& p : cols) s.D = std::max(s.D, p.degree());
    s.A = Eigen::MatrixXcd::Zero(2 * s.D + 1, cols.size());
    for (std::size_t k = 0; k < cols.size(); ++k)
        for (int m = -cols[k].D; m <= cols[k].D; ++m) s.A(m + s.D, k) = cols[k].c[m + cols[k].D];
    return s;
}

// Fourier synthesis of column k at t
inline cplx synthesize_column(const TangencySystem& s, int k, double t) {
    cplx v = 0.0;
    for (int m = -s.D; m <= s.D; ++m) v += s.A(m + s.D, k) * std::polar(1.0, m * t);
    return v;
}

struct Candidate {
    PolyC2 g;
    double sigma = 0;  // singular value, relative to sigma_max
};

struct NullspaceResult {
    std::vector<Candidate> candidates;
    Eigen::VectorXd singular_values;  // descending
};

inline NullspaceResult nullspace(const TangencySystem& s, double tol = 1e-8) {
    NullspaceResult r;
    Eigen::BDCSVD<Eigen::MatrixXcd> svd(s.A, Eigen::ComputeFullV);
    r.singular_values = svd.singularValues();
    const int cols = s.cols();
    double smax = r.singular_values.size() ? r.singular_values[0] : 0.0;
    const Eigen::MatrixXcd& V = svd.matrixV();
    for (int k = cols - 1; k >= 0; --k) {
        double sk = k < r.singular_values.size() ? r.singular_values[k] : 0.0;
        if (sk > tol * smax) break;
        r.candidates.push_back({s.to_poly(V.col(k)), smax > 0 ? sk / smax : 0.0});
    }
    return r;
}

// max_t |rho^n G(z(t))| via the numerators, i.e. sum c_ij w1^i w2^j rho^{(2n-i-j)/2}
inline double on_curve_residual(const PolyC2& g, const S3Curve& c, int samples = 2048) {
    double r = 0.0;
    for (int k = 0; k < samples; ++k) {
        double t = two_pi * k / samples;
        double R = std::sqrt(c.rho(t));
        auto [z1, z2] = c.z(t);
        r = std::max(r, std::abs(g(z1, z2)) * std::pow(R, 2 * g.n));
    }
    return r;
}

struct TangentSectionData {
    ComplexTrigPoly P;  // rho^2 H
    int n_min = 2;
};

// H = X.v2 + i X.v1 = i conj(z1 z2' - z2 z1')
inline cplx tangent_section_direct(const S3Curve& c, double t) {
    auto [z1, z2] = c.z(t);
    auto [d1, d2] = c.dz(t);
    return cplx(0.0, 1.0) * std::conj(z1 * d2 - z2 * d1);
}

// both frame components, for the orthonormality check
inline std::pair<double, double> contact_frame_components(const S3Curve& c, double t) {
    auto p = c.point(t);
    auto [d1, d2] = c.dz(t);
    double x1 = p[0], y1 = p[1], x2 = p[2], y2 = p[3];
    double dx1 = d1.real(), dy1 = d1.imag(), dx2 = d2.real(), dy2 = d2.imag();
    double v1 = -x2 * dx1 + y2 * dy1 + x1 * dx2 - y1 * dy2;
    double v2 = -y2 * dx1 - x2 * dy1 + y1 * dx2 + x1 * dy2;
    return {v1, v2};
}

// With z = N / R, rho (z1 z2' - z2 z1') = N1 N2' - N2 N1', so rho^2 H = i rho conj(N1 N2' - N2 N1').
inline TangentSectionData tangent_section(const S3Curve& c, double legendrian_tol = 1e-8) {
    auto res = legendrian_residual_s3(c);
    if (!(res.re <= legendrian_tol && res.im <= legendrian_tol))
        throw error(errc::not_legendrian, "S^3 residual (" + std::to_string(res.re) + ", " + std::to_string(res.im) +
                                              ") exceeds " + std::to_string(legendrian_tol));
    ComplexTrigPoly N1 = z1_numerator(c), N2 = z2_numerator(c);
    ComplexTrigPoly W = N1 * N2.derivative() - N2 * N1.derivative();
    TangentSectionData d;
    d.P = ComplexTrigPoly::from_real(c.rho) * W.conj() * cplx(0.0, 1.0);
    return d;
}

inline TangencySystem assemble_y(const S3Curve& c, int n, TangencySystem sys, double legendrian_tol = 1e-8) {
    if (n < 2) throw error(errc::degree_too_small, "h needs n >= 2, got " + std::to_string(n));
    if (n != sys.n) throw error(errc::invalid_input, "system was assembled for a different n");
    TangentSectionData ts = tangent_section(c, legendrian_tol);
    ComplexTrigPoly rhs = ts.P;
    if (rho_is_constant(c)) rhs *= cplx(std::pow(c.rho.a0, n - 2));
    else rhs = rhs * pow(ComplexTrigPoly::from_real(c.rho), n - 2);
    rhs = rhs.trimmed(1e-14 * std::max(1.0, rhs.norm2()));
    if (rhs.D > sys.D) throw error(errc::invalid_input, "right-hand side degree exceeds the system's modes");
    sys.y = Eigen::VectorXcd::Zero(sys.rows());
    for (int m = -rhs.D; m <= rhs.D; ++m) sys.y[m + sys.D] = rhs.c[m + rhs.D];
    return sys;
}

struct LeastSquares {
    PolyC2 h;
    double residual = 0;  // |Ax - y| / |y|, 0 when y = 0
    int rank = 0;
};

inline LeastSquares least_squares(const TangencySystem& s) {
    if (!s.has_y()) throw error(errc::invalid_input, "system has no right-hand side");
    LeastSquares out;
    double ny = s.y.norm();
    if (ny == 0.0) {
        out.h = PolyC2(s.n);
        return out;
    }
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(s.A);
    Eigen::VectorXcd x = cod.solve(s.y);
    out.rank = int(cod.rank());
    out.h = s.to_poly(x);
    out.residual = (s.A * x - s.y).norm() / ny;
    return out;
}

// bilinear cross product; Eigen's cross() conjugates complex results
inline CVec3 cross_bilinear(const CVec3& a, const CVec3& b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

// grad alpha x grad beta
inline CVec3 bateman_bivector(const AlphaBetaJet& j) { return cross_bilinear(j.grad_alpha, j.grad_beta); }

template <class H>
CVec3 bateman_field(const H& h, double x, double y, double z, double t) {
    auto j = alpha_beta_jet(x, y, z, t);
    return h(j.alpha, j.beta) * bateman_bivector(j);
}

struct GReport {
    bool trivial = false;
    double max_on_curve = 0;      // max |G| at curve points
    double min_gradient = 0;      // min |grad G| at curve points
    double min_interior = 0;      // Monte-Carlo min |G| over the open unit ball
    double min_sphere_off_curve = 0;  // Monte-Carlo min |G| on S^3 away from the curve
};

inline std::array<double, 4> random_unit4(std::mt19937_64& rng) {
    std::normal_distribution<double> N;
    std::array<double, 4> p{N(rng), N(rng), N(rng), N(rng)};
    double r = std::sqrt(p[0] * p[0] + p[1] * p[1] + p[2] * p[2] + p[3] * p[3]);
    for (auto& v : p) v /= r;
    return p;
}

// heuristics only; interior and off-curve minima are sampled, not certified
inline GReport verify_candidate_G(const PolyC2& g, const S3Curve& c, int samples = 1024, int mc = 4000,
                                  std::uint64_t seed = 1, double off_curve = 0.1) {
    GReport r;
    if (g.is_zero()) {
        r.trivial = true;
        return r;
    }
    r.min_gradient = std::numeric_limits<double>::infinity();
    std::vector<std::array<double, 4>> pts;
    for (int k = 0; k < samples; ++k) {
        double t = two_pi * k / samples;
        auto [z1, z2] = c.z(t);
        pts.push_back(c.point(t));
        r.max_on_curve = std::max(r.max_on_curve, std::abs(g(z1, z2)));
        auto [g1, g2] = g.gradient(z1, z2);
        r.min_gradient = std::min(r.min_gradient, std::sqrt(std::norm(g1) + std::norm(g2)));
    }
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    r.min_interior = r.min_sphere_off_curve = std::numeric_limits<double>::infinity();
    for (int k = 0; k < mc; ++k) {
        auto p = random_unit4(rng);
        double rad = std::pow(U(rng), 0.25) * (1 - 1e-9);
        cplx z1(p[0], p[1]), z2(p[2], p[3]);
        r.min_interior = std::min(r.min_interior, std::abs(g(rad * z1, rad * z2)));
        double dmin = std::numeric_limits<double>::infinity();
        for (const auto& q : pts) {
            double d = 0;
            for (int i = 0; i < 4; ++i) d += (p[i] - q[i]) * (p[i] - q[i]);
            dmin = std::min(dmin, d);
        }
        if (std::sqrt(dmin) > off_curve) r.min_sphere_off_curve = std::min(r.min_sphere_off_curve, std::abs(g(z1, z2)));
    }
    return r;
}

struct HReport {
    bool degenerate = false;  // h vanishes or B = 0 somewhere on the curve
    double max_parallelism = 0;  // max |B x T| / (|B| |T|)
    double max_section_error = 0;  // max |h(z(t)) - H(t)|
    double max_section = 0;
};

inline HReport verify_candidate_h(const PolyC2& h, const S3Curve& c, int samples = 256) {
    HReport r;
    if (h.is_zero()) {
        r.degenerate = true;
        return r;
    }
    for (int k = 0; k < samples; ++k) {
        double t = two_pi * k / samples;
        auto [z1, z2] = c.z(t);
        auto [d1, d2] = c.dz(t);
        cplx H = tangent_section_direct(c, t);
        r.max_section_error = std::max(r.max_section_error, std::abs(h(z1, z2) - H));
        r.max_section = std::max(r.max_section, std::abs(H));
        Vec3 q = phi0(z1, z2), T = phi0_velocity(z1, z2, d1, d2);
        Vec3 B = bateman_field(h, q.x(), q.y(), q.z(), 0.0).imag();
        double nb = B.norm(), nt = T.norm();
        if (!(nb > 1e-300) || !(nt > 0)) {
            r.degenerate = true;
            continue;
        }
        r.max_parallelism = std::max(r.max_parallelism, B.cross(T).norm() / (nb * nt));
    }
    return r;
}

// Kedia's h = z1^{p-1} z2^{q-1} for a (p, q) torus knot
inline PolyC2 kedia_h(int p, int q) {
    int n = std::max(p - 1, q - 1);
    return PolyC2::monomial(n, p - 1, q - 1);
}

inline void write_matrix_market(std::ostream& os, const Eigen::MatrixXcd& A) {
    long nnz = 0;
    for (int j = 0; j < A.cols(); ++j)
        for (int i = 0; i < A.rows(); ++i) nnz += A(i, j) != cplx(0.0);
    os << "%%MatrixMarket matrix coordinate complex general\n";
    os << A.rows() << ' ' << A.cols() << ' ' << nnz << '\n';
    os.precision(17);
    for (int j = 0; j < A.cols(); ++j)
        for (int i = 0; i < A.rows(); ++i)
            if (A(i, j) != cplx(0.0)) os << i + 1 << ' ' << j + 1 << ' ' << A(i, j).real() << ' ' << A(i, j).imag() << '\n';
}

inline void write_matrix_market(std::ostream& os, const Eigen::VectorXcd& y) {
    os << "%%MatrixMarket matrix array complex general\n";
    os << y.size() << " 1\n";
    os.precision(17);
    for (int i = 0; i < y.size(); ++i) os << y[i].real() << ' ' << y[i].imag() << '\n';
}

// (i, j, re, im) rows for the nonzero coefficients
inline void write_coefficients(std::ostream& os, const PolyC2& p, double tol = 0.0) {
    os << "# i j re im\n";
    os.precision(17);
    for (int i = 0; i <= p.n; ++i)
        for (int j = 0; j <= p.n; ++j)
            if (std::abs(p.c(i, j)) > tol) os << i << ' ' << j << ' ' << p.c(i, j).real() << ' ' << p.c(i, j).imag() << '\n';
}

} // namespace legknot
