#pragma once

// Contact-geometric residuals, the xi1 -> xi2 contactomorphism, front lifts and
// the radial projection from S^3 back to the tangent space at (1, 0).

#include <array>
#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "legendrify.hpp"
#include "planar.hpp"
#include "trigpoly.hpp"

namespace legknot {

// xi1: dz + x dy = 0, xi2: dZ + X dY - Y dX = 0
enum class ContactModel { xi1, xi2 };

struct SpaceCurveR3 {
    std::function<Vec3(double)> pos, vel;
    ContactModel model = ContactModel::xi2;

    Vec3 operator()(double t) const { return pos(t); }

    static SpaceCurveR3 from_trig(const TrigPoly& x, const TrigPoly& y, const TrigPoly& z, ContactModel m) {
        SpaceCurveR3 c;
        c.pos = [x, y, z](double t) { return Vec3(x(t), y(t), z(t)); };
        c.vel = [x, y, z](double t) { return Vec3(x.eval(t, 1), y.eval(t, 1), z.eval(t, 1)); };
        c.model = m;
        return c;
    }
    static SpaceCurveR3 from_legendrian(const LegendrianR3Curve& l) {
        return from_trig(l.X, l.Y, l.Z, ContactModel::xi2);
    }
};

inline double contact_form(const Vec3& p, const Vec3& v, ContactModel m) {
    if (m == ContactModel::xi1) return v.z() + p.x() * v.y();
    return v.z() + p.x() * v.y() - p.y() * v.x();
}

inline double legendrian_residual_r3(const SpaceCurveR3& c, int samples = 2048) {
    double r = 0.0;
    for (int k = 0; k < samples; ++k) {
        double t = two_pi * k / samples;
        r = std::max(r, std::abs(contact_form(c.pos(t), c.vel(t), c.model)));
    }
    return r;
}

struct S3Residual {
    double re = 0, im = 0;
};

// conj(z1) z1' + conj(z2) z2' for a pointwise S^3 curve
using S3PointFn = std::function<void(double, std::complex<double>&, std::complex<double>&, std::complex<double>&,
                                     std::complex<double>&)>;

inline S3Residual legendrian_residual_s3(const S3PointFn& f, int samples = 2048) {
    S3Residual r;
    for (int k = 0; k < samples; ++k) {
        double t = two_pi * k / samples;
        cplx z1, z2, d1, d2;
        f(t, z1, z2, d1, d2);
        cplx s = std::conj(z1) * d1 + std::conj(z2) * d2;
        r.re = std::max(r.re, std::abs(s.real()));
        r.im = std::max(r.im, std::abs(s.imag()));
    }
    return r;
}

inline S3Residual legendrian_residual_s3(const S3Curve& c, int samples = 2048) {
    return legendrian_residual_s3(
        [&c](double t, cplx& z1, cplx& z2, cplx& d1, cplx& d2) {
            std::tie(z1, z2) = c.z(t);
            std::tie(d1, d2) = c.dz(t);
        },
        samples);
}

// Legendrian (2,3) torus curve z1 = sqrt(2/5) e^{3it}, z2 = sqrt(3/5) e^{-2it}; rho == 1
inline S3Curve torus_curve() {
    S3Curve c;
    double a = std::sqrt(0.4), b = std::sqrt(0.6);
    c.n1 = TrigPoly::cos_mode(3, a);
    c.n2 = TrigPoly::sin_mode(3, a);
    c.n3 = TrigPoly::cos_mode(2, b);
    c.n4 = TrigPoly::sin_mode(2, -b);
    c.rho = TrigPoly(1.0);
    return c;
}

inline Vec3 xi1_to_xi2(const Vec3& p) {
    return {(p.x() + p.y()) / 2, (p.y() - p.x()) / 2, p.z() + p.x() * p.y() / 2};
}

inline SpaceCurveR3 xi1_to_xi2(const SpaceCurveR3& c) {
    SpaceCurveR3 out;
    out.model = ContactModel::xi2;
    out.pos = [c](double t) { return xi1_to_xi2(c.pos(t)); };
    out.vel = [c](double t) {
        Vec3 p = c.pos(t), v = c.vel(t);
        return Vec3((v.x() + v.y()) / 2, (v.y() - v.x()) / 2, v.z() + (v.x() * p.y() + p.x() * v.y()) / 2);
    };
    return out;
}

struct FrontArc {
    double t0 = 0, t1 = two_pi;
    TrigPoly y, z;
};

struct FrontCurve {
    std::vector<FrontArc> arcs;  // cover [0, 2pi) in order
    std::vector<double> cusps;

    const FrontArc& arc_at(double t) const {
        t = wrap_param(t, two_pi);
        for (const auto& a : arcs)
            if (t >= a.t0 && t < a.t1) return a;
        return arcs.back();
    }
    double y(double t, int k = 0) const { return arc_at(t).y.eval(t, k); }
    double z(double t, int k = 0) const { return arc_at(t).z.eval(t, k); }
};

struct FrontLiftOptions {
    double guard = 1e-3;       // parameter radius around each cusp
    double rate_tol = 1e-8;    // |y''| at a cusp below this (relative) is ill-conditioned
    double jump_tol = 1e-2;    // mismatch between the limit and the one-sided values
};

// x = -z'/y'; inside the guard band x is the quadratic through the two band
// edges and the L'Hopital value -z''/y'' at the cusp.
inline SpaceCurveR3 front_lift(const FrontCurve& f, const FrontLiftOptions& o = {}) {
    if (f.arcs.empty()) throw error(errc::invalid_input, "front has no arcs");
    struct Band {
        double tc, xl, xc, xr;
    };
    std::vector<Band> bands;
    auto ratio = [&f](double t) { return -f.z(t, 1) / f.y(t, 1); };
    for (double tc : f.cusps) {
        double y2 = f.y(tc, 2), z2 = f.z(tc, 2);
        double scale = std::max({1.0, std::abs(z2), std::abs(f.y(tc, 3))});
        if (std::abs(y2) < o.rate_tol * scale)
            throw error(errc::cusp_ill_conditioned, "y'' vanishes at cusp t = " + std::to_string(tc) +
                                                        " (y'' = " + std::to_string(y2) + ")");
        Band b{tc, ratio(tc - o.guard), -z2 / y2, ratio(tc + o.guard)};
        double tol = o.jump_tol * (1.0 + std::abs(b.xc));
        if (!(std::abs(b.xl - b.xc) <= tol && std::abs(b.xr - b.xc) <= tol))
            throw error(errc::cusp_ill_conditioned, "x jumps at cusp t = " + std::to_string(tc) + ": left " +
                                                        std::to_string(b.xl) + ", limit " + std::to_string(b.xc) +
                                                        ", right " + std::to_string(b.xr));
        bands.push_back(b);
    }
    auto x_of = [f, bands, o, ratio](double t, double& x, double& dx) {
        t = wrap_param(t, two_pi);
        for (const auto& b : bands) {
            double s = t - b.tc;
            if (s > pi) s -= two_pi;
            if (s < -pi) s += two_pi;
            if (std::abs(s) < o.guard) {
                double g = o.guard;
                // quadratic through (-g, xl), (0, xc), (g, xr)
                double c1 = (b.xr - b.xl) / (2 * g), c2 = (b.xr - 2 * b.xc + b.xl) / (2 * g * g);
                x = b.xc + c1 * s + c2 * s * s;
                dx = c1 + 2 * c2 * s;
                return;
            }
        }
        double y1 = f.y(t, 1), z1 = f.z(t, 1), y2 = f.y(t, 2), z2 = f.z(t, 2);
        x = -z1 / y1;
        dx = -(z2 * y1 - z1 * y2) / (y1 * y1);
    };
    SpaceCurveR3 c;
    c.model = ContactModel::xi1;
    c.pos = [f, x_of](double t) {
        double x, dx;
        x_of(t, x, dx);
        return Vec3(x, f.y(t), f.z(t));
    };
    c.vel = [f, x_of](double t) {
        double x, dx;
        x_of(t, x, dx);
        return Vec3(dx, f.y(t, 1), f.z(t, 1));
    };
    return c;
}

// the over strand of a xi1 front has the smaller slope dz/dy
inline bool crossing_sign_front(double slope_over, double slope_under) {
    if (!std::isfinite(slope_over) || !std::isfinite(slope_under))
        throw error(errc::invalid_input, "front slopes must be finite");
    if (slope_over == slope_under) throw error(errc::equal_slopes, "over and under strands have equal slopes");
    return slope_over < slope_under;
}

inline Vec3 tangent_space_point(const std::array<double, 4>& p) {
    if (!(p[0] > 0)) throw error(errc::not_in_right_half_sphere, "x1 = " + std::to_string(p[0]) + " <= 0");
    return {p[2] / p[0], p[3] / p[0], p[1] / p[0]};
}

inline std::array<double, 4> s3_from_tangent_space(const Vec3& q) {
    double R = std::sqrt(1.0 + q.squaredNorm());
    return {1.0 / R, q.z() / R, q.x() / R, q.y() / R};
}

// (X, Y, Z) = (x2/x1, y2/x1, y1/x1); x1 is checked on `samples` points
inline SpaceCurveR3 tangent_space_project(const S3Curve& c, int samples = 2048) {
    for (int k = 0; k < samples; ++k) {
        double t = two_pi * k / samples;
        if (!(c.n1(t) > 0))
            throw error(errc::not_in_right_half_sphere, "x1 <= 0 at t = " + std::to_string(t));
    }
    SpaceCurveR3 out;
    out.model = ContactModel::xi2;
    // the radial factor cancels, so the numerators suffice
    out.pos = [c](double t) {
        double n1 = c.n1(t);
        return Vec3(c.n3(t) / n1, c.n4(t) / n1, c.n2(t) / n1);
    };
    out.vel = [c](double t) {
        double n1 = c.n1(t), d1 = c.n1.eval(t, 1);
        auto q = [&](const TrigPoly& n) { return (n.eval(t, 1) * n1 - n(t) * d1) / (n1 * n1); };
        return Vec3(q(c.n3), q(c.n4), q(c.n2));
    };
    return out;
}

} // namespace legknot
