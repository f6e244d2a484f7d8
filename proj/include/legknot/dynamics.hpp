#pragma once

// Bateman fields of Hopf type: the map (alpha, beta) from spacetime to S^3, the
// projections phi_t, the closed-form inverse isotopy Phi_t^{-1}, the normalised
// Poynting field and the forward evolution of curves by Newton continuation.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "legendrify.hpp"
#include "parallel.hpp"
#include "planar.hpp"
#include "trigpoly.hpp"

namespace legknot {

using CVec3 = Eigen::Vector3cd;

// (alpha, beta) with spatial gradients and time derivatives
struct AlphaBetaJet {
    cplx alpha, beta;
    CVec3 grad_alpha, grad_beta;
    cplx dt_alpha, dt_beta;
};

inline AlphaBetaJet alpha_beta_jet(double x, double y, double z, double t) {
    const cplx I(0.0, 1.0);
    double r2 = x * x + y * y + z * z;
    cplx den = r2 - (t - I) * (t - I);
    cplx num = r2 - t * t - 1.0 + 2.0 * I * z;
    cplx bn = 2.0 * cplx(x, -y);
    AlphaBetaJet j;
    j.alpha = num / den;
    j.beta = bn / den;
    cplx den2 = den * den;
    // d num = (2x, 2y, 2z + 2i), d den = (2x, 2y, 2z); time: -2t and -2(t - i)
    CVec3 dnum(2 * x, 2 * y, 2 * z + 2.0 * I), dden(2 * x, 2 * y, 2 * z);
    CVec3 dbn(2.0, -2.0 * I, 0.0);
    j.grad_alpha = (dnum * den - num * dden) / den2;
    j.grad_beta = (dbn * den - bn * dden) / den2;
    cplx tden = -2.0 * (t - I);
    j.dt_alpha = (-2.0 * t * den - num * tden) / den2;
    j.dt_beta = -bn * tden / den2;
    return j;
}

inline std::pair<cplx, cplx> alpha_beta(double x, double y, double z, double t) {
    auto j = alpha_beta_jet(x, y, z, t);
    return {j.alpha, j.beta};
}

// stereographic projection with a mirror; inverse of (alpha, beta) at t = 0
inline Vec3 phi0(cplx alpha, cplx beta) {
    double d = 1.0 - alpha.real();
    if (std::abs(d) < 1e-14) throw error(errc::at_infinity, "point (1, 0) maps to infinity");
    return {beta.real() / d, -beta.imag() / d, alpha.imag() / d};
}

inline Vec3 phi0(const std::array<double, 4>& p) { return phi0(cplx(p[0], p[1]), cplx(p[2], p[3])); }

// velocity of phi0 along a curve with (z1, z2)' = (d1, d2)
inline Vec3 phi0_velocity(cplx a, cplx b, cplx da, cplx db) {
    double d = 1.0 - a.real(), dd = -da.real();
    Vec3 u(b.real(), -b.imag(), a.imag()), du(db.real(), -db.imag(), da.imag());
    return (du * d - u * dd) / (d * d);
}

namespace detail {

// S = |q|^2 - t^2 + 1 and Q = x^2 + y^2 + (z - t)^2 + 1, with z^2 - t^2 factored
inline void phi_inverse_parts(const Vec3& q, double t, double& S, double& Q) {
    double x = q.x(), y = q.y(), z = q.z();
    S = x * x + y * y + (z - t) * (z + t) + 1.0;
    Q = x * x + y * y + (z - t) * (z - t) + 1.0;
}

} // namespace detail

inline Vec3 phi_t_inverse(const Vec3& q, double t) {
    double S, Q;
    detail::phi_inverse_parts(q, t, S, Q);
    double x = q.x(), y = q.y(), z = q.z();
    return Vec3(-2 * t * y + x * S, 2 * t * x + y * S, (z - t) * S + 2 * t) / Q;
}

inline Eigen::Matrix3d phi_t_inverse_jacobian(const Vec3& q, double t) {
    double S, Q;
    detail::phi_inverse_parts(q, t, S, Q);
    double x = q.x(), y = q.y(), z = q.z();
    Vec3 F = phi_t_inverse(q, t);
    Eigen::Matrix3d dN;
    dN << S + 2 * x * x, -2 * t + 2 * x * y, 2 * x * z,
          2 * t + 2 * x * y, S + 2 * y * y, 2 * y * z,
          2 * x * (z - t), 2 * y * (z - t), S + 2 * z * (z - t);
    Eigen::RowVector3d dQ(2 * x, 2 * y, 2 * (z - t));
    return (dN - F * dQ) / Q;
}

// unit vector field; second component carries -x (+x would break |V| = 1)
inline Vec3 poynting_V(double x, double y, double z, double t) {
    double Q = x * x + y * y + (z - t) * (z - t) + 1.0;
    return Vec3(2 * (x * (t - z) + y), 2 * (y * (t - z) - x), x * x + y * y - (z - t) * (z - t) - 1.0) / Q;
}

inline Vec3 poynting_V(const Vec3& q, double t) { return poynting_V(q.x(), q.y(), q.z(), t); }

struct NewtonOptions {
    double tol = 1e-9;  // on |Phi_t^{-1}(q) - p|, scaled by max(1, |p|)
    int max_iterations = 100;
    int max_halvings = 40;
};

namespace detail {

inline std::optional<Vec3> newton_inverse(const Vec3& p, double t, Vec3 q, const NewtonOptions& o, int& iters) {
    double tol = o.tol * std::max(1.0, p.norm());
    Vec3 F = phi_t_inverse(q, t) - p;
    double r = F.norm();
    for (iters = 0; iters < o.max_iterations; ++iters) {
        if (r <= tol) return q;
        Vec3 step = phi_t_inverse_jacobian(q, t).partialPivLu().solve(-F);
        if (!step.allFinite()) return std::nullopt;
        double lam = 1.0;
        bool improved = false;
        for (int h = 0; h < o.max_halvings; ++h, lam *= 0.5) {
            Vec3 qn = q + lam * step;
            Vec3 Fn = phi_t_inverse(qn, t) - p;
            if (Fn.norm() < r) {
                q = qn;
                F = Fn;
                r = Fn.norm();
                improved = true;
                break;
            }
        }
        if (!improved) return r <= 10 * tol ? std::optional<Vec3>(q) : std::nullopt;
    }
    return r <= tol ? std::optional<Vec3>(q) : std::nullopt;
}

} // namespace detail

// Continuation from a known solution q0 at time t0 to time t. Steps follow the
// Poynting field as a predictor and halve on Newton failure.
inline Vec3 phi_t_forward_from(const Vec3& p, double t, Vec3 q0, double t0, const NewtonOptions& o = {}) {
    double tc = t0;
    Vec3 q = q0;
    int iters = 0;
    while (tc != t) {
        double dir = t > tc ? 1.0 : -1.0;
        double h = std::max(0.25, 0.2 * std::abs(tc));
        bool done = false;
        for (int k = 0; k < 60 && !done; ++k, h *= 0.5) {
            double tn = std::abs(t - tc) <= h ? t : tc + dir * h;
            // midpoint predictor
            Vec3 mid = q + 0.5 * (tn - tc) * poynting_V(q, tc);
            Vec3 guess = q + (tn - tc) * poynting_V(mid, 0.5 * (tc + tn));
            if (auto s = detail::newton_inverse(p, tn, guess, o, iters)) {
                q = *s;
                tc = tn;
                done = true;
            }
        }
        if (!done)
            throw error(errc::no_convergence, "continuation stalled at t = " + std::to_string(tc) + " towards " +
                                                  std::to_string(t));
    }
    return q;
}

inline Vec3 phi_t_forward(const Vec3& p, double t, std::optional<Vec3> seed = std::nullopt,
                          const NewtonOptions& o = {}) {
    if (t == 0.0) return p;
    if (seed) {
        int iters = 0;
        if (auto s = detail::newton_inverse(p, t, *seed, o, iters)) return *s;
    }
    return phi_t_forward_from(p, t, p, 0.0, o);
}

struct EvolutionFrame {
    double t = 0;
    std::vector<Vec3> points;
    std::vector<bool> converged;
};

// phi0 of the curve at `samples` uniform parameters
inline std::vector<Vec3> curve_in_r3(const S3Curve& c, int samples) {
    std::vector<Vec3> pts(samples);
    for (int k = 0; k < samples; ++k) {
        auto [z1, z2] = c.z(two_pi * k / samples);
        pts[k] = phi0(z1, z2);
    }
    return pts;
}

// Frames in the order of `times`. Positive and negative times are each swept
// outward from 0 so every solve is seeded by the previous frame.
inline std::vector<EvolutionFrame> evolve_frames(const S3Curve& c, const std::vector<double>& times, int samples,
                                                 int threads = 1, const NewtonOptions& o = {}) {
    for (int k = 0; k < samples; ++k) {
        auto p = c.point(two_pi * k / samples);
        if (std::abs(1.0 - p[0]) < 1e-12 && std::abs(p[1]) < 1e-12)
            throw error(errc::at_infinity, "curve passes through (1, 0)");
    }
    const std::vector<Vec3> base = curve_in_r3(c, samples);
    std::vector<EvolutionFrame> frames(times.size());
    std::vector<std::size_t> pos, neg;
    for (std::size_t i = 0; i < times.size(); ++i) (times[i] >= 0 ? pos : neg).push_back(i);
    std::sort(pos.begin(), pos.end(), [&](auto a, auto b) { return times[a] < times[b]; });
    std::sort(neg.begin(), neg.end(), [&](auto a, auto b) { return times[a] > times[b]; });
    for (const auto* order : {&pos, &neg}) {
        std::vector<Vec3> prev = base;
        std::vector<bool> ok(samples, true);
        double tp = 0.0;
        for (std::size_t idx : *order) {
            double t = times[idx];
            EvolutionFrame f;
            f.t = t;
            f.points.resize(samples);
            std::vector<char> conv(samples, 1);
            parallel_for(samples, threads, [&](std::size_t k) {
                try {
                    f.points[k] = ok[k] ? phi_t_forward_from(base[k], t, prev[k], tp, o) : phi_t_forward(base[k], t);
                } catch (const error&) {
                    f.points[k] = Vec3::Constant(std::nan(""));
                    conv[k] = 0;
                }
            });
            f.converged.assign(conv.begin(), conv.end());
            for (int k = 0; k < samples; ++k)
                if (conv[k]) prev[k] = f.points[k];
            ok.assign(conv.begin(), conv.end());
            tp = t;
            frames[idx] = std::move(f);
        }
    }
    return frames;
}

inline double min_distance_to_origin(const EvolutionFrame& f) {
    double m = std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k < f.points.size(); ++k)
        if (f.converged[k]) m = std::min(m, f.points[k].norm());
    return m;
}

inline double mean_z(const EvolutionFrame& f) {
    double s = 0;
    int n = 0;
    for (std::size_t k = 0; k < f.points.size(); ++k)
        if (f.converged[k]) {
            s += f.points[k].z();
            ++n;
        }
    return n ? s / n : std::nan("");
}

// counts of z-values in `bins` equal bins between the frame's min and max z
inline std::vector<int> z_histogram(const EvolutionFrame& f, int bins, double* lo = nullptr, double* hi = nullptr) {
    double a = std::numeric_limits<double>::infinity(), b = -a;
    for (std::size_t k = 0; k < f.points.size(); ++k)
        if (f.converged[k]) {
            a = std::min(a, f.points[k].z());
            b = std::max(b, f.points[k].z());
        }
    std::vector<int> h(bins, 0);
    if (lo) *lo = a;
    if (hi) *hi = b;
    if (!(b >= a)) return h;
    for (std::size_t k = 0; k < f.points.size(); ++k) {
        if (!f.converged[k]) continue;
        int i = b > a ? int((f.points[k].z() - a) / (b - a) * bins) : 0;
        h[std::clamp(i, 0, bins - 1)]++;
    }
    return h;
}

struct EscapeReport {
    double T_plus = 0, T_minus = 0;
    std::vector<std::pair<double, double>> profile;  // (t, min distance to origin)
};

// t_grid holds positive magnitudes; both signs are evaluated. T is the smallest
// grid time (or 0) after which every frame stays outside the ball.
inline EscapeReport escape_time(const S3Curve& c, double radius, std::vector<double> t_grid, int samples = 256,
                                int threads = 1) {
    std::sort(t_grid.begin(), t_grid.end());
    std::vector<double> times{0.0};
    for (double t : t_grid)
        if (t > 0) {
            times.push_back(t);
            times.push_back(-t);
        }
    auto frames = evolve_frames(c, times, samples, threads);
    EscapeReport r;
    std::vector<double> dplus{min_distance_to_origin(frames[0])}, dminus{dplus[0]}, tp{0.0};
    for (std::size_t i = 1; i < times.size(); i += 2) {
        tp.push_back(times[i]);
        dplus.push_back(min_distance_to_origin(frames[i]));
        dminus.push_back(min_distance_to_origin(frames[i + 1]));
    }
    for (std::size_t i = 0; i < frames.size(); ++i) r.profile.push_back({frames[i].t, min_distance_to_origin(frames[i])});
    std::sort(r.profile.begin(), r.profile.end());
    auto tail = [&](const std::vector<double>& d, const char* which) {
        if (!(d.back() > radius))
            throw error(errc::not_escaped_in_grid, std::string("curve still meets the ball at the last ") + which +
                                                       " grid time " + std::to_string(tp.back()));
        std::size_t i = d.size() - 1;
        while (i > 0 && d[i - 1] > radius) --i;
        return tp[i];
    };
    r.T_plus = tail(dplus, "positive");
    r.T_minus = -tail(dminus, "negative");
    return r;
}

} // namespace legknot
