#pragma once

// Second half of the build: Fourier approximation, balancing, the Legendrian lift,
// the map to S^3 and the knot-type check with degree escalation.

#include <chrono>
#include <optional>
#include <string>
#include <vector>

#include "diagram.hpp"
#include "errors.hpp"
#include "knot.hpp"
#include "planar.hpp"
#include "trigpoly.hpp"

namespace legknot {

// Z' + X Y' - Y X' = 0 holds coefficientwise
struct LegendrianR3Curve {
    TrigPoly X, Y, Z;
    int degree() const { return std::max({X.degree(), Y.degree(), Z.degree()}); }
};

// coordinate i is n_i / sqrt(rho); z1 = (n1 + i n2) / R, z2 = (n3 + i n4) / R
struct S3Curve {
    TrigPoly n1, n2, n3, n4, rho;

    std::array<double, 4> point(double t) const {
        double R = std::sqrt(rho(t));
        return {n1(t) / R, n2(t) / R, n3(t) / R, n4(t) / R};
    }
    std::pair<cplx, cplx> z(double t) const {
        auto p = point(t);
        return {cplx(p[0], p[1]), cplx(p[2], p[3])};
    }
    // derivative of (z1, z2) using x_i' = (n_i' rho - n_i rho' / 2) / rho^{3/2}
    std::pair<cplx, cplx> dz(double t) const {
        double r = rho(t), dr = rho.eval(t, 1), r32 = r * std::sqrt(r);
        auto d = [&](const TrigPoly& n) { return (n.eval(t, 1) * r - 0.5 * n(t) * dr) / r32; };
        return {cplx(d(n1), d(n2)), cplx(d(n3), d(n4))};
    }
    int degree() const { return std::max({n1.degree(), n2.degree(), n3.degree(), n4.degree()}); }
};

// rho - sum n_i^2, coefficientwise max
inline double rho_identity_defect(const S3Curve& c) {
    TrigPoly d = c.rho - (c.n1 * c.n1 + c.n2 * c.n2 + c.n3 * c.n3 + c.n4 * c.n4);
    return d.max_abs_coeff();
}

struct FourierStage {
    TrigPoly X, Y;
    double c0_deviation = 0;  // max sample distance between curve and approximation
    double c1_deviation = 0;  // same for velocities
    double tail_ratio = 0;
    int samples = 0;
};

inline FourierStage fourier_stage(const PiecewiseCurve& pc, int degree, int oversample = 8) {
    const int M = projection_sample_count(degree, oversample);
    std::vector<double> xs(M), ys(M), vx(M), vy(M);
    for (int k = 0; k < M; ++k) {
        Vec2 p, v;
        pc.eval(two_pi * k / M, p, v);
        xs[k] = p.x();
        ys[k] = p.y();
        vx[k] = v.x();
        vy[k] = v.y();
    }
    auto fx = fourier_project_samples(xs, degree), fy = fourier_project_samples(ys, degree);
    FourierStage s;
    s.X = fx.p;
    s.Y = fy.p;
    s.samples = M;
    s.tail_ratio = std::max(fx.tail_ratio, fy.tail_ratio);
    auto ax = sample_uniform(s.X, M), ay = sample_uniform(s.Y, M);
    auto dx = sample_uniform(s.X.derivative(), M), dy = sample_uniform(s.Y.derivative(), M);
    for (int k = 0; k < M; ++k) {
        s.c0_deviation = std::max(s.c0_deviation, std::hypot(ax[k] - xs[k], ay[k] - ys[k]));
        s.c1_deviation = std::max(s.c1_deviation, std::hypot(dx[k] - vx[k], dy[k] - vy[k]));
    }
    return s;
}

struct Lift {
    LegendrianR3Curve curve;
    Rebalanced rebalance;
};

inline Lift legendrian_lift_report(const TrigPoly& X, const TrigPoly& Y, std::optional<int> frequency = std::nullopt) {
    Lift l;
    l.rebalance = rebalance(X, Y, frequency);
    l.curve.X = l.rebalance.X;
    l.curve.Y = l.rebalance.Y;
    AreaIntegral z = area_integral(l.curve.X, l.curve.Y);
    l.curve.Z = z.trig;  // drift is the rebalanced defect / 2 pi, zero up to roundoff
    return l;
}

inline LegendrianR3Curve legendrian_lift(const TrigPoly& X, const TrigPoly& Y) {
    return legendrian_lift_report(X, Y).curve;
}

// max coefficient of Z' + X Y' - Y X'
inline double legendrian_identity_defect(const LegendrianR3Curve& c) {
    TrigPoly r = c.Z.derivative() + c.X * c.Y.derivative() - c.Y * c.X.derivative();
    return r.max_abs_coeff();
}

// n = (1, Z, X, Y): x1 = 1/R, y1 = Z/R, x2 = X/R, y2 = Y/R
inline S3Curve project_to_s3(const LegendrianR3Curve& c) {
    S3Curve s;
    s.n1 = TrigPoly(1.0);
    s.n2 = c.Z;
    s.n3 = c.X;
    s.n4 = c.Y;
    s.rho = TrigPoly(1.0) + c.X * c.X + c.Y * c.Y + c.Z * c.Z;
    return s;
}

inline GaussCode gauss_code(const TrigPoly& X, const TrigPoly& Y, const TrigPoly& Z, const CrossingOptions& o = {},
                            double tie_tol = 1e-9) {
    auto cs = detect_crossings(X, Y, o);
    return code_from_crossings(cs, [&](double t) { return Z(t); }, tie_tol);
}

inline GaussCode gauss_code(const LegendrianR3Curve& c, const CrossingOptions& o = {}, double tie_tol = 1e-9) {
    return gauss_code(c.X, c.Y, c.Z, o, tie_tol);
}

struct PipelineConfig {
    int initial_degree = 64;
    int degree_cap = 4096;
    int oversample = 8;
    InsertionOptions insertion{};
    CrossingOptions crossing{};
    double tie_tol = 1e-9;
    std::optional<int> rebalance_frequency;
    bool verify_piecewise = true;
};

struct PipelineAttempt {
    int degree = 0;
    double c0_deviation = 0, c1_deviation = 0;
    KnotSignature signature;
    int raw_crossings = 0;
    std::string failure;  // empty on success
};

struct PipelineResult {
    DiagramCurve diagram;
    std::vector<SignCheck> checks;
    SpiralPlan plan;
    PiecewiseCurve piecewise;
    GaussCode target_code;
    KnotSignature target;
    std::optional<KnotSignature> piecewise_signature;
    double piecewise_z_gap = 0;
    std::vector<PipelineAttempt> attempts;
    Lift lift;
    S3Curve curve;
    GaussCode code;
    KnotSignature achieved;
    int degree = 0;
};

inline GaussCode diagram_target_code(const DiagramCurve& d, const std::vector<Crossing>& cs, const AreaIntegral& Z,
                                     double tie_tol) {
    if (!d.target.empty()) return d.target;
    return code_from_crossings(cs, [&](double t) { return Z(t); }, tie_tol);
}

inline PipelineResult build_pipeline(const DiagramCurve& d, const PipelineConfig& cfg = {}) {
    if (cfg.initial_degree < 1 || cfg.degree_cap < cfg.initial_degree)
        throw error(errc::invalid_input, "degree range must satisfy 1 <= initial <= cap");
    PipelineResult res;
    res.diagram = d;
    auto cs = detect_crossings(d, cfg.crossing);
    attach_targets(d.target, cs);
    AreaIntegral Z = area_integral(d.X, d.Y);
    res.checks = classify_signs(cs, Z, cfg.tie_tol);
    res.target_code = diagram_target_code(d, cs, Z, cfg.tie_tol);
    res.target = signature(res.target_code);
    res.plan = plan_spirals(d, Z, res.checks, cfg.insertion);
    res.piecewise = assemble(d, res.plan.insertions);
    res.piecewise_z_gap = res.piecewise.z_end;
    if (cfg.verify_piecewise) {
        try {
            res.piecewise_signature = signature(gauss_code(res.piecewise, cfg.crossing, cfg.tie_tol));
        } catch (const error&) {
            res.piecewise_signature.reset();
        }
    }
    for (int deg = cfg.initial_degree; deg <= cfg.degree_cap; deg *= 2) {
        PipelineAttempt at;
        at.degree = deg;
        FourierStage fs = fourier_stage(res.piecewise, deg, cfg.oversample);
        at.c0_deviation = fs.c0_deviation;
        at.c1_deviation = fs.c1_deviation;
        Lift lift = legendrian_lift_report(fs.X, fs.Y, cfg.rebalance_frequency);
        try {
            GaussCode code = gauss_code(lift.curve, cfg.crossing, cfg.tie_tol);
            at.raw_crossings = int(code.size() / 2);
            at.signature = signature(code);
            if (at.signature == res.target) {
                res.attempts.push_back(at);
                res.lift = lift;
                res.curve = project_to_s3(lift.curve);
                res.code = code;
                res.achieved = at.signature;
                res.degree = deg;
                return res;
            }
            at.failure = "signature mismatch";
        } catch (const error& e) {
            at.failure = e.what();
        }
        res.attempts.push_back(at);
        if (deg > cfg.degree_cap / 2) break;
    }
    std::string diag;
    for (const auto& a : res.attempts)
        diag += " [degree " + std::to_string(a.degree) + ": crossings " + std::to_string(a.signature.crossings) +
                ", det " + std::to_string(a.signature.determinant) + ", c0 " + std::to_string(a.c0_deviation) +
                (a.failure.empty() ? "" : ", " + a.failure) + "]";
    throw error(errc::degree_cap_exceeded, "target signature (" + std::to_string(res.target.crossings) + ", " +
                                               std::to_string(res.target.determinant) + ") not reached:" + diag);
}

} // namespace legknot
