#pragma once

// Planar diagrams, crossing-sign correction by inserted loops, and the
// piecewise C^1 curve that results.

#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>

#include "errors.hpp"
#include "knot.hpp"
#include "planar.hpp"
#include "trigpoly.hpp"

namespace legknot {

struct DiagramCurve {
    TrigPoly X, Y;
    GaussCode target;  // signed Gauss code in traversal order from t = 0; empty: keep Z-induced signs

    void eval(double t, Vec2& p, Vec2& v) const {
        p = {X(t), Y(t)};
        v = {X.eval(t, 1), Y.eval(t, 1)};
    }
    Vec2 position(double t) const { return {X(t), Y(t)}; }
    Vec2 velocity(double t) const { return {X.eval(t, 1), Y.eval(t, 1)}; }
    int degree() const { return std::max(X.degree(), Y.degree()); }
};

inline int default_crossing_samples(int degree) { return std::max(720, 32 * degree); }

inline std::vector<Crossing> detect_crossings(const TrigPoly& X, const TrigPoly& Y, const CrossingOptions& o = {}) {
    const int deg = std::max(X.degree(), Y.degree());
    const int n = o.samples > 0 ? o.samples : default_crossing_samples(deg);
    auto xs = sample_uniform(X, n), ys = sample_uniform(Y, n);
    std::vector<Vec2> pts(n);
    for (int k = 0; k < n; ++k) pts[k] = {xs[k], ys[k]};
    CurveFn f = [&](double t, Vec2& p, Vec2& v) {
        p = {X(t), Y(t)};
        v = {X.eval(t, 1), Y.eval(t, 1)};
    };
    return crossings_from_samples(f, uniform_params(two_pi, n), pts, two_pi, o);
}

inline std::vector<Crossing> detect_crossings(const DiagramCurve& d, const CrossingOptions& o = {}) {
    return detect_crossings(d.X, d.Y, o);
}

// Copies the desired over-strand of every crossing from the target code, matching
// the k-th code entry with the k-th incidence along the traversal.
inline void attach_targets(const GaussCode& target, std::vector<Crossing>& cs) {
    if (target.empty()) return;
    validate(target);
    auto inc = incidences(cs);
    if (inc.size() != target.size())
        throw error(errc::invalid_input, "target code has " + std::to_string(target.size() / 2) +
                                             " crossings, diagram has " + std::to_string(cs.size()));
    std::vector<int> pos_lo(cs.size()), pos_hi(cs.size());
    for (int p = 0; p < int(inc.size()); ++p) (inc[p].lo ? pos_lo : pos_hi)[inc[p].crossing] = p;
    for (std::size_t k = 0; k < cs.size(); ++k) {
        const auto &a = target[pos_lo[k]], &b = target[pos_hi[k]];
        if (a.id != b.id)
            throw error(errc::invalid_input,
                        "target code pairs incidences differently from the diagram at crossing " +
                            std::to_string(cs[k].id));
        cs[k].desired_over = a.over ? 1 : -1;
    }
}

struct SignCheck {
    Crossing crossing;
    double z_lo = 0, z_hi = 0;
    bool correct = true;
};

inline std::vector<SignCheck> classify_signs(const std::vector<Crossing>& cs, const AreaIntegral& Z,
                                             double tie_tol = 1e-9) {
    std::vector<SignCheck> out;
    for (const auto& c : cs) {
        SignCheck s{c, Z(c.t_lo), Z(c.t_hi), true};
        if (std::abs(s.z_lo - s.z_hi) < tie_tol)
            throw error(errc::z_tie, "Z values tie at crossing " + std::to_string(c.id));
        int over = s.z_lo > s.z_hi ? 1 : -1;
        s.correct = c.desired_over == 0 || c.desired_over == over;
        out.push_back(s);
    }
    return out;
}

enum class Side { left, right };
enum class LoopShape { circle, spiral };

inline const char* side_name(Side s) { return s == Side::left ? "left" : "right"; }

// Definition of "left of": sign of D'(tau) x (center - D(tau)).
inline Side side_of(const Vec2& tangent, const Vec2& offset) {
    return cross(tangent, offset) > 0 ? Side::left : Side::right;
}

// A loop tangent to the diagram at D(tau). Circles return to D(tau); spirals wind
// inwards to inner_ratio * radius and leave along a cubic that rejoins the diagram
// at D(exit_tau), dropping the diagram arc in between.
struct CircleInsertion {
    double tau = 0;
    Vec2 center = Vec2::Zero();
    double radius = 0;
    bool clockwise = false;
    int traversals = 1;
    Side side = Side::left;
    LoopShape shape = LoopShape::circle;
    double exit_tau = 0;
    double inner_ratio = 0.5;
    double delta = 0;  // change of Z caused by the insertion
};

namespace detail {

inline Vec2 side_normal(const Vec2& unit_tangent, Side s) {
    return s == Side::left ? rot90(unit_tangent) : Vec2(-rot90(unit_tangent));
}

template <class F>
double gauss20(F&& f, double a, double b) {
    return boost::math::quadrature::gauss<double, 20>::integrate(f, a, b);
}

} // namespace detail

enum class ArcKind { diagram, loop, hermite };

struct Arc {
    ArcKind kind = ArcKind::diagram;
    double duration = 0;
    // diagram: D(t0 + u)
    double t0 = 0;
    // loop, local frame (P; T, N); radius r - decay * h(phi), phi = omega * u
    Vec2 P = Vec2::Zero(), T = Vec2::Zero(), N = Vec2::Zero();
    double r = 0, omega = 1, decay = 0, knee = pi;
    int turns = 1;
    // hermite
    Vec2 p0 = Vec2::Zero(), v0 = Vec2::Zero(), p1 = Vec2::Zero(), v1 = Vec2::Zero();

    double h(double phi) const { return phi < knee ? phi * phi / (2 * knee) : phi - knee / 2; }
    double dh(double phi) const { return phi < knee ? phi / knee : 1.0; }

    void loop_eval(double u, Vec2& p, Vec2& v) const {
        double phi = omega * u;
        double rho = r - decay * h(phi), drho = -decay * dh(phi);
        double s = std::sin(phi), c = std::cos(phi);
        double x = rho * s, y = r - rho * c;
        double xp = drho * s + rho * c, yp = -drho * c + rho * s;
        p = P + x * T + y * N;
        v = omega * (xp * T + yp * N);
    }
    void hermite_eval(double u, Vec2& p, Vec2& v) const {
        double D = duration, s = u / D;
        double s2 = s * s, s3 = s2 * s;
        p = (2 * s3 - 3 * s2 + 1) * p0 + (s3 - 2 * s2 + s) * D * v0 + (-2 * s3 + 3 * s2) * p1 + (s3 - s2) * D * v1;
        v = ((6 * s2 - 6 * s) * p0 + (3 * s2 - 4 * s + 1) * D * v0 + (-6 * s2 + 6 * s) * p1 + (3 * s2 - 2 * s) * D * v1) / D;
    }
};

struct PiecewiseCurve {
    TrigPoly X, Y;
    AreaIntegral Zd;
    std::vector<Arc> arcs;
    std::vector<double> start;    // natural start time of each arc
    std::vector<double> z_start;  // Z at the start of each arc
    double total = 0;

    void arc_eval(const Arc& a, double u, Vec2& p, Vec2& v) const {
        switch (a.kind) {
        case ArcKind::diagram:
            p = {X(a.t0 + u), Y(a.t0 + u)};
            v = {X.eval(a.t0 + u, 1), Y.eval(a.t0 + u, 1)};
            break;
        case ArcKind::loop: a.loop_eval(u, p, v); break;
        case ArcKind::hermite: a.hermite_eval(u, p, v); break;
        }
    }

    // int_0^u Y X' - X Y' along arc a
    double arc_z(const Arc& a, double u) const {
        if (a.kind == ArcKind::diagram) return Zd(a.t0 + u) - Zd(a.t0);
        auto w = [&](double s) {
            Vec2 p, v;
            arc_eval(a, s, p, v);
            return p.y() * v.x() - p.x() * v.y();
        };
        std::vector<double> cuts{0.0};
        if (a.kind == ArcKind::loop) {
            double quarter = (pi / 2) / a.omega;
            for (double c = quarter; c < u; c += quarter) cuts.push_back(c);
            if (a.decay != 0 && a.knee / a.omega < u) cuts.push_back(a.knee / a.omega);
            std::sort(cuts.begin(), cuts.end());
        } else {
            for (int k = 1; k < 4; ++k) cuts.push_back(u * k / 4);
        }
        cuts.push_back(u);
        double s = 0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k)
            if (cuts[k + 1] > cuts[k]) s += detail::gauss20(w, cuts[k], cuts[k + 1]);
        return s;
    }

    void finalize() {
        start.assign(arcs.size(), 0);
        z_start.assign(arcs.size(), 0);
        double t = 0, z = 0;
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            start[k] = t;
            z_start[k] = z;
            t += arcs[k].duration;
            z += arc_z(arcs[k], arcs[k].duration);
        }
        total = t;
        z_end = z;
    }
    double z_end = 0;

    std::size_t locate(double u) const {
        auto it = std::upper_bound(start.begin(), start.end(), u);
        std::size_t k = it == start.begin() ? 0 : std::size_t(it - start.begin()) - 1;
        return std::min(k, arcs.size() - 1);
    }

    // natural time u in [0, total]
    void eval_natural(double u, Vec2& p, Vec2& v) const {
        std::size_t k = locate(u);
        arc_eval(arcs[k], u - start[k], p, v);
    }
    double z_natural(double u) const {
        std::size_t k = locate(u);
        return z_start[k] + arc_z(arcs[k], u - start[k]);
    }

    // rescaled parameter t in [0, 2 pi]
    void eval(double t, Vec2& p, Vec2& v) const {
        double u = wrap_param(t, two_pi) * total / two_pi;
        eval_natural(u, p, v);
        v *= total / two_pi;
    }
    Vec2 position(double t) const {
        Vec2 p, v;
        eval(t, p, v);
        return p;
    }
    double z(double t) const { return z_natural(wrap_param(t, two_pi) * total / two_pi); }

    // parameters (in [0, 2 pi)) dense enough for polyline crossing seeds
    std::vector<double> sample_params(int per_turn = 128) const {
        std::vector<double> ts;
        const double scale = two_pi / total;
        const int deg = std::max(X.degree(), Y.degree());
        for (std::size_t k = 0; k < arcs.size(); ++k) {
            const Arc& a = arcs[k];
            int n = 16;
            if (a.kind == ArcKind::diagram)
                n = std::max(16, int(std::ceil(a.duration / two_pi * default_crossing_samples(deg))));
            else if (a.kind == ArcKind::loop)
                n = per_turn * a.turns;
            else
                n = 64;
            for (int i = 0; i < n; ++i) ts.push_back((start[k] + a.duration * i / n) * scale);
        }
        return ts;
    }
};

enum class Timing {
    speed_matched,  // loop speed equals the diagram speed at the tangency point
    unit_angular,   // every traversal takes 2 pi
};

namespace detail {

inline Arc diagram_arc(double t0, double t1) {
    Arc a;
    a.kind = ArcKind::diagram;
    a.t0 = t0;
    a.duration = t1 - t0;
    return a;
}

inline Arc loop_arc(const DiagramCurve& d, const CircleInsertion& ins, Timing timing) {
    Arc a;
    a.kind = ArcKind::loop;
    Vec2 v = d.velocity(ins.tau);
    a.P = d.position(ins.tau);
    a.T = v.normalized();
    a.N = side_normal(a.T, ins.side);
    a.r = ins.radius;
    a.turns = ins.traversals;
    a.omega = timing == Timing::unit_angular ? 1.0 : v.norm() / ins.radius;
    const double total_phi = two_pi * ins.traversals;
    if (ins.shape == LoopShape::spiral) {
        a.knee = std::min(pi, total_phi / 2);
        a.decay = ins.radius * (1 - ins.inner_ratio) / a.h(total_phi);
    }
    a.duration = total_phi / a.omega;
    return a;
}

inline Arc exit_arc(const DiagramCurve& d, const Arc& loop, double exit_tau) {
    Arc e;
    e.kind = ArcKind::hermite;
    loop.loop_eval(loop.duration, e.p0, e.v0);
    e.p1 = d.position(exit_tau);
    e.v1 = d.velocity(exit_tau);
    e.duration = 1.2 * (e.p1 - e.p0).norm() / (0.5 * (e.v0.norm() + e.v1.norm()));
    return e;
}

} // namespace detail

// Arc-sequence for the diagram with the given loops. Insertions must not overlap.
inline PiecewiseCurve assemble(const DiagramCurve& d, std::vector<CircleInsertion> ins,
                               Timing timing = Timing::speed_matched) {
    std::sort(ins.begin(), ins.end(), [](const auto& a, const auto& b) { return a.tau < b.tau; });
    PiecewiseCurve pc;
    pc.X = d.X;
    pc.Y = d.Y;
    pc.Zd = area_integral(d.X, d.Y);
    double t = 0;
    for (const auto& c : ins) {
        if (c.tau < t || c.tau >= two_pi)
            throw error(errc::invalid_input, "overlapping or out-of-range insertions");
        if (c.tau > t) pc.arcs.push_back(detail::diagram_arc(t, c.tau));
        Arc loop = detail::loop_arc(d, c, timing);
        pc.arcs.push_back(loop);
        t = c.tau;
        if (c.shape == LoopShape::spiral) {
            if (!(c.exit_tau > c.tau && c.exit_tau <= two_pi))
                throw error(errc::invalid_input, "spiral exit parameter out of range");
            pc.arcs.push_back(detail::exit_arc(d, loop, c.exit_tau));
            t = c.exit_tau;
        }
    }
    if (t < two_pi) pc.arcs.push_back(detail::diagram_arc(t, two_pi));
    pc.finalize();
    return pc;
}

// Z change of an insertion: loop (+ exit) minus any dropped diagram arc.
inline double insertion_delta(const DiagramCurve& d, const CircleInsertion& c,
                              Timing timing = Timing::speed_matched) {
    PiecewiseCurve tmp;
    tmp.X = d.X;
    tmp.Y = d.Y;
    tmp.Zd = area_integral(d.X, d.Y);
    Arc loop = detail::loop_arc(d, c, timing);
    double z = tmp.arc_z(loop, loop.duration);
    if (c.shape == LoopShape::spiral) {
        Arc e = detail::exit_arc(d, loop, c.exit_tau);
        z += tmp.arc_z(e, e.duration) - (tmp.Zd(c.exit_tau) - tmp.Zd(c.tau));
    }
    return z;
}

struct InsertionOptions {
    LoopShape shape = LoopShape::circle;
    std::optional<double> radius;  // fixed radius; otherwise min(radius_cap, clearance_factor * clearance)
    double radius_cap = 0.25;
    double clearance_factor = 0.4;
    double clearance_window = 0.25;  // parameter half-width excluded from the clearance search
    double inner_ratio = 0.5;        // spiral inner / outer radius
    double exit_fraction = 0.5;      // dropped arc length / inner radius
    double flip_margin = 0.1;        // extra |Z| gap after a flip, relative to the old gap
    double min_gap = 0.1;            // absolute extra |Z| gap after a flip
    int tau_candidates = 24;
    int room_samples = 0;
    double tie_tol = 1e-9;
};

// distance from D(tau) to the diagram outside a parameter window around tau
inline double clearance(const DiagramCurve& d, double tau, double window, int samples = 0) {
    const int n = samples > 0 ? samples : std::max(2048, 64 * d.degree());
    Vec2 P = d.position(tau);
    double best = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
        double t = two_pi * k / n, g = std::abs(t - tau);
        if (std::min(g, two_pi - g) <= window) continue;
        best = std::min(best, (d.position(t) - P).norm());
    }
    return best;
}

// (m, r) with m = ceil(|dz| / (2 pi r_max^2)) and r = sqrt(|dz| / (2 pi m))
inline std::pair<int, double> closure_radius(double dz, double r_max) {
    int m = std::max(1, int(std::ceil(std::abs(dz) / (two_pi * r_max * r_max) - 1e-12)));
    return {m, std::sqrt(std::abs(dz) / (two_pi * m))};
}

// m_k = floor(|dz| / (2 pi r^2)) + 1
inline int traversals_for_flip(double dz, double r) {
    return int(std::floor(std::abs(dz) / (two_pi * r * r))) + 1;
}

namespace detail {

inline CircleInsertion make_circle(const DiagramCurve& d, double tau, double r, int m, Side side) {
    CircleInsertion c;
    c.tau = tau;
    c.radius = r;
    c.traversals = m;
    c.side = side;
    c.clockwise = side == Side::right;
    Vec2 T = d.velocity(tau).normalized();
    c.center = d.position(tau) + r * side_normal(T, side);
    c.shape = LoopShape::circle;
    return c;
}

// position in the cyclic order of incidences
inline double interval_mid(const std::vector<Incidence>& inc, int i) {
    const int n = int(inc.size());
    double a = inc[(i + n - 1) % n].t, b = inc[i].t;
    if (b <= a) b += two_pi;
    return wrap_param(0.5 * (a + b), two_pi);
}

} // namespace detail

// Paired circles (C1 before the chosen incidence, C2 after it) for every wrong crossing,
// following the construction with equal radii and m_k traversals each.
inline std::vector<CircleInsertion> plan_insertions(const DiagramCurve& d, const AreaIntegral& Z,
                                                    const std::vector<SignCheck>& checks,
                                                    const InsertionOptions& o = {}) {
    std::vector<Crossing> cs;
    for (const auto& s : checks) cs.push_back(s.crossing);
    auto inc = incidences(cs);
    const int n = int(inc.size());
    std::vector<CircleInsertion> out;
    for (const auto& s : checks) {
        if (s.correct) continue;
        int k = int(&s - &checks[0]);
        int j = 0;
        while (!(inc[j].crossing == k && inc[j].lo)) ++j;
        double tau1 = detail::interval_mid(inc, j), tau2 = detail::interval_mid(inc, (j + 1) % n);
        double r = o.radius ? *o.radius
                            : std::min({o.radius_cap,
                                        o.clearance_factor * clearance(d, tau1, o.clearance_window, o.room_samples),
                                        o.clearance_factor * clearance(d, tau2, o.clearance_window, o.room_samples)});
        if (!(r > 1e-6)) throw error(errc::no_room_for_circle, "no room near crossing " + std::to_string(s.crossing.id));
        double dz = s.z_lo - s.z_hi;
        int m = traversals_for_flip(dz, r);
        // raise the lo strand when it should be over (cw circles raise Z)
        bool raise = s.crossing.desired_over == 1;
        Side s1 = raise ? Side::right : Side::left, s2 = raise ? Side::left : Side::right;
        out.push_back(detail::make_circle(d, tau1, r, m, s1));
        out.push_back(detail::make_circle(d, tau2, r, m, s2));
    }
    for (auto& c : out) c.delta = (c.clockwise ? 1 : -1) * two_pi * c.radius * c.radius * c.traversals;
    return out;
}

// Closure circle in (t_last, 2 pi) making Z periodic; nullopt when Z(2 pi) = Z(0).
inline std::optional<CircleInsertion> plan_closure(const DiagramCurve& d, const AreaIntegral& Z,
                                                   const std::vector<Crossing>& cs, const InsertionOptions& o = {},
                                                   double tol = 1e-12) {
    double dz = Z(two_pi) - Z(0.0);
    if (std::abs(dz) <= tol * std::max(1.0, std::abs(Z.trig.a0))) return std::nullopt;
    double last = 0;
    for (const auto& c : cs) last = std::max(last, c.t_hi);
    double tau = 0.5 * (last + two_pi);
    double r_max = o.radius ? *o.radius
                            : std::min(o.radius_cap,
                                       o.clearance_factor * clearance(d, tau, o.clearance_window, o.room_samples));
    if (!(r_max > 1e-6)) throw error(errc::no_room_for_circle, "no room for the closure circle");
    auto [m, r] = closure_radius(dz, r_max);
    // dz < 0 needs a Z increase: clockwise, centre on the right
    CircleInsertion c = detail::make_circle(d, tau, r, m, dz < 0 ? Side::right : Side::left);
    c.delta = -dz;
    return c;
}

// ---------------------------------------------------------------------------
// Spiral planning used by the pipeline.

namespace detail {

struct RoomProbe {
    const DiagramCurve* d;
    std::vector<double> ts;
    std::vector<Vec2> pts;
};

inline RoomProbe make_probe(const DiagramCurve& d, int samples) {
    RoomProbe p{&d, {}, {}};
    const int n = samples > 0 ? samples : std::max(4096, 64 * d.degree());
    p.ts = uniform_params(two_pi, n);
    p.pts.resize(n);
    for (int k = 0; k < n; ++k) p.pts[k] = d.position(p.ts[k]);
    return p;
}

inline double exit_param(const DiagramCurve& d, double tau, double r, const InsertionOptions& o) {
    return tau + o.exit_fraction * o.inner_ratio * r / d.velocity(tau).norm();
}

// the disk of the loop keeps a margin from the diagram outside the dropped arc
inline bool loop_fits(const RoomProbe& pr, double tau, double r, Side side, const InsertionOptions& o) {
    const DiagramCurve& d = *pr.d;
    Vec2 P = d.position(tau), T = d.velocity(tau).normalized();
    Vec2 C = P + r * side_normal(T, side);
    double exit_tau = o.shape == LoopShape::spiral ? exit_param(d, tau, r, o) : tau;
    for (std::size_t k = 0; k < pr.ts.size(); ++k) {
        double t = pr.ts[k];
        if (t >= tau && t <= exit_tau) continue;
        double q = (pr.pts[k] - P).norm();
        double need = std::min(0.15 * r, 0.15 * q * q / r);
        if ((pr.pts[k] - C).norm() - r < need) return false;
    }
    return true;
}

inline double admissible_radius(const RoomProbe& pr, double tau, Side side, const InsertionOptions& o) {
    double r = o.radius ? *o.radius : o.radius_cap;
    for (int k = 0; k < 60; ++k, r *= 0.9)
        if (loop_fits(pr, tau, r, side, o)) return r;
    return 0.0;
}

inline CircleInsertion make_spiral(const DiagramCurve& d, double tau, double r, int turns, Side side,
                                   const InsertionOptions& o) {
    CircleInsertion c = make_circle(d, tau, r, turns, side);
    c.shape = LoopShape::spiral;
    c.inner_ratio = o.inner_ratio;
    c.exit_tau = exit_param(d, tau, r, o);
    c.delta = insertion_delta(d, c);
    return c;
}

// Spiral at tau whose Z change equals target exactly: minimal turn count at the
// admissible radius, then bisection on the radius.
inline CircleInsertion tuned_spiral(const DiagramCurve& d, double tau, double r_max, double target,
                                    const InsertionOptions& o) {
    Side side = target > 0 ? Side::right : Side::left;
    const double goal = std::abs(target);
    auto mag = [&](double r, int n) { return std::abs(make_spiral(d, tau, r, n, side, o).delta); };
    double per_turn = two_pi * r_max * r_max * (1 + o.inner_ratio + o.inner_ratio * o.inner_ratio) / 3;
    int n = std::max(1, int(goal / per_turn) - 1);
    while (n > 1 && mag(r_max, n - 1) >= goal) --n;
    while (mag(r_max, n) < goal) {
        ++n;
        if (n > 100000) throw error(errc::no_room_for_circle, "spiral turn count exploded");
    }
    double hi = r_max, lo = 0.5 * r_max;
    while (mag(lo, n) > goal && lo > 1e-9) lo *= 0.5;
    for (int it = 0; it < 200 && hi - lo > 1e-16 * hi; ++it) {
        double mid = 0.5 * (lo + hi);
        (mag(mid, n) < goal ? lo : hi) = mid;
    }
    double r = std::abs(mag(lo, n) - goal) <= std::abs(mag(hi, n) - goal) ? lo : hi;
    return make_spiral(d, tau, r, n, side, o);
}

} // namespace detail

struct SpiralPlan {
    std::vector<CircleInsertion> insertions;
    std::vector<double> offsets;  // Z shift requested at each incidence (traversal order)
    double closure = 0;           // Z change required for periodicity
};

// Pipeline variant of the circle planner: each wrong crossing is fixed by shifting Z at one of its
// incidences; the shifts and the closure defect are realised by one spiral per
// incidence interval, each tuned so the total Z change is exactly periodic.
inline SpiralPlan plan_spirals(const DiagramCurve& d, const AreaIntegral& Z, const std::vector<SignCheck>& checks,
                               InsertionOptions o = {}) {
    o.shape = LoopShape::spiral;
    std::vector<Crossing> cs;
    for (const auto& s : checks) cs.push_back(s.crossing);
    auto inc = incidences(cs);
    const int n = int(inc.size());
    auto probe = detail::make_probe(d, o.room_samples);

    // cyclic interval i runs from incidence i-1 to incidence i; interval 0 contains t = 0
    auto bounds = [&](int i) {
        if (n == 0) return std::pair{0.0, two_pi};
        double a = inc[(i + n - 1) % n].t, b = inc[i].t;
        if (i == 0) a -= two_pi;
        return std::pair{a, b};
    };
    auto best_spot = [&](int i, Side side) {
        auto [a, b] = bounds(i);
        double len = b - a, best_r = 0, best_tau = 0, best_off = 1e300;
        const int K = o.tau_candidates;
        for (int k = 1; k < K; ++k) {
            double tau = a + len * (0.1 + 0.8 * k / K);
            double tw = wrap_param(tau, two_pi);
            double r = detail::admissible_radius(probe, tw, side, o);
            if (r <= 0) continue;
            double ex = detail::exit_param(d, tau, r, o);
            if (ex >= b - 0.05 * len) continue;
            if (tw + (ex - tau) > two_pi) continue;  // dropped arc may not wrap
            double off = std::abs(k - K / 2.0);
            if (r > best_r * (1 + 1e-9) || (r >= best_r * (1 - 1e-9) && off < best_off)) {
                best_r = r;
                best_tau = tw;
                best_off = off;
            }
        }
        return std::pair{best_tau, best_r};
    };

    SpiralPlan plan;
    plan.offsets.assign(n, 0.0);
    for (std::size_t k = 0; k < checks.size(); ++k) {
        const auto& s = checks[k];
        if (s.correct) continue;
        // shift the lo incidence: up if it should be over
        int j = 0;
        while (!(inc[j].crossing == int(k) && inc[j].lo)) ++j;
        double gap = std::abs(s.z_lo - s.z_hi);
        double shift = gap * (1 + o.flip_margin) + o.min_gap;
        plan.offsets[j] = s.crossing.desired_over == 1 ? shift : -shift;
    }
    plan.closure = -(Z(two_pi) - Z(0.0));
    std::vector<double> deltas(std::max(n, 1), 0.0);
    for (int i = 1; i < n; ++i) deltas[i] = plan.offsets[i] - plan.offsets[i - 1];
    deltas[0] = (n ? plan.offsets[0] - plan.offsets[n - 1] : 0.0) + plan.closure;
    const double scale = std::max(1.0, std::abs(Z.trig.a0) + std::abs(Z.drift) * two_pi);
    for (int i = 0; i < int(deltas.size()); ++i) {
        if (std::abs(deltas[i]) <= 1e-13 * scale) continue;
        Side side = deltas[i] > 0 ? Side::right : Side::left;
        auto [tau, r] = best_spot(i, side);
        if (r <= 0) throw error(errc::no_room_for_circle, "no room for a spiral in incidence interval " + std::to_string(i));
        plan.insertions.push_back(detail::tuned_spiral(d, tau, r, deltas[i], o));
    }
    std::sort(plan.insertions.begin(), plan.insertions.end(),
              [](const auto& a, const auto& b) { return a.tau < b.tau; });
    return plan;
}

// Crossings of an assembled curve, in its rescaled parameter.
inline std::vector<Crossing> detect_crossings(const PiecewiseCurve& pc, const CrossingOptions& o = {}) {
    auto ts = pc.sample_params();
    CurveFn f = [&](double t, Vec2& p, Vec2& v) { pc.eval(t, p, v); };
    return crossings_from_samples(f, ts, sample_curve(f, ts), two_pi, o);
}

inline GaussCode gauss_code(const PiecewiseCurve& pc, const CrossingOptions& o = {}, double tie_tol = 1e-9) {
    auto cs = detect_crossings(pc, o);
    return code_from_crossings(cs, [&](double t) { return pc.z(t); }, tie_tol);
}

// Smallest |Z| separation over the planar crossings of the lift; the lift is embedded iff positive.
inline double lift_separation(const std::vector<Crossing>& cs, const std::function<double(double)>& z) {
    double m = std::numeric_limits<double>::infinity();
    for (const auto& c : cs) m = std::min(m, std::abs(z(c.t_lo) - z(c.t_hi)));
    return m;
}

} // namespace legknot
