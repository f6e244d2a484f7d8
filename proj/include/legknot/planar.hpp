#pragma once

// Self-intersections of closed planar curves and the Gauss codes they induce.

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "errors.hpp"
#include "knot.hpp"

namespace legknot {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;

inline double cross(const Vec2& a, const Vec2& b) { return a.x() * b.y() - a.y() * b.x(); }
inline Vec2 rot90(const Vec2& v) { return {-v.y(), v.x()}; }

// position and velocity at a parameter
using CurveFn = std::function<void(double, Vec2&, Vec2&)>;

struct SegmentHit {
    int i = 0, j = 0;  // i < j, segment k runs p[k] -> p[k+1 mod n]
    double s = 0, u = 0;
};

// Intersections between non-adjacent segments of the closed polyline p, found
// with a uniform hash grid. Results are sorted by (i, j).
inline std::vector<SegmentHit> polyline_self_intersections(const std::vector<Vec2>& p) {
    const int n = int(p.size());
    std::vector<SegmentHit> hits;
    if (n < 4) return hits;
    double len = 0.0;
    Vec2 lo = p[0], hi = p[0];
    for (int k = 0; k < n; ++k) {
        len += (p[(k + 1) % n] - p[k]).norm();
        lo = lo.cwiseMin(p[k]);
        hi = hi.cwiseMax(p[k]);
    }
    double h = std::max(2.0 * len / n, 1e-9 * std::max(1.0, (hi - lo).norm()));
    auto cell = [&](double v, double o) { return (long long)std::floor((v - o) / h); };
    std::unordered_map<long long, std::vector<int>> grid;
    grid.reserve(std::size_t(n) * 2);
    const long long W = cell(hi.x(), lo.x()) + 2;
    for (int k = 0; k < n; ++k) {
        const Vec2& a = p[k];
        const Vec2& b = p[(k + 1) % n];
        long long x0 = cell(std::min(a.x(), b.x()), lo.x()), x1 = cell(std::max(a.x(), b.x()), lo.x());
        long long y0 = cell(std::min(a.y(), b.y()), lo.y()), y1 = cell(std::max(a.y(), b.y()), lo.y());
        for (long long cx = x0; cx <= x1; ++cx)
            for (long long cy = y0; cy <= y1; ++cy) grid[cy * W + cx].push_back(k);
    }
    std::unordered_set<long long> seen;
    for (auto& [key, segs] : grid) {
        for (std::size_t x = 0; x < segs.size(); ++x)
            for (std::size_t y = x + 1; y < segs.size(); ++y) {
                int i = std::min(segs[x], segs[y]), j = std::max(segs[x], segs[y]);
                if (j - i <= 1 || (i == 0 && j == n - 1)) continue;
                long long id = (long long)i * n + j;
                if (seen.count(id)) continue;
                const Vec2 &p1 = p[i], &p2 = p[j];
                Vec2 d1 = p[(i + 1) % n] - p1, d2 = p[(j + 1) % n] - p2;
                double den = cross(d1, d2);
                if (den == 0.0) continue;
                double s = cross(p2 - p1, d2) / den;
                double u = cross(p2 - p1, d1) / den;
                if (s < 0.0 || s >= 1.0 || u < 0.0 || u >= 1.0) continue;
                seen.insert(id);
                hits.push_back({i, j, s, u});
            }
    }
    std::sort(hits.begin(), hits.end(), [](const SegmentHit& a, const SegmentHit& b) {
        return a.i != b.i ? a.i < b.i : a.j < b.j;
    });
    return hits;
}

struct Crossing {
    int id = 0;
    double t_lo = 0, t_hi = 0;
    Vec2 position = Vec2::Zero();
    Vec2 tangent_lo = Vec2::Zero(), tangent_hi = Vec2::Zero();
    int desired_over = 0;  // +1 lo strand over, -1 hi strand over, 0 unspecified
};

struct CrossingOptions {
    int samples = 0;  // 0: automatic
    double newton_tol = 1e-12;
    double merge_tol = 1e-6;
    double parallel_tol = 1e-7;  // |sin angle| below this is a tangency
    int max_iterations = 40;
};

inline double wrap_param(double t, double period) {
    t = std::fmod(t, period);
    if (t < 0) t += period;
    return t;
}

// Newton on f(a) - f(b) = 0 from a polyline seed; nullopt when it does not converge.
inline std::optional<Crossing> refine_crossing(const CurveFn& f, double a, double b, double period,
                                               const CrossingOptions& o) {
    Vec2 pa, va, pb, vb;
    for (int it = 0; it < o.max_iterations; ++it) {
        f(a, pa, va);
        f(b, pb, vb);
        Vec2 F = pa - pb;
        double scale = std::max(1.0, pa.norm());
        double det = -cross(va, vb);
        if (det == 0.0) return std::nullopt;
        // [va, -vb] (da, db)^T = -F
        double da = (-F.x() * -vb.y() + vb.x() * -F.y()) / det;
        double db = (va.x() * -F.y() - va.y() * -F.x()) / det;
        double lim = 0.05 * period;
        double m = std::max(std::abs(da), std::abs(db));
        if (m > lim) {
            da *= lim / m;
            db *= lim / m;
        }
        a += da;
        b += db;
        if (F.norm() <= o.newton_tol * scale && m <= 1e-9 * period) {
            f(a, pa, va);
            f(b, pb, vb);
            a = wrap_param(a, period);
            b = wrap_param(b, period);
            double gap = std::abs(a - b);
            if (std::min(gap, period - gap) < 1e-9 * period) return std::nullopt;
            Crossing c;
            if (a > b) {
                std::swap(a, b);
                std::swap(va, vb);
            }
            c.t_lo = a;
            c.t_hi = b;
            c.position = 0.5 * (pa + pb);
            c.tangent_lo = va;
            c.tangent_hi = vb;
            return c;
        }
    }
    return std::nullopt;
}

inline void check_transverse(const Crossing& c, double tol) {
    double s = std::abs(cross(c.tangent_lo, c.tangent_hi)) / (c.tangent_lo.norm() * c.tangent_hi.norm());
    if (!(s >= tol))
        throw error(errc::tangential_crossing, "tangents parallel at t = " + std::to_string(c.t_lo) + ", " +
                                                   std::to_string(c.t_hi));
}

// Crossings of a closed C^1 curve seeded from the polyline through pts[k] = f(ts[k]),
// ts increasing within one period. Seeds that fail to converge throw SeedGridTooCoarse.
inline std::vector<Crossing> crossings_from_samples(const CurveFn& f, const std::vector<double>& ts,
                                                    const std::vector<Vec2>& pts, double period,
                                                    const CrossingOptions& o) {
    const int n = int(pts.size());
    std::vector<Crossing> out;
    auto hits = polyline_self_intersections(pts);
    auto at = [&](int k, double s) {
        double t0 = ts[k], t1 = k + 1 < n ? ts[k + 1] : ts[0] + period;
        return t0 + s * (t1 - t0);
    };
    for (const auto& h : hits) {
        double a = at(h.i, h.s), b = at(h.j, h.u);
        auto c = refine_crossing(f, a, b, period, o);
        if (!c)
            throw error(errc::seed_grid_too_coarse,
                        "Newton did not converge from seed (" + std::to_string(a) + ", " + std::to_string(b) + ")");
        out.push_back(*c);
    }
    std::sort(out.begin(), out.end(), [](const Crossing& x, const Crossing& y) {
        return x.t_lo != y.t_lo ? x.t_lo < y.t_lo : x.t_hi < y.t_hi;
    });
    std::vector<Crossing> merged;
    auto close = [&](double x, double y) {
        double d = std::abs(x - y);
        return std::min(d, period - d) < o.merge_tol;
    };
    for (const auto& c : out) {
        bool dup = false;
        for (const auto& m : merged)
            if (close(m.t_lo, c.t_lo) && close(m.t_hi, c.t_hi)) {
                dup = true;
                break;
            }
        if (!dup) merged.push_back(c);
    }
    for (std::size_t k = 0; k < merged.size(); ++k) {
        check_transverse(merged[k], o.parallel_tol);
        merged[k].id = int(k) + 1;
    }
    return merged;
}

struct Incidence {
    double t;
    int crossing;  // index into the crossing list
    bool lo;
};

inline std::vector<Incidence> incidences(const std::vector<Crossing>& cs) {
    std::vector<Incidence> inc;
    for (int k = 0; k < int(cs.size()); ++k) {
        inc.push_back({cs[k].t_lo, k, true});
        inc.push_back({cs[k].t_hi, k, false});
    }
    std::sort(inc.begin(), inc.end(), [](const Incidence& a, const Incidence& b) { return a.t < b.t; });
    return inc;
}

// Signed Gauss code in traversal order; over/under from the height function z.
// Sign is that of over-tangent x under-tangent.
inline GaussCode code_from_crossings(const std::vector<Crossing>& cs, const std::function<double(double)>& z,
                                     double tie_tol = 1e-9) {
    std::vector<int> lo_over(cs.size()), sign(cs.size());
    for (std::size_t k = 0; k < cs.size(); ++k) {
        double zl = z(cs[k].t_lo), zh = z(cs[k].t_hi);
        if (std::abs(zl - zh) < tie_tol)
            throw error(errc::z_tie, "Z values tie at crossing " + std::to_string(cs[k].id));
        lo_over[k] = zl > zh;
        sign[k] = lo_over[k] ? (cross(cs[k].tangent_lo, cs[k].tangent_hi) > 0 ? 1 : -1)
                             : (cross(cs[k].tangent_hi, cs[k].tangent_lo) > 0 ? 1 : -1);
    }
    GaussCode code;
    for (const auto& in : incidences(cs)) {
        bool over = in.lo ? lo_over[in.crossing] : !lo_over[in.crossing];
        code.push_back({cs[in.crossing].id, over, sign[in.crossing]});
    }
    return code;
}

inline std::vector<double> uniform_params(double period, int n) {
    std::vector<double> ts(n);
    for (int k = 0; k < n; ++k) ts[k] = period * k / n;
    return ts;
}

inline std::vector<Vec2> sample_curve(const CurveFn& f, const std::vector<double>& ts) {
    std::vector<Vec2> pts(ts.size());
    Vec2 p, v;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        f(ts[k], p, v);
        pts[k] = p;
    }
    return pts;
}

// Crossings and Gauss code of a sampled closed space curve (polyline, linear z).
inline GaussCode polyline_gauss_code(const std::vector<Vec3>& pts, double tie_tol = 1e-12) {
    const int n = int(pts.size());
    std::vector<Vec2> p2(n);
    for (int k = 0; k < n; ++k) p2[k] = pts[k].head<2>();
    auto hits = polyline_self_intersections(p2);
    std::vector<Crossing> cs;
    std::vector<double> zlo, zhi;
    for (const auto& h : hits) {
        Crossing c;
        c.t_lo = h.i + h.s;
        c.t_hi = h.j + h.u;
        c.tangent_lo = p2[(h.i + 1) % n] - p2[h.i];
        c.tangent_hi = p2[(h.j + 1) % n] - p2[h.j];
        cs.push_back(c);
    }
    std::sort(cs.begin(), cs.end(), [](const Crossing& a, const Crossing& b) { return a.t_lo < b.t_lo; });
    for (std::size_t k = 0; k < cs.size(); ++k) cs[k].id = int(k) + 1;
    auto z = [&](double t) {
        int i = int(std::floor(t));
        double s = t - i;
        return (1 - s) * pts[i % n].z() + s * pts[(i + 1) % n].z();
    };
    return code_from_crossings(cs, z, tie_tol);
}

} // namespace legknot
