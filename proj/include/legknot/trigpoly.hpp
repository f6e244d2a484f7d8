#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <optional>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "errors.hpp"

namespace legknot {

using cplx = std::complex<double>;
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;

// a0 + sum_j a_j cos(jt) + b_j sin(jt); a[j-1] holds a_j.
struct TrigPoly {
    double a0 = 0.0;
    std::vector<double> a;
    std::vector<double> b;

    TrigPoly() = default;
    TrigPoly(double c) : a0(c) {}
    TrigPoly(double c, std::vector<double> cs, std::vector<double> ss)
        : a0(c), a(std::move(cs)), b(std::move(ss)) {
        std::size_t m = std::max(a.size(), b.size());
        a.resize(m, 0.0);
        b.resize(m, 0.0);
    }

    static TrigPoly cos_mode(int j, double c = 1.0) {
        TrigPoly p;
        if (j == 0) return TrigPoly(c);
        p.resize(j);
        p.a[j - 1] = c;
        return p;
    }
    static TrigPoly sin_mode(int j, double c = 1.0) {
        TrigPoly p;
        if (j == 0) return p;
        p.resize(j);
        p.b[j - 1] = c;
        return p;
    }

    int degree() const { return int(a.size()); }
    void resize(int m) {
        a.resize(m, 0.0);
        b.resize(m, 0.0);
    }
    double cos_coeff(int j) const { return j == 0 ? a0 : (j <= degree() ? a[j - 1] : 0.0); }
    double sin_coeff(int j) const { return (j >= 1 && j <= degree()) ? b[j - 1] : 0.0; }

    // k-th derivative at t.
    double eval(double t, int k = 0) const {
        double s = (k == 0) ? a0 : 0.0;
        const int m = degree();
        double c1 = std::cos(t), s1 = std::sin(t);
        double cj = 1.0, sj = 0.0;
        for (int j = 1; j <= m; ++j) {
            if ((j & 15) == 1) {
                cj = std::cos(j * t);
                sj = std::sin(j * t);
            } else {
                double nc = cj * c1 - sj * s1;
                sj = sj * c1 + cj * s1;
                cj = nc;
            }
            double aj = a[j - 1], bj = b[j - 1];
            if (aj == 0.0 && bj == 0.0) continue;
            double f = 1.0;
            for (int r = 0; r < k; ++r) f *= j;
            // d^k/dt^k of (a cos + b sin) cycles with period 4
            switch (k & 3) {
            case 0: s += f * (aj * cj + bj * sj); break;
            case 1: s += f * (bj * cj - aj * sj); break;
            case 2: s -= f * (aj * cj + bj * sj); break;
            case 3: s -= f * (bj * cj - aj * sj); break;
            }
        }
        return s;
    }
    double operator()(double t) const { return eval(t, 0); }

    TrigPoly derivative(int k = 1) const {
        TrigPoly d;
        d.resize(degree());
        for (int j = 1; j <= degree(); ++j) {
            double f = 1.0;
            for (int r = 0; r < k; ++r) f *= j;
            double aj = a[j - 1], bj = b[j - 1];
            switch (k & 3) {
            case 0: d.a[j - 1] = f * aj; d.b[j - 1] = f * bj; break;
            case 1: d.a[j - 1] = f * bj; d.b[j - 1] = -f * aj; break;
            case 2: d.a[j - 1] = -f * aj; d.b[j - 1] = -f * bj; break;
            case 3: d.a[j - 1] = -f * bj; d.b[j - 1] = f * aj; break;
            }
        }
        if (k == 0) d.a0 = a0;
        return d;
    }

    // q(t) = p(t + c)
    TrigPoly shifted(double c) const {
        TrigPoly q = *this;
        for (int j = 1; j <= degree(); ++j) {
            double cc = std::cos(j * c), sc = std::sin(j * c);
            q.a[j - 1] = a[j - 1] * cc + b[j - 1] * sc;
            q.b[j - 1] = b[j - 1] * cc - a[j - 1] * sc;
        }
        return q;
    }

    // q(t) = p(-t)
    TrigPoly reversed() const {
        TrigPoly q = *this;
        for (auto& v : q.b) v = -v;
        return q;
    }

    // drop trailing (a_m, b_m) pairs with both |.| <= tol
    TrigPoly normalized(double tol = 0.0) const {
        TrigPoly q = *this;
        int m = q.degree();
        while (m > 0 && std::abs(q.a[m - 1]) <= tol && std::abs(q.b[m - 1]) <= tol) --m;
        q.resize(m);
        return q;
    }

    double max_abs_coeff() const {
        double r = std::abs(a0);
        for (int j = 0; j < degree(); ++j) r = std::max({r, std::abs(a[j]), std::abs(b[j])});
        return r;
    }

    TrigPoly& operator+=(const TrigPoly& o) {
        if (o.degree() > degree()) resize(o.degree());
        a0 += o.a0;
        for (int j = 0; j < o.degree(); ++j) {
            a[j] += o.a[j];
            b[j] += o.b[j];
        }
        return *this;
    }
    TrigPoly& operator-=(const TrigPoly& o) {
        if (o.degree() > degree()) resize(o.degree());
        a0 -= o.a0;
        for (int j = 0; j < o.degree(); ++j) {
            a[j] -= o.a[j];
            b[j] -= o.b[j];
        }
        return *this;
    }
    TrigPoly& operator*=(double s) {
        a0 *= s;
        for (auto& v : a) v *= s;
        for (auto& v : b) v *= s;
        return *this;
    }
};

inline TrigPoly operator+(TrigPoly p, const TrigPoly& q) { return p += q; }
inline TrigPoly operator-(TrigPoly p, const TrigPoly& q) { return p -= q; }
inline TrigPoly operator-(TrigPoly p) { return p *= -1.0; }
inline TrigPoly operator*(TrigPoly p, double s) { return p *= s; }
inline TrigPoly operator*(double s, TrigPoly p) { return p *= s; }

namespace detail {

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

// linear convolution of two coefficient arrays
inline std::vector<cplx> convolve(const std::vector<cplx>& x, const std::vector<cplx>& y) {
    if (x.empty() || y.empty()) return {};
    const std::size_t n = x.size() + y.size() - 1;
    std::vector<cplx> out(n, cplx(0.0));
    if (std::min(x.size(), y.size()) <= 64 || x.size() * y.size() <= 1u << 16) {
        for (std::size_t i = 0; i < x.size(); ++i) {
            if (x[i] == cplx(0.0)) continue;
            for (std::size_t j = 0; j < y.size(); ++j) out[i + j] += x[i] * y[j];
        }
        return out;
    }
    const std::size_t N = next_pow2(n);
    std::vector<cplx> xp(x), yp(y), fx, fy, r;
    xp.resize(N, cplx(0.0));
    yp.resize(N, cplx(0.0));
    Eigen::FFT<double> fft;
    fft.fwd(fx, xp);
    fft.fwd(fy, yp);
    for (std::size_t i = 0; i < N; ++i) fx[i] *= fy[i];
    fft.inv(r, fx);
    std::copy(r.begin(), r.begin() + n, out.begin());
    return out;
}

} // namespace detail

// sum_{k=-D}^{D} c_k e^{ikt}; c[k + D] holds c_k.
struct ComplexTrigPoly {
    int D = 0;
    std::vector<cplx> c{cplx(0.0)};

    ComplexTrigPoly() = default;
    explicit ComplexTrigPoly(int deg) : D(deg), c(2 * deg + 1, cplx(0.0)) {}
    ComplexTrigPoly(cplx constant) : D(0), c{constant} {}

    static ComplexTrigPoly from_real(const TrigPoly& p) {
        ComplexTrigPoly q(p.degree());
        q.c[q.D] = p.a0;
        for (int j = 1; j <= p.degree(); ++j) {
            q.c[q.D + j] = cplx(p.a[j - 1], -p.b[j - 1]) * 0.5;
            q.c[q.D - j] = cplx(p.a[j - 1], p.b[j - 1]) * 0.5;
        }
        return q;
    }
    // re + i im
    static ComplexTrigPoly from_parts(const TrigPoly& re, const TrigPoly& im) {
        return from_real(re) + from_real(im) * cplx(0.0, 1.0);
    }

    int degree() const { return D; }
    cplx coeff(int k) const { return (k < -D || k > D) ? cplx(0.0) : c[k + D]; }

    cplx operator()(double t) const {
        cplx s = c[D];
        cplx e1 = std::polar(1.0, t), ek(1.0, 0.0);
        for (int k = 1; k <= D; ++k) {
            if ((k & 15) == 1) ek = std::polar(1.0, k * t);
            else ek *= e1;
            s += c[D + k] * ek + c[D - k] * std::conj(ek);
        }
        return s;
    }

    TrigPoly real_part() const {
        TrigPoly p;
        p.resize(D);
        p.a0 = c[D].real();
        for (int k = 1; k <= D; ++k) {
            cplx r = (c[D + k] + std::conj(c[D - k])) * 0.5;
            p.a[k - 1] = 2.0 * r.real();
            p.b[k - 1] = -2.0 * r.imag();
        }
        return p;
    }
    TrigPoly imag_part() const { return (*this * cplx(0.0, -1.0)).real_part(); }

    ComplexTrigPoly derivative() const {
        ComplexTrigPoly q = *this;
        for (int k = -D; k <= D; ++k) q.c[k + D] *= cplx(0.0, double(k));
        return q;
    }

    ComplexTrigPoly conj() const {
        ComplexTrigPoly q(D);
        for (int k = -D; k <= D; ++k) q.c[k + D] = std::conj(c[D - k]);
        return q;
    }

    ComplexTrigPoly trimmed(double tol = 0.0) const {
        int d = D;
        while (d > 0 && std::abs(c[D + d]) <= tol && std::abs(c[D - d]) <= tol) --d;
        ComplexTrigPoly q(d);
        for (int k = -d; k <= d; ++k) q.c[k + d] = c[k + D];
        return q;
    }

    ComplexTrigPoly widened(int newD) const {
        if (newD <= D) return *this;
        ComplexTrigPoly q(newD);
        for (int k = -D; k <= D; ++k) q.c[k + newD] = c[k + D];
        return q;
    }

    double norm2() const {
        double s = 0.0;
        for (auto& v : c) s += std::norm(v);
        return std::sqrt(s);
    }

    ComplexTrigPoly& operator+=(const ComplexTrigPoly& o) {
        if (o.D > D) *this = widened(o.D);
        for (int k = -o.D; k <= o.D; ++k) c[k + D] += o.c[k + o.D];
        return *this;
    }
    ComplexTrigPoly& operator-=(const ComplexTrigPoly& o) {
        if (o.D > D) *this = widened(o.D);
        for (int k = -o.D; k <= o.D; ++k) c[k + D] -= o.c[k + o.D];
        return *this;
    }
    ComplexTrigPoly& operator*=(cplx s) {
        for (auto& v : c) v *= s;
        return *this;
    }
    friend ComplexTrigPoly operator+(ComplexTrigPoly p, const ComplexTrigPoly& q) { return p += q; }
    friend ComplexTrigPoly operator-(ComplexTrigPoly p, const ComplexTrigPoly& q) { return p -= q; }
    friend ComplexTrigPoly operator*(ComplexTrigPoly p, cplx s) { return p *= s; }
    friend ComplexTrigPoly operator*(cplx s, ComplexTrigPoly p) { return p *= s; }
    friend ComplexTrigPoly operator*(const ComplexTrigPoly& p, const ComplexTrigPoly& q) {
        ComplexTrigPoly r;
        r.D = p.D + q.D;
        r.c = detail::convolve(p.c, q.c);
        return r;
    }
};

// binary exponentiation
inline ComplexTrigPoly pow(const ComplexTrigPoly& p, int e) {
    ComplexTrigPoly result(cplx(1.0)), base = p;
    while (e > 0) {
        if (e & 1) result = result * base;
        e >>= 1;
        if (e) base = base * base;
    }
    return result;
}

inline TrigPoly multiply(const TrigPoly& p, const TrigPoly& q) {
    if (p.degree() == 0) return q * p.a0;
    if (q.degree() == 0) return p * q.a0;
    return (ComplexTrigPoly::from_real(p) * ComplexTrigPoly::from_real(q)).real_part();
}
inline TrigPoly operator*(const TrigPoly& p, const TrigPoly& q) { return multiply(p, q); }

// values at t_n = 2*pi*n/M
inline std::vector<double> sample_uniform(const TrigPoly& p, int M) {
    std::vector<cplx> bins(M, cplx(0.0));
    bins[0] += p.a0;
    for (int j = 1; j <= p.degree(); ++j) {
        cplx cj = cplx(p.a[j - 1], -p.b[j - 1]) * 0.5;
        bins[j % M] += cj;
        bins[(M - j % M) % M] += std::conj(cj);
    }
    std::vector<cplx> vals;
    Eigen::FFT<double> fft;
    fft.inv(vals, bins);
    std::vector<double> out(M);
    for (int n = 0; n < M; ++n) out[n] = vals[n].real() * M;
    return out;
}

// Z(t) = trig(t) + drift * t
struct AreaIntegral {
    TrigPoly trig;
    double drift = 0.0;
    double operator()(double t) const { return trig(t) + drift * t; }
    double derivative(double t) const { return trig.eval(t, 1) + drift; }
};

// Z(t) = int_0^t Y X' - X Y' ds
inline AreaIntegral area_integral(const TrigPoly& X, const TrigPoly& Y) {
    TrigPoly w = Y * X.derivative() - X * Y.derivative();
    AreaIntegral z;
    z.drift = w.a0;
    z.trig.resize(w.degree());
    for (int k = 1; k <= w.degree(); ++k) {
        double p = w.a[k - 1], q = w.b[k - 1];
        z.trig.a[k - 1] = -q / k;
        z.trig.b[k - 1] = p / k;
        z.trig.a0 += q / k;
    }
    return z;
}

// closed form of Z(2*pi): 2*pi * sum_j j (b_j c_j - a_j d_j), X = (a, b), Y = (c, d)
inline double balance_defect(const TrigPoly& X, const TrigPoly& Y) {
    const int m = std::min(X.degree(), Y.degree());
    double s = 0.0;
    for (int j = 1; j <= m; ++j) s += j * (X.b[j - 1] * Y.a[j - 1] - X.a[j - 1] * Y.b[j - 1]);
    return two_pi * s;
}

enum class Coefficient { none, a, b, c, d };

inline const char* coefficient_name(Coefficient c) {
    switch (c) {
    case Coefficient::a: return "a";
    case Coefficient::b: return "b";
    case Coefficient::c: return "c";
    case Coefficient::d: return "d";
    default: return "none";
    }
}

struct Rebalanced {
    TrigPoly X, Y;
    Coefficient changed = Coefficient::none;
    int frequency = 0;
    double delta = 0.0;
    double defect_before = 0.0;
};

// Zero the defect by moving a single coefficient. The partner of the pivot gets
// changed: pivot a_j moves d_j, b_j moves c_j, c_j moves b_j, d_j moves a_j.
inline Rebalanced rebalance(const TrigPoly& X, const TrigPoly& Y,
                            std::optional<int> frequency = std::nullopt) {
    Rebalanced r{X, Y};
    const double D = balance_defect(X, Y);
    r.defect_before = D;
    double scale = 0.0;
    for (int j = 1; j <= std::min(X.degree(), Y.degree()); ++j)
        scale += j * (std::abs(X.a[j - 1] * Y.b[j - 1]) + std::abs(X.b[j - 1] * Y.a[j - 1]));
    if (std::abs(D) <= 1e-15 * two_pi * scale || D == 0.0) return r;

    const int m = std::max(X.degree(), Y.degree());
    r.X.resize(m);
    r.Y.resize(m);
    auto pick = [&](const std::vector<double>& v) {
        int best = 0;
        double bv = 0.0;
        for (int j = 1; j <= int(v.size()); ++j)
            if (std::abs(v[j - 1]) > bv) {
                bv = std::abs(v[j - 1]);
                best = j;
            }
        return best;
    };
    Coefficient pivot = Coefficient::none;
    int j = 0;
    if (frequency) {
        j = *frequency;
        if (j < 1 || j > m) throw error(errc::invalid_input, "rebalance frequency out of range");
        for (auto [cf, v] : {std::pair{Coefficient::a, &r.X.a}, {Coefficient::b, &r.X.b},
                             {Coefficient::c, &r.Y.a}, {Coefficient::d, &r.Y.b}})
            if ((*v)[j - 1] != 0.0) {
                pivot = cf;
                break;
            }
    } else {
        for (auto [cf, v] : {std::pair{Coefficient::a, &r.X.a}, {Coefficient::b, &r.X.b},
                             {Coefficient::c, &r.Y.a}, {Coefficient::d, &r.Y.b}}) {
            j = pick(*v);
            if (j) {
                pivot = cf;
                break;
            }
        }
    }
    if (pivot == Coefficient::none)
        throw error(errc::all_coefficients_zero, "no nonzero coefficient available to rebalance");

    const double g = two_pi * j;
    switch (pivot) {
    case Coefficient::a:
        r.changed = Coefficient::d;
        r.delta = D / (g * r.X.a[j - 1]);
        r.Y.b[j - 1] += r.delta;
        break;
    case Coefficient::b:
        r.changed = Coefficient::c;
        r.delta = -D / (g * r.X.b[j - 1]);
        r.Y.a[j - 1] += r.delta;
        break;
    case Coefficient::c:
        r.changed = Coefficient::b;
        r.delta = -D / (g * r.Y.a[j - 1]);
        r.X.b[j - 1] += r.delta;
        break;
    case Coefficient::d:
        r.changed = Coefficient::a;
        r.delta = D / (g * r.Y.b[j - 1]);
        r.X.a[j - 1] += r.delta;
        break;
    default: break;
    }
    r.frequency = j;
    return r;
}

struct FourierProjection {
    TrigPoly p;
    double tail_ratio = 0.0;
    bool degree_too_low = false;
    int samples = 0;
};

inline int projection_sample_count(int degree, int oversample = 8) {
    return int(detail::next_pow2(std::size_t(oversample) * (2 * degree + 1)));
}

// values at t_n = 2*pi*n/M, M = values.size()
inline FourierProjection fourier_project_samples(const std::vector<double>& values, int degree,
                                                 double tail_tol = 1e-8) {
    const int M = int(values.size());
    if (M < 2 * degree + 1) throw error(errc::invalid_input, "too few samples for requested degree");
    std::vector<cplx> in(values.begin(), values.end()), out;
    Eigen::FFT<double> fft;
    fft.fwd(out, in);
    FourierProjection r;
    r.samples = M;
    r.p.resize(degree);
    r.p.a0 = out[0].real() / M;
    for (int k = 1; k <= degree; ++k) {
        cplx ck = out[k] / double(M);
        r.p.a[k - 1] = 2.0 * ck.real();
        r.p.b[k - 1] = -2.0 * ck.imag();
    }
    double total = 0.0, tail = 0.0;
    for (int k = 0; k < M; ++k) {
        double e = std::norm(out[k]);
        total += e;
        if (std::min(k, M - k) > degree) tail += e;
    }
    r.tail_ratio = total > 0.0 ? tail / total : 0.0;
    r.degree_too_low = r.tail_ratio > tail_tol;
    return r;
}

inline FourierProjection fourier_project(const std::function<double(double)>& f, int degree,
                                         int oversample = 8, double tail_tol = 1e-8) {
    const int M = projection_sample_count(degree, oversample);
    std::vector<double> v(M);
    for (int n = 0; n < M; ++n) v[n] = f(two_pi * n / M);
    return fourier_project_samples(v, degree, tail_tol);
}

struct HermiteConstraint {
    double t;
    int order;
    double value;
};

// Minimal-degree trig polynomial through value/derivative constraints.
inline TrigPoly trig_hermite_interpolate(const std::vector<HermiteConstraint>& cs) {
    const int N = int(cs.size());
    if (N == 0) throw error(errc::invalid_input, "no constraints");
    for (int i = 0; i < N; ++i)
        for (int j = i + 1; j < N; ++j)
            if (cs[i].t == cs[j].t && cs[i].order == cs[j].order)
                throw error(errc::singular_system, "duplicate (t, order) constraint");
    for (int d = (N - 1) / 2; d <= N + 4; ++d) {
        const int n = 2 * d + 1;
        Eigen::MatrixXd A(N, n);
        Eigen::VectorXd rhs(N);
        for (int r = 0; r < N; ++r) {
            const auto& c = cs[r];
            A(r, 0) = c.order == 0 ? 1.0 : 0.0;
            for (int j = 1; j <= d; ++j) {
                double f = std::pow(double(j), c.order);
                double ph = j * c.t + c.order * pi / 2;
                A(r, 2 * j - 1) = f * std::cos(ph);
                A(r, 2 * j) = f * std::sin(ph);
            }
            rhs(r) = c.value;
        }
        Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod;
        cod.setThreshold(1e-11);
        cod.compute(A);
        if (cod.rank() < N) continue;
        Eigen::VectorXd x = cod.solve(rhs);
        TrigPoly p;
        p.resize(d);
        p.a0 = x(0);
        for (int j = 1; j <= d; ++j) {
            p.a[j - 1] = x(2 * j - 1);
            p.b[j - 1] = x(2 * j);
        }
        bool ok = true;
        for (const auto& c : cs)
            if (std::abs(p.eval(c.t, c.order) - c.value) > 1e-9 * std::max(1.0, std::abs(c.value)))
                ok = false;
        if (ok) return p;
    }
    throw error(errc::singular_system, "constraints are linearly dependent or inconsistent");
}

} // namespace legknot
