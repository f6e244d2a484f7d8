#pragma once

// Built-in curves shared by the tests, the acceptance binary and data/.

#include <cmath>

#include "diagram.hpp"
#include "geometry.hpp"
#include "knot.hpp"
#include "legendrify.hpp"
#include "trigpoly.hpp"

namespace legknot::fixtures {

// X = cos3t (2 + cos2t), Y = sin4t + sin(2t)/4; 9 crossings, origin at (pi/2, 3pi/2)
inline TrigPoly figure_eight_X() {
    TrigPoly p;
    p.resize(5);
    p.a[0] = 0.5;
    p.a[2] = 2.0;
    p.a[4] = 0.5;
    return p;
}
inline TrigPoly figure_eight_Y() {
    TrigPoly p;
    p.resize(4);
    p.b[1] = 0.25;
    p.b[3] = 1.0;
    return p;
}

// Z-induced code with the origin crossing flipped
inline const char* figure_eight_target =
    "U1- U2+ U3- U4+ O5+ U6+ U7- U8+ U9- O1- O6+ O7- O8+ U5+ O2+ O3- O4+ O9-";

inline DiagramCurve figure_eight() {
    return {figure_eight_X(), figure_eight_Y(), parse_gauss_code(figure_eight_target)};
}

// X = sin t + 2 sin2t, Y = cos t - 2 cos2t, alternating target
inline DiagramCurve trefoil() {
    DiagramCurve d;
    d.X = TrigPoly(0.0, {0.0, 0.0}, {1.0, 2.0});
    d.Y = TrigPoly(0.0, {1.0, -2.0}, {0.0, 0.0});
    d.target = parse_gauss_code("O1+ U2+ O3+ U1+ O2+ U3+");
    return d;
}

inline DiagramCurve unknot() {
    return {TrigPoly::cos_mode(1), TrigPoly::sin_mode(1), {}};
}

// degree-11 figure-eight in the xi2 model
inline TrigPoly best_fig8_X() { return TrigPoly::cos_mode(1) + TrigPoly::cos_mode(3, 2.4); }

inline TrigPoly best_fig8_Y() {
    // (13/12 + 5/12 cos2t)(1.5 cos1 cos6t + (1.5 sin1 + 1) sin6t)
    TrigPoly f(13.0 / 12.0, {0.0, 5.0 / 12.0}, {});
    TrigPoly g = TrigPoly::cos_mode(6, 1.5 * std::cos(1.0)) + TrigPoly::sin_mode(6, 1.5 * std::sin(1.0) + 1.0);
    return f * g;
}

// printed, rounded to four decimals
inline TrigPoly best_fig8_Z_printed() {
    TrigPoly z;
    z.resize(11);
    const double a[] = {-1.4183, -3.3015, -1.1110, -0.4511, -0.4169, -0.0921};
    const double b[] = {-3.9589, -9.2153, -3.1011, -1.2590, -1.1636, -0.2571};
    for (int k = 0; k < 6; ++k) {
        z.a[2 * k] = a[k];
        z.b[2 * k] = b[k];
    }
    return z;
}

inline LegendrianR3Curve best_fig8() { return legendrian_lift(best_fig8_X(), best_fig8_Y()); }

inline S3Curve best_fig8_s3() { return project_to_s3(best_fig8()); }

} // namespace legknot::fixtures
