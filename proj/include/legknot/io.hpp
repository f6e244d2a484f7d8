#pragma once

// File formats. Curves are JSON; every TrigPoly is {"a0": c, "cos": [...], "sin": [...]}.
//   diagram:        {"kind": "diagram", "X": tp, "Y": tp, "target": "O1+ U2- ..."}
//   legendrian_r3:  {"kind": "legendrian_r3", "X": tp, "Y": tp, "Z": tp}   (Z optional: lifted)
//   s3curve:        {"kind": "s3curve", "n1".."n4": tp, "rho": tp, "legendrian": {X, Y, Z}?}
// Samples export as CSV (t, x1, y1, x2, y2), projections as SVG polylines.

#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "diagram.hpp"
#include "dynamics.hpp"
#include "errors.hpp"
#include "legendrify.hpp"
#include "trigpoly.hpp"

namespace legknot::io {

using json = nlohmann::ordered_json;

inline json to_json(const TrigPoly& p) {
    return json{{"a0", p.a0}, {"cos", p.a}, {"sin", p.b}};
}

inline TrigPoly trig_from_json(const json& j) {
    if (!j.is_object()) throw error(errc::invalid_input, "trig polynomial must be an object");
    std::vector<double> a = j.value("cos", std::vector<double>{}), b = j.value("sin", std::vector<double>{});
    return TrigPoly(j.value("a0", 0.0), a, b);
}

inline json read_json(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw error(errc::invalid_input, "cannot open " + path);
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw error(errc::invalid_input, path + ": " + e.what());
    }
}

inline void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw error(errc::invalid_input, "cannot write " + path);
    out << text;
}

inline void write_json(const std::string& path, const json& j) { write_text(path, j.dump(2) + "\n"); }

inline std::string kind_of(const json& j) { return j.value("kind", std::string()); }

inline json to_json(const DiagramCurve& d) {
    json j{{"kind", "diagram"}, {"X", to_json(d.X)}, {"Y", to_json(d.Y)}};
    if (!d.target.empty()) j["target"] = to_string(d.target);
    return j;
}

inline DiagramCurve diagram_from_json(const json& j) {
    if (kind_of(j) != "diagram") throw error(errc::invalid_input, "expected kind \"diagram\"");
    DiagramCurve d;
    d.X = trig_from_json(j.at("X"));
    d.Y = trig_from_json(j.at("Y"));
    if (j.contains("target")) {
        d.target = parse_gauss_code(j.at("target").get<std::string>());
        validate(d.target);
    }
    return d;
}

inline json to_json(const LegendrianR3Curve& c) {
    return json{{"kind", "legendrian_r3"}, {"X", to_json(c.X)}, {"Y", to_json(c.Y)}, {"Z", to_json(c.Z)}};
}

inline LegendrianR3Curve legendrian_from_json(const json& j) {
    TrigPoly X = trig_from_json(j.at("X")), Y = trig_from_json(j.at("Y"));
    if (!j.contains("Z")) return legendrian_lift(X, Y);
    return {X, Y, trig_from_json(j.at("Z"))};
}

inline json to_json(const S3Curve& c) {
    return json{{"kind", "s3curve"}, {"n1", to_json(c.n1)}, {"n2", to_json(c.n2)}, {"n3", to_json(c.n3)},
                {"n4", to_json(c.n4)}, {"rho", to_json(c.rho)}};
}

// A curve file read for the S^3 side; legendrian_r3 input is projected.
struct CurveFile {
    S3Curve curve;
    std::optional<LegendrianR3Curve> r3;
    std::string kind;
};

inline CurveFile curve_from_json(const json& j) {
    CurveFile f;
    f.kind = kind_of(j);
    if (f.kind == "legendrian_r3") {
        f.r3 = legendrian_from_json(j);
        f.curve = project_to_s3(*f.r3);
    } else if (f.kind == "s3curve") {
        f.curve.n1 = trig_from_json(j.at("n1"));
        f.curve.n2 = trig_from_json(j.at("n2"));
        f.curve.n3 = trig_from_json(j.at("n3"));
        f.curve.n4 = trig_from_json(j.at("n4"));
        f.curve.rho = trig_from_json(j.at("rho"));
        if (j.contains("legendrian")) f.r3 = legendrian_from_json(j.at("legendrian"));
    } else {
        throw error(errc::invalid_input, "expected kind \"s3curve\" or \"legendrian_r3\", got \"" + f.kind + "\"");
    }
    return f;
}

inline CurveFile read_curve(const std::string& path) { return curve_from_json(read_json(path)); }

inline std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

inline std::string samples_csv(const S3Curve& c, int samples) {
    std::ostringstream os;
    os << std::setprecision(17) << "t,x1,y1,x2,y2\n";
    for (int k = 0; k < samples; ++k) {
        double t = two_pi * k / samples;
        auto p = c.point(t);
        os << t << ',' << p[0] << ',' << p[1] << ',' << p[2] << ',' << p[3] << '\n';
    }
    return os.str();
}

// closed polylines, one per entry, scaled into a square canvas
inline std::string svg_polylines(const std::vector<std::vector<Vec2>>& lines, int size = 600) {
    double lo_x = 1e300, lo_y = 1e300, hi_x = -1e300, hi_y = -1e300;
    for (const auto& l : lines)
        for (const auto& p : l) {
            if (!p.allFinite()) continue;
            lo_x = std::min(lo_x, p.x());
            hi_x = std::max(hi_x, p.x());
            lo_y = std::min(lo_y, p.y());
            hi_y = std::max(hi_y, p.y());
        }
    double span = std::max({hi_x - lo_x, hi_y - lo_y, 1e-12});
    double pad = 0.05 * size, s = (size - 2 * pad) / span;
    std::ostringstream os;
    os << std::setprecision(6);
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << size << "\" height=\"" << size << "\" viewBox=\"0 0 "
       << size << ' ' << size << "\">\n";
    for (const auto& l : lines) {
        os << "<polygon fill=\"none\" stroke=\"black\" stroke-width=\"1\" points=\"";
        for (const auto& p : l) {
            if (!p.allFinite()) continue;
            os << pad + (p.x() - lo_x) * s << ',' << size - pad - (p.y() - lo_y) * s << ' ';
        }
        os << "\"/>\n";
    }
    os << "</svg>\n";
    return os.str();
}

inline std::string frames_csv(const std::vector<EvolutionFrame>& frames) {
    std::ostringstream os;
    os << std::setprecision(17) << "t,index,x,y,z,converged\n";
    for (const auto& f : frames)
        for (std::size_t k = 0; k < f.points.size(); ++k)
            os << f.t << ',' << k << ',' << f.points[k].x() << ',' << f.points[k].y() << ',' << f.points[k].z() << ','
               << (f.converged[k] ? 1 : 0) << '\n';
    return os.str();
}

inline json frames_json(const std::vector<EvolutionFrame>& frames) {
    json out = json::array();
    for (const auto& f : frames) {
        json pts = json::array();
        for (const auto& p : f.points) pts.push_back({p.x(), p.y(), p.z()});
        int failed = 0;
        for (bool b : f.converged) failed += !b;
        out.push_back({{"t", f.t}, {"failed", failed}, {"points", pts}});
    }
    return out;
}

} // namespace legknot::io
