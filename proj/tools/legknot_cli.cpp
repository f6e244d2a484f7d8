// legknot: build Legendrian curves from knot diagrams, solve for tangency
// polynomials, evolve electromagnetic knots, verify and export curves.

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <legknot/legknot.hpp>

namespace fs = std::filesystem;
using namespace legknot;
using io::json;

namespace {

struct Common {
    std::string config_file;
    std::vector<std::string> tol_overrides;
    std::string out;
    int threads = 0;
    long long seed = -1;
    int samples = 0;
};

void add_common(CLI::App* sub, Common& c) {
    sub->add_option("--config", c.config_file, "key = value configuration file");
    sub->add_option("--tol", c.tol_overrides, "override a setting, e.g. --tol newton_tol=1e-10 (repeatable)");
    sub->add_option("--out", c.out, "output directory");
    sub->add_option("--threads", c.threads, "worker threads (1 = reproducibility baseline)");
    sub->add_option("--seed", c.seed, "random seed for Monte-Carlo checks");
    sub->add_option("--samples", c.samples, "sample count for residuals and frames");
}

RunConfig resolve(const Common& c) {
    RunConfig cfg;
    if (!c.config_file.empty()) cfg.load(c.config_file);
    for (const auto& kv : c.tol_overrides) {
        auto eq = kv.find('=');
        if (eq == std::string::npos || !cfg.set(kv.substr(0, eq), kv.substr(eq + 1)))
            throw error(errc::invalid_input, "bad override '" + kv + "'");
    }
    if (!c.out.empty()) cfg.out = c.out;
    if (c.threads > 0) cfg.threads = c.threads;
    if (c.seed >= 0) cfg.seed = static_cast<unsigned long long>(c.seed);
    if (c.samples > 0) cfg.samples = cfg.frame_samples = c.samples;
    cfg.check();
    fs::create_directories(cfg.out);
    return cfg;
}

std::string path_in(const RunConfig& cfg, const std::string& name) { return (fs::path(cfg.out) / name).string(); }

Parity parity_of(const std::string& s) {
    return s == "even" ? Parity::even_only : s == "all" ? Parity::all : Parity::automatic;
}

json signature_json(const KnotSignature& s) { return {{"crossings", s.crossings}, {"determinant", s.determinant}}; }

std::vector<Vec2> sample_xy(const std::function<Vec2(double)>& f, int n) {
    std::vector<Vec2> v(n);
    for (int k = 0; k < n; ++k) v[k] = f(two_pi * k / n);
    return v;
}

json residual_json(const S3Curve& c, const std::optional<LegendrianR3Curve>& r3, int samples, double tol) {
    json j;
    auto s3 = legendrian_residual_s3(c, samples);
    j["s3_re"] = s3.re;
    j["s3_im"] = s3.im;
    j["rho_defect"] = rho_identity_defect(c);
    bool ok = s3.re <= tol && s3.im <= tol && j["rho_defect"].get<double>() <= tol;
    if (r3) {
        TrigPoly r = r3->Z.derivative() + r3->X * r3->Y.derivative() - r3->Y * r3->X.derivative();
        int worst = 0;
        double wv = std::abs(r.a0);
        for (int k = 1; k <= r.degree(); ++k) {
            double v = std::max(std::abs(r.a[k - 1]), std::abs(r.b[k - 1]));
            if (v > wv) {
                wv = v;
                worst = k;
            }
        }
        double sampled = 0, t_worst = 0;
        for (int k = 0; k < samples; ++k) {
            double t = two_pi * k / samples, v = std::abs(r(t));
            if (v > sampled) {
                sampled = v;
                t_worst = t;
            }
        }
        j["identity_defect"] = wv;
        j["identity_worst_frequency"] = worst;
        j["identity_sampled"] = sampled;
        j["identity_worst_t"] = t_worst;
        ok = ok && wv <= tol;
    }
    j["tolerance"] = tol;
    j["pass"] = ok;
    return j;
}

int cmd_build(const std::string& file, const RunConfig& cfg) {
    DiagramCurve d = io::diagram_from_json(io::read_json(file));
    PipelineConfig pc;
    pc.initial_degree = cfg.initial_degree;
    pc.degree_cap = cfg.degree_cap;
    pc.oversample = cfg.oversample;
    pc.tie_tol = cfg.tie_tol;
    io::write_text(path_in(cfg, "diagram.svg"), io::svg_polylines({sample_xy([&](double t) { return d.position(t); }, 2048)}));
    PipelineResult r = build_pipeline(d, pc);
    json curve = io::to_json(r.curve);
    curve["legendrian"] = io::to_json(r.lift.curve);
    io::write_json(path_in(cfg, "curve.json"), curve);
    io::write_text(path_in(cfg, "curve_xy.svg"),
                   io::svg_polylines({sample_xy([&](double t) { return Vec2(r.lift.curve.X(t), r.lift.curve.Y(t)); },
                                                8 * r.degree + 2048)}));
    json rep;
    rep["input"] = file;
    rep["target_code"] = to_string(r.target_code);
    rep["target"] = signature_json(r.target);
    rep["achieved"] = signature_json(r.achieved);
    rep["degree"] = r.degree;
    rep["wrong_crossings"] = 0;
    for (const auto& c : r.checks) rep["wrong_crossings"] = rep["wrong_crossings"].get<int>() + (c.correct ? 0 : 1);
    json sp = json::array();
    for (const auto& s : r.plan.insertions)
        sp.push_back({{"tau", s.tau}, {"radius", s.radius}, {"turns", s.traversals}, {"side", side_name(s.side)},
                      {"delta", s.delta}});
    rep["spirals"] = sp;
    json at = json::array();
    for (const auto& a : r.attempts)
        at.push_back({{"degree", a.degree}, {"c0", a.c0_deviation}, {"c1", a.c1_deviation},
                      {"raw_crossings", a.raw_crossings}, {"signature", signature_json(a.signature)},
                      {"failure", a.failure}});
    rep["attempts"] = at;
    rep["rebalance"] = {{"coefficient", coefficient_name(r.lift.rebalance.changed)},
                        {"frequency", r.lift.rebalance.frequency},
                        {"delta", r.lift.rebalance.delta},
                        {"defect_before", r.lift.rebalance.defect_before}};
    rep["residuals"] = residual_json(r.curve, r.lift.curve, cfg.samples, std::max(cfg.residual_tol, 1e-9));
    rep["code"] = to_string(r.code);
    io::write_json(path_in(cfg, "build_report.json"), rep);
    std::cout << "degree: " << r.degree << "\n"
              << "target: crossings " << r.target.crossings << " determinant " << r.target.determinant << "\n"
              << "signature: crossings " << r.achieved.crossings << " determinant " << r.achieved.determinant << "\n"
              << "residuals: identity " << rep["residuals"]["identity_defect"].get<double>() << " s3 "
              << rep["residuals"]["s3_im"].get<double>() << "\n";
    return 0;
}

int cmd_solve_g(const std::string& file, int n, bool dims_only, const RunConfig& cfg) {
    io::CurveFile cf = io::read_curve(file);
    Parity par = parity_of(cfg.parity);
    json rep;
    rep["n"] = n;
    if (dims_only) {
        auto [rows, cols] = system_dimensions(cf.curve, n, par);
        rep["rows"] = rows;
        rep["cols"] = cols;
        io::write_json(path_in(cfg, "solve_g_report.json"), rep);
        std::cout << "dimensions: " << rows << " x " << cols << "\n";
        return 0;
    }
    TangencySystem s = assemble_A(cf.curve, n, par, cfg.threads);
    rep["rows"] = s.rows();
    rep["cols"] = s.cols();
    rep["D"] = s.D;
    rep["parity"] = parity_name(s.parity);
    std::cout << "dimensions: " << s.rows() << " x " << s.cols() << "\n";
    NullspaceResult ns = nullspace(s, cfg.nullspace_tol);
    const auto& sv = ns.singular_values;
    double smax = sv.size() ? sv[0] : 0.0;
    json tail = json::array();
    for (int k = std::max<int>(0, int(sv.size()) - 10); k < sv.size(); ++k) tail.push_back(smax > 0 ? sv[k] / smax : 0.0);
    rep["singular_tail"] = tail;
    json cands = json::array();
    for (std::size_t k = 0; k < ns.candidates.size(); ++k) {
        const auto& c = ns.candidates[k];
        std::string name = "candidate_" + std::to_string(k + 1) + ".txt";
        std::ofstream os(path_in(cfg, name));
        write_coefficients(os, c.g);
        double maxr = 0;
        for (int i = 0; i < 512; ++i) maxr = std::max(maxr, std::pow(cf.curve.rho(two_pi * i / 512), n));
        json cj{{"file", name}, {"sigma", c.sigma},
                {"on_curve_residual", on_curve_residual(c.g, cf.curve, cfg.samples) / (c.g.norm() * maxr)}};
        if (k < 4) {
            GReport g = verify_candidate_G(c.g, cf.curve, 512, 2000, cfg.seed);
            cj["heuristics"] = {{"max_on_curve", g.max_on_curve},
                                {"min_gradient_on_curve", g.min_gradient},
                                {"min_interior_monte_carlo", g.min_interior},
                                {"min_sphere_off_curve_monte_carlo", g.min_sphere_off_curve}};
        }
        cands.push_back(cj);
    }
    rep["candidates"] = cands;
    io::write_json(path_in(cfg, "solve_g_report.json"), rep);
    std::cout << "candidates: " << ns.candidates.size() << "\n";
    return 0;
}

int cmd_solve_h(const std::string& file, int n, const RunConfig& cfg) {
    io::CurveFile cf = io::read_curve(file);
    if (n < 2) throw error(errc::degree_too_small, "h needs n >= 2, got " + std::to_string(n));
    TangencySystem s = assemble_A(cf.curve, n, parity_of(cfg.parity), cfg.threads);
    s = assemble_y(cf.curve, n, std::move(s), cfg.legendrian_tol);
    LeastSquares ls = least_squares(s);
    {
        std::ofstream os(path_in(cfg, "h.txt"));
        write_coefficients(os, ls.h);
    }
    HReport hr = verify_candidate_h(ls.h, cf.curve, 256);
    json rep{{"n", n}, {"rows", s.rows()}, {"cols", s.cols()}, {"residual", ls.residual}, {"rank", ls.rank},
             {"zero_h", ls.h.is_zero()}, {"degenerate_field", hr.degenerate}, {"max_parallelism", hr.max_parallelism},
             {"max_section_error", hr.max_section_error}};
    io::write_json(path_in(cfg, "solve_h_report.json"), rep);
    std::cout << "dimensions: " << s.rows() << " x " << s.cols() << "\n"
              << "residual: " << ls.residual << "\n";
    if (hr.degenerate) std::cout << "field: DegenerateField\n";
    else std::cout << "parallelism: " << hr.max_parallelism << "\n";
    return 0;
}

int cmd_evolve(const std::string& file, bool escape, bool svg, const RunConfig& cfg) {
    io::CurveFile cf = io::read_curve(file);
    auto frames = evolve_frames(cf.curve, cfg.times, cfg.frame_samples, cfg.threads);
    io::write_text(path_in(cfg, "frames.csv"), io::frames_csv(frames));
    io::write_json(path_in(cfg, "frames.json"), io::frames_json(frames));
    json rep;
    json fr = json::array();
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& f = frames[i];
        double lo, hi;
        auto h = z_histogram(f, 10, &lo, &hi);
        int failed = 0;
        for (bool b : f.converged) failed += !b;
        fr.push_back({{"t", f.t}, {"min_distance", min_distance_to_origin(f)}, {"mean_z", mean_z(f)},
                      {"failed", failed}, {"z_histogram", {{"lo", lo}, {"hi", hi}, {"counts", h}}}});
        std::cout << "t " << f.t << " mean_z " << mean_z(f) << " min_distance " << min_distance_to_origin(f)
                  << " failed " << failed << "\n";
        if (svg) {
            std::vector<Vec2> xy;
            for (const auto& p : f.points) xy.push_back(p.head<2>());
            io::write_text(path_in(cfg, "frame_" + std::to_string(i) + ".svg"), io::svg_polylines({xy}));
        }
    }
    rep["frames"] = fr;
    if (escape) {
        std::vector<double> grid;
        for (double t : cfg.times)
            if (t != 0) grid.push_back(std::abs(t));
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
        EscapeReport er = escape_time(cf.curve, cfg.escape_radius, grid, cfg.frame_samples, cfg.threads);
        json prof = json::array();
        for (auto [t, d] : er.profile) prof.push_back({t, d});
        rep["escape"] = {{"radius", cfg.escape_radius}, {"T_plus", er.T_plus}, {"T_minus", er.T_minus}, {"profile", prof}};
        std::cout << "escape: T+ " << er.T_plus << " T- " << er.T_minus << "\n";
    }
    io::write_json(path_in(cfg, "evolve_report.json"), rep);
    return 0;
}

int cmd_verify(const std::string& file, const RunConfig& cfg) {
    io::CurveFile cf = io::read_curve(file);
    json rep = residual_json(cf.curve, cf.r3, cfg.samples, cfg.residual_tol);
    if (cf.r3) {
        try {
            rep["signature"] = signature_json(signature(gauss_code(*cf.r3)));
        } catch (const error& e) {
            rep["signature_error"] = e.what();
        }
    }
    io::write_json(path_in(cfg, "verify_report.json"), rep);
    std::cout << rep.dump(2) << "\n";
    if (!rep["pass"].get<bool>()) {
        std::cerr << "verify: residual above tolerance";
        if (rep.contains("identity_worst_frequency"))
            std::cerr << " (worst frequency " << rep["identity_worst_frequency"] << ", t = " << rep["identity_worst_t"]
                      << ")";
        std::cerr << "\n";
        return 3;
    }
    return 0;
}

int cmd_export(const std::string& file, const std::string& format, int n, const RunConfig& cfg) {
    io::CurveFile cf = io::read_curve(file);
    if (format == "csv") {
        io::write_text(path_in(cfg, "samples.csv"), io::samples_csv(cf.curve, cfg.samples));
    } else if (format == "svg") {
        std::vector<Vec3> pts = curve_in_r3(cf.curve, cfg.samples);
        std::vector<Vec2> xy;
        for (const auto& p : pts) xy.push_back(p.head<2>());
        io::write_text(path_in(cfg, "projection.svg"), io::svg_polylines({xy}));
    } else if (format == "mtx") {
        if (n < 0) throw error(errc::invalid_input, "--n is required for mtx export");
        TangencySystem s = assemble_A(cf.curve, n, parity_of(cfg.parity), cfg.threads);
        {
            std::ofstream os(path_in(cfg, "A.mtx"));
            write_matrix_market(os, s.A);
        }
        if (n >= 2) {
            s = assemble_y(cf.curve, n, std::move(s), cfg.legendrian_tol);
            std::ofstream os(path_in(cfg, "y.mtx"));
            write_matrix_market(os, s.y);
        }
    } else {
        throw error(errc::invalid_input, "unknown format " + format);
    }
    std::cout << "exported " << format << " to " << cfg.out << "\n";
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Legendrian knots as trigonometric curves, tangency systems and electromagnetic knots"};
    app.require_subcommand(1);
    Common common;
    std::string input, format = "csv";
    int n = -1, degree = 0, degree_cap = 0;
    std::string times;
    bool dims_only = false, escape = false, svg = false;
    std::string parity;

    auto* build = app.add_subcommand("build", "diagram file -> Legendrian curve in S^3");
    build->add_option("diagram", input, "diagram JSON")->required();
    build->add_option("--degree", degree, "initial Fourier degree");
    build->add_option("--degree-cap", degree_cap, "largest Fourier degree tried");

    auto* sg = app.add_subcommand("solve-g", "nullspace candidates G for a curve");
    sg->add_option("curve", input, "curve JSON")->required();
    sg->add_option("--n", n, "polynomial degree bound")->required();
    sg->add_flag("--dims-only", dims_only, "report system dimensions without solving");
    sg->add_option("--parity", parity, "auto | even | all");

    auto* sh = app.add_subcommand("solve-h", "least-squares h with h = H on the curve");
    sh->add_option("curve", input, "curve JSON")->required();
    sh->add_option("--n", n, "polynomial degree bound")->required();
    sh->add_option("--parity", parity, "auto | even | all");

    auto* ev = app.add_subcommand("evolve", "field-line frames Phi_t(L)");
    ev->add_option("curve", input, "curve JSON")->required();
    ev->add_option("--times", times, "comma separated times");
    ev->add_flag("--escape", escape, "compute escape times for the ball of radius escape_radius");
    ev->add_flag("--svg", svg, "write an xy SVG per frame");

    auto* ve = app.add_subcommand("verify", "Legendrian residuals of a curve file");
    ve->add_option("curve", input, "curve JSON")->required();

    auto* ex = app.add_subcommand("export", "samples CSV, projection SVG or Matrix Market system");
    ex->add_option("curve", input, "curve JSON")->required();
    ex->add_option("--format", format, "csv | svg | mtx");
    ex->add_option("--n", n, "degree bound for mtx");

    for (auto* s : {build, sg, sh, ev, ve, ex}) add_common(s, common);

    CLI11_PARSE(app, argc, argv);
    try {
        RunConfig cfg = resolve(common);
        if (degree > 0) cfg.initial_degree = degree;
        if (degree_cap > 0) cfg.degree_cap = degree_cap;
        if (!times.empty()) cfg.times = RunConfig::parse_list(times);
        if (!parity.empty()) cfg.parity = parity;
        cfg.check();
        if (*build) return cmd_build(input, cfg);
        if (*sg) return cmd_solve_g(input, n, dims_only, cfg);
        if (*sh) return cmd_solve_h(input, n, cfg);
        if (*ev) return cmd_evolve(input, escape, svg, cfg);
        if (*ve) return cmd_verify(input, cfg);
        if (*ex) return cmd_export(input, format, n, cfg);
    } catch (const error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
