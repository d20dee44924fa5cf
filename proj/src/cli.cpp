#include "eqmin/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "eqmin/lemma_lab.hpp"

namespace eqmin {

namespace {

std::string num(double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

void append_row(std::string& s, double arc, const State& st) {
    s += num(arc);
    s += ',';
    s += num(st.r);
    s += ',';
    s += num(st.theta);
    s += ',';
    s += num(st.alpha);
    s += '\n';
}

const char* csv_header = "s,r,theta,alpha\n";

std::size_t flush(const std::string& s, std::ostream& out) {
    out << s;
    if (!out) throw std::ios_base::failure("csv write failed");
    return s.size();
}

}  // namespace

void RunConfig::validate() const {
    for (double t : {tol_abs, tol_rel, tol_event, tol_bisect, tol_corner, s_max, eps_bdry})
        if (!(t > 0.0) || !std::isfinite(t)) throw UsageError("tolerances and limits must be positive");
    if (n < 2) throw UsageError("--n must be at least 2");
    if (k < 1) throw UsageError("--k must be at least 1");
}

IntegratorOptions RunConfig::integrator() const {
    IntegratorOptions o;
    o.abs_tol = tol_abs;
    o.rel_tol = tol_rel;
    o.event_tol = tol_event;
    o.s_max = s_max;
    o.eps_bdry = eps_bdry;
    return o;
}

ShootingOptions RunConfig::shooting() const {
    ShootingOptions o;
    o.integ = integrator();
    o.corner_tol = tol_corner;
    return o;
}

std::size_t write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    std::string s = csv_header;
    for (const auto& smp : traj.samples) append_row(s, smp.s, smp.state);
    return flush(s, out);
}

std::size_t write_trajectory_csv(const AssembledCurve& curve, std::ostream& out) {
    std::string s = csv_header;
    for (std::size_t i = 0; i < curve.segments.size(); ++i) {
        const auto& seg = curve.segments[i];
        for (std::size_t j = (i == 0 ? 0 : 1); j < seg.samples.size(); ++j)
            append_row(s, curve.offsets[i] + seg.samples[j].s, seg.samples[j].state);
    }
    return flush(s, out);
}

std::vector<CsvRow> read_trajectory_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != "s,r,theta,alpha") throw std::runtime_error("bad trajectory csv header");
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        double v[4];
        const char* p = line.data();
        const char* end = line.data() + line.size();
        for (int i = 0; i < 4; ++i) {
            auto res = std::from_chars(p, end, v[i]);
            if (res.ec != std::errc()) throw std::runtime_error("bad trajectory csv row: " + line);
            p = res.ptr;
            if (i < 3) {
                if (p == end || *p != ',') throw std::runtime_error("bad trajectory csv row: " + line);
                ++p;
            }
        }
        rows.push_back({v[0], State{v[1], v[2], v[3]}});
    }
    return rows;
}

namespace {

// writes through a file when a path is given, else to the fallback stream
template <class Fn>
void emit(const std::string& path, std::ostream& fallback, Fn&& fn) {
    if (path.empty() || path == "-") {
        fn(fallback);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw std::ios_base::failure("cannot open " + path);
    fn(f);
}

std::string with_suffix(const std::string& base, const std::string& suffix) {
    if (base.empty() || base == "-") return "";
    // foo.csv -> foo_half0.csv
    std::filesystem::path p(base);
    if (p.extension() == ".csv") p.replace_extension();
    return p.string() + suffix;
}

std::string state_str(const State& s) {
    return "(r=" + num(s.r) + ", theta=" + num(s.theta) + ", alpha=" + num(s.alpha) + ")";
}

int cmd_integrate(const RunConfig& cfg, std::ostream& out) {
    SystemParams p = cfg.system == System::TripleProduct ? SystemParams::triple_product() : SystemParams::double_product(cfg.n);
    p.validate();
    Trajectory t = integrate(State{cfg.r0, cfg.theta0, cfg.alpha0}, p, EventSpec{}, cfg.integrator());
    emit(cfg.out, out, [&](std::ostream& o) { write_trajectory_csv(t, o); });
    if (!cfg.out.empty() && cfg.out != "-")
        out << "exit " << t.exit.name << " at s=" << num(t.exit.s_exit) << ' ' << state_str(t.exit.state_exit) << '\n';
    return 0;
}

int cmd_torus(const RunConfig& cfg, std::ostream& out) {
    CornerResult c = find_torus_corner(cfg.n, cfg.tol_bisect, cfg.shooting());
    AssembledCurve orbit = assemble(c.quarter, CurveKind::TorusOrbit);
    const double res = curvature_residual(orbit, orbit.params);
    CrossingCount cc = count_crossings(orbit);
    out << "n " << cfg.n << "\nr0* " << num(c.r0_star) << "\nexit_theta " << num(c.quarter.exit.state_exit.theta)
        << "\ncorner_defect " << num(c.defect) << "\nclosure_gap " << num(orbit.closure_gap) << "\ncurvature_residual "
        << num(res) << "\nself_intersections " << cc.self_intersections << "\nlifted_volume "
        << num(lifted_volume(orbit, orbit.params)) << '\n';
    const std::string path = cfg.out.empty() ? "torus_n" + std::to_string(cfg.n) + ".csv" : cfg.out;
    emit(path, out, [&](std::ostream& o) { write_trajectory_csv(orbit, o); });
    return 0;
}

int cmd_infty(const RunConfig& cfg, std::ostream& out) {
    InftyFigure f = find_infty_figure(cfg.n, cfg.tol_bisect, cfg.shooting());
    out << "n " << cfg.n << "\nalpha_infty " << num(f.alpha_infty) << "\nr_infty " << num(f.r_infty)
        << "\nseparatrix_alpha0 " << num(f.separatrix_alpha0) << "\nr1 " << num(f.r1) << '\n';
    if (!cfg.out.empty()) {
        emit(with_suffix(cfg.out, "_half0.csv"), out, [&](std::ostream& o) { write_trajectory_csv(f.halves[0], o); });
        emit(with_suffix(cfg.out, "_half1.csv"), out, [&](std::ostream& o) { write_trajectory_csv(f.halves[1], o); });
    }
    return 0;
}

int cmd_ladder(const RunConfig& cfg, std::ostream& out) {
    IterationLadder lad = iteration_ladder(cfg.n, cfg.k, cfg.tol_bisect, cfg.shooting());
    out << "k,alpha_check,crossings_check,alpha_hat,crossings_hat\n";
    for (const auto& r : lad.rungs)
        out << r.k << ',' << num(r.alpha_check) << ',' << r.crossings_check << ',' << num(r.alpha_hat) << ','
            << r.crossings_hat << '\n';
    return 0;
}

int cmd_spheres(const RunConfig& cfg, std::ostream& out) {
    IterationLadder lad = iteration_ladder(cfg.n, cfg.k, cfg.tol_bisect, cfg.shooting());
    out << "kind,k,alpha0,curvature_residual,z_crossings,self_intersections,lifted_volume\n";
    for (const auto& r : lad.rungs) {
        AssembledCurve sphere = assemble(r.hat, CurveKind::SphereCurve);
        AssembledCurve torus = assemble(r.check, CurveKind::ImmersedTorusOrbit);
        for (const auto* c : {&sphere, &torus}) {
            CrossingCount cc = count_crossings(*c);
            out << curve_kind_name(c->kind) << ',' << r.k << ','
                << num(c == &sphere ? r.alpha_hat : r.alpha_check) << ',' << num(curvature_residual(*c, c->params))
                << ',' << cc.z_crossings << ',' << cc.self_intersections << ',' << num(lifted_volume(*c, c->params))
                << '\n';
        }
        if (!cfg.out.empty()) {
            const std::string k = std::to_string(r.k);
            emit(with_suffix(cfg.out, "_sphere" + k + ".csv"), out,
                 [&](std::ostream& o) { write_trajectory_csv(sphere, o); });
            emit(with_suffix(cfg.out, "_immersed" + k + ".csv"), out,
                 [&](std::ostream& o) { write_trajectory_csv(torus, o); });
        }
    }
    return 0;
}

int cmd_t4(const RunConfig& cfg, std::ostream& out) {
    CornerResult c = find_t4_corner(cfg.tol_bisect, cfg.shooting());
    AssembledCurve closed = assemble(c.quarter, CurveKind::FreeBoundaryOrbit);
    const State& e = c.quarter.exit.state_exit;
    const Gauge g = boundary_gauge(e.r, e.theta);
    out << "r0* " << num(c.r0_star) << "\nexit " << state_str(e) << "\nu " << num(g.u) << "\nalpha_minus_v "
        << num(e.alpha - g.v) << "\ncurvature_residual " << num(curvature_residual(closed, closed.params))
        << "\nself_intersections " << count_crossings(closed).self_intersections << '\n';
    if (!cfg.out.empty()) emit(cfg.out, out, [&](std::ostream& o) { write_trajectory_csv(closed, o); });
    return 0;
}

int cmd_probe(const RunConfig& cfg, std::ostream& out) {
    LabOptions lab;
    lab.integ = cfg.integrator();
    std::vector<double> grid = cfg.alpha0 > 0.0 ? std::vector<double>{cfg.alpha0} : default_probe_sweep({cfg.n}).probe_alpha0;
    out << "n,alpha0,outcome,alpha_at_min,theta_min\n";
    for (double a0 : grid) {
        TurnProbe p = probe_turning(cfg.n, a0, lab);
        out << p.n << ',' << num(p.alpha0) << ',' << outcome_name(p.outcome) << ',' << num(p.alpha_at_event) << ','
            << num(p.theta_min) << '\n';
    }
    return 0;
}

int cmd_verify(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    SweepSpec spec;
    if (cfg.suite == "lemmas") {
        spec = default_sweep({cfg.n});
    } else if (cfg.suite == "probes") {
        spec = default_probe_sweep({cfg.n});
    } else if (cfg.suite == "all") {
        spec = default_sweep({cfg.n});
        spec.probe_ns = {cfg.n};
        spec.probe_alpha0 = default_probe_sweep({cfg.n}).probe_alpha0;
    } else {
        throw UsageError("unknown suite '" + cfg.suite + "' (lemmas, probes, all)");
    }
    spec.seed = cfg.seed;
    spec.lab.integ = cfg.integrator();
    Report rep = sweep(spec);
    emit(cfg.out, out, [&](std::ostream& o) { write_report_csv(rep, o); });
    std::size_t bad = 0;
    for (const auto& c : rep.checks)
        if (!c.satisfied) {
            ++bad;
            err << "VIOLATED " << c.lemma_id << ' ' << c.inputs << " bound=" << num(c.bound_value)
                << " observed=" << num(c.observed_value) << '\n';
        }
    for (const auto& e : rep.errors) err << "ERROR " << e << '\n';
    if (!cfg.out.empty() && cfg.out != "-")
        out << rep.checks.size() << " checks, " << bad << " violated, " << rep.errors.size() << " errors, "
            << rep.skipped.size() << " skipped, " << rep.probes.size() << " probes\n";
    return rep.all_satisfied() ? 0 : 1;
}

int cmd_figure(const RunConfig& cfg, std::ostream& out) {
    SvgFigure fig = build_figure(cfg.id, cfg);
    const std::string path = cfg.out.empty() ? "figure" + std::to_string(cfg.id) + ".svg" : cfg.out;
    emit(path, out, [&](std::ostream& o) { render_svg(fig, o); });
    return 0;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig cfg;
    CLI::App app{"equivariant minimal hypersurfaces: shooting, assembly and lemma checks", "eqmin"};
    app.require_subcommand(1, 1);
    std::string system = "double";

    auto common = [&](CLI::App* sub) {
        sub->add_option("--n", cfg.n, "dimension parameter n");
        sub->add_option("--system", system, "double or triple")->check(CLI::IsMember({"double", "triple"}));
        sub->add_option("--tol-abs", cfg.tol_abs);
        sub->add_option("--tol-rel", cfg.tol_rel);
        sub->add_option("--tol-event", cfg.tol_event);
        sub->add_option("--tol-bisect", cfg.tol_bisect);
        sub->add_option("--tol-corner", cfg.tol_corner);
        sub->add_option("--s-max", cfg.s_max);
        sub->add_option("--eps-bdry", cfg.eps_bdry);
        sub->add_option("--out", cfg.out, "output path ('-' for stdout)");
        sub->add_option("--seed", cfg.seed);
    };
    auto* integ = app.add_subcommand("integrate", "integrate one shot and write its CSV");
    common(integ);
    integ->add_option("--r0", cfg.r0)->required();
    integ->add_option("--theta0", cfg.theta0);
    integ->add_option("--alpha0", cfg.alpha0)->required();
    common(app.add_subcommand("torus", "corner bisection and the closed torus orbit"));
    common(app.add_subcommand("infty", "the infinity figure"));
    auto* ladder = app.add_subcommand("ladder", "alpha-hat / alpha-check iteration");
    common(ladder);
    ladder->add_option("--k", cfg.k, "number of rungs");
    auto* spheres = app.add_subcommand("spheres", "assembled sphere curves and immersed tori");
    common(spheres);
    spheres->add_option("--k", cfg.k, "number of rungs");
    common(app.add_subcommand("t4", "free-boundary arc of the triple product"));
    auto* probe = app.add_subcommand("probe", "turning direction at the first theta minimum");
    common(probe);
    probe->add_option("--alpha0", cfg.alpha0, "single probe (default: log grid)");
    auto* verify = app.add_subcommand("verify", "lemma bound sweep");
    common(verify);
    verify->add_option("--suite", cfg.suite, "lemmas, probes or all");
    auto* figure = app.add_subcommand("figure", "SVG phase portrait");
    common(figure);
    figure->add_option("--id", cfg.id, "figure id 1-6");
    figure->add_option("--k", cfg.k);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::ParseError& e) {
        err << e.what() << '\n' << app.help();
        return 2;
    }
    cfg.subcommand = app.get_subcommands().front()->get_name();
    cfg.system = system == "triple" ? System::TripleProduct : System::DoubleProduct;

    try {
        cfg.validate();
        const std::string& c = cfg.subcommand;
        if (c == "integrate") return cmd_integrate(cfg, out);
        if (c == "torus") return cmd_torus(cfg, out);
        if (c == "infty") return cmd_infty(cfg, out);
        if (c == "ladder") return cmd_ladder(cfg, out);
        if (c == "spheres") return cmd_spheres(cfg, out);
        if (c == "t4") return cmd_t4(cfg, out);
        if (c == "probe") return cmd_probe(cfg, out);
        if (c == "verify") return cmd_verify(cfg, out, err);
        if (c == "figure") return cmd_figure(cfg, out);
        throw UsageError("unknown subcommand " + c);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n' << app.help();
        return 2;
    } catch (const std::invalid_argument& e) {
        err << "usage error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << cfg.subcommand << " failed: " << e.what() << '\n';
        return 1;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"eqmin"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace eqmin
