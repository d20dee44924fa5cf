#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "eqmin/cli.hpp"
#include "eqmin/lemma_lab.hpp"

namespace eqmin {

namespace {

constexpr double px_width = 720.0;
constexpr double margin = 48.0;

struct Frame {
    double r_lo, r_hi, t_lo, t_hi, scale, height;
    double x(double r) const { return margin + (r - r_lo) * scale; }
    double y(double t) const { return margin + (t_hi - t) * scale; }
};

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

std::string xml_escape(const std::string& s) {
    std::string o;
    for (char c : s) {
        switch (c) {
            case '<': o += "&lt;"; break;
            case '>': o += "&gt;"; break;
            case '&': o += "&amp;"; break;
            case '"': o += "&quot;"; break;
            default: o += c;
        }
    }
    return o;
}

// labels of multiples of pi/4
std::string pi_label(int q) {
    switch (q) {
        case 0: return "0";
        case 1: return "π/4";
        case 2: return "π/2";
        case 3: return "3π/4";
        case 4: return "π";
        default: return std::to_string(q) + "π/4";
    }
}

}  // namespace

SvgCurve svg_curve(const Trajectory& traj, SvgStyle style, std::size_t points) {
    SvgCurve c;
    c.style = std::move(style);
    if (traj.samples.size() == 1) {
        c.pts.push_back({traj.samples[0].state.r, traj.samples[0].state.theta});
        return c;
    }
    if (traj.samples.empty()) return c;
    for (const auto& smp : resample(traj, std::max<std::size_t>(points, 2)))
        c.pts.push_back({smp.state.r, smp.state.theta});
    return c;
}

std::vector<SvgCurve> svg_curves(const AssembledCurve& curve, SvgStyle style, std::size_t points) {
    std::vector<SvgCurve> out;
    for (const auto& seg : curve.segments) out.push_back(svg_curve(seg, style, points));
    return out;
}

std::size_t render_svg(const SvgFigure& fig, std::ostream& out) {
    if (!(fig.r_hi > fig.r_lo && fig.theta_hi > fig.theta_lo)) throw std::invalid_argument("empty figure frame");
    Frame f{fig.r_lo, fig.r_hi, fig.theta_lo, fig.theta_hi, px_width / (fig.r_hi - fig.r_lo), 0.0};
    f.height = (fig.theta_hi - fig.theta_lo) * f.scale;
    const double W = px_width + 2 * margin, H = f.height + 2 * margin;

    std::ostringstream s;
    s << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    s << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << fmt(W) << "\" height=\"" << fmt(H)
      << "\" viewBox=\"0 0 " << fmt(W) << ' ' << fmt(H) << "\">\n";
    s << "<rect width=\"100%\" height=\"100%\" fill=\"#ffffff\"/>\n";
    if (!fig.title.empty())
        s << "<text x=\"" << fmt(margin) << "\" y=\"" << fmt(margin / 2) << "\" font-size=\"14\">"
          << xml_escape(fig.title) << "</text>\n";

    // gridlines at multiples of pi/4
    s << "<g stroke=\"#bbbbbb\" stroke-width=\"0.5\">\n";
    for (int q = static_cast<int>(std::ceil(fig.r_lo / quarter_pi - 1e-9)); q * quarter_pi <= fig.r_hi + 1e-9; ++q) {
        const double x = f.x(q * quarter_pi);
        s << "<line x1=\"" << fmt(x) << "\" y1=\"" << fmt(f.y(fig.theta_hi)) << "\" x2=\"" << fmt(x) << "\" y2=\""
          << fmt(f.y(fig.theta_lo)) << "\"/>\n";
    }
    for (int q = static_cast<int>(std::ceil(fig.theta_lo / quarter_pi - 1e-9)); q * quarter_pi <= fig.theta_hi + 1e-9;
         ++q) {
        const double y = f.y(q * quarter_pi);
        s << "<line x1=\"" << fmt(f.x(fig.r_lo)) << "\" y1=\"" << fmt(y) << "\" x2=\"" << fmt(f.x(fig.r_hi))
          << "\" y2=\"" << fmt(y) << "\"/>\n";
    }
    s << "</g>\n<g font-size=\"11\" fill=\"#333333\">\n";
    for (int q = static_cast<int>(std::ceil(fig.r_lo / quarter_pi - 1e-9)); q * quarter_pi <= fig.r_hi + 1e-9; ++q)
        s << "<text x=\"" << fmt(f.x(q * quarter_pi) - 8) << "\" y=\"" << fmt(f.y(fig.theta_lo) + 16) << "\">"
          << pi_label(q) << "</text>\n";
    for (int q = static_cast<int>(std::ceil(fig.theta_lo / quarter_pi - 1e-9)); q * quarter_pi <= fig.theta_hi + 1e-9;
         ++q)
        s << "<text x=\"" << fmt(f.x(fig.r_lo) - 36) << "\" y=\"" << fmt(f.y(q * quarter_pi) + 4) << "\">"
          << pi_label(q) << "</text>\n";
    s << "<text x=\"" << fmt(f.x(fig.r_hi) - 10) << "\" y=\"" << fmt(f.y(fig.theta_lo) + 32) << "\">r</text>\n";
    s << "<text x=\"" << fmt(f.x(fig.r_lo) - 36) << "\" y=\"" << fmt(f.y(fig.theta_hi) - 8) << "\">θ</text>\n";
    s << "</g>\n";

    for (const auto& c : fig.curves) {
        if (c.pts.empty()) continue;
        if (c.pts.size() == 1) {
            s << "<circle cx=\"" << fmt(f.x(c.pts[0][0])) << "\" cy=\"" << fmt(f.y(c.pts[0][1])) << "\" r=\"2.5\" fill=\""
              << c.style.stroke << "\"/>\n";
            continue;
        }
        s << "<polyline fill=\"none\" stroke=\"" << c.style.stroke << "\" stroke-width=\"" << fmt(c.style.width) << '"';
        if (c.style.dotted) s << " stroke-dasharray=\"2 3\"";
        s << " points=\"";
        for (std::size_t i = 0; i < c.pts.size(); ++i) {
            if (i) s << ' ';
            s << fmt(f.x(c.pts[i][0])) << ',' << fmt(f.y(c.pts[i][1]));
        }
        s << "\"/>\n";
    }
    for (const auto& m : fig.markers) {
        const double x = f.x(m.at[0]), y = f.y(m.at[1]);
        s << "<circle cx=\"" << fmt(x) << "\" cy=\"" << fmt(y) << "\" r=\"3\" fill=\"#000000\"/>\n";
        if (!m.label.empty())
            s << "<text x=\"" << fmt(x + 5) << "\" y=\"" << fmt(y - 5) << "\" font-size=\"12\">" << xml_escape(m.label)
              << "</text>\n";
    }
    s << "</svg>\n";
    const std::string str = s.str();
    out << str;
    if (!out) throw std::ios_base::failure("svg write failed");
    return str.size();
}

namespace {

const SvgStyle thick_orange{"#d95f02", 2.0, false};
const SvgStyle blue{"#1f78b4", 1.5, false};
const SvgStyle green{"#33a02c", 1.5, false};
const SvgStyle grey{"#555555", 1.0, false};
const SvgStyle dotted_grey{"#555555", 1.0, true};

Point2 rt(const State& s) { return {s.r, s.theta}; }

SvgFigure torus_figure(const RunConfig& cfg) {
    SvgFigure fig;
    fig.title = "torus shooting, n = " + std::to_string(cfg.n);
    fig.r_hi = pi;
    const auto opts = cfg.shooting();
    for (double r0 : {0.3927, 1.4923}) {
        Trajectory t = torus_shot(r0, cfg.n, opts.integ);
        fig.curves.push_back(svg_curve(t, grey));
        fig.markers.push_back({rt(t.final_state()), t.exit.name});
    }
    CornerResult c = find_torus_corner(cfg.n, cfg.tol_bisect, opts);
    AssembledCurve closed = assemble(c.quarter, CurveKind::TorusOrbit);
    for (std::size_t i = 1; i < closed.segments.size(); ++i) fig.curves.push_back(svg_curve(closed.segments[i], dotted_grey));
    fig.curves.push_back(svg_curve(c.quarter, thick_orange));
    fig.markers.push_back({rt(c.quarter.initial()), "r0*"});
    return fig;
}

SvgFigure first_return_figure(const RunConfig& cfg) {
    SvgFigure fig;
    const double r0 = 2.0 * pi / 3.0, a0 = pi / 36.0;
    fig.title = "first return, n = " + std::to_string(cfg.n) + ", r0 = 2π/3, α0 = π/36";
    EventSpec ev;
    ev.add(events::vartheta_level(first_arc_level(a0, cfg.n)))
        .add(events::alpha_zero_falling())
        .add(events::vartheta_zero(Direction::Falling, false, 1e-10))
        .add(events::alpha_upper())
        .add(events::alpha_lower());
    Trajectory t = integrate(make_shifted(r0, 0.0, a0), SystemParams::double_product(cfg.n), ev, cfg.integrator());
    fig.curves.push_back(svg_curve(t, thick_orange, 600));
    fig.markers.push_back({{r0, quarter_pi}, "r0"});
    for (const auto& rec : t.records) {
        if (rec.name == "vartheta_level") fig.markers.push_back({rt(rec.state), "s1"});
        if (rec.name == "alpha_zero") fig.markers.push_back({rt(rec.state), "s2"});
        if (rec.name == "vartheta_zero") fig.markers.push_back({rt(rec.state), "σ"});
    }
    fig.markers.push_back({rt(t.final_state()), "s*"});
    return fig;
}

SvgFigure infty_figure(const RunConfig& cfg) {
    SvgFigure fig;
    fig.title = "infinity figure, n = " + std::to_string(cfg.n);
    InftyFigure inf = find_infty_figure(cfg.n, cfg.tol_bisect, cfg.shooting());
    fig.curves.push_back(svg_curve(inf.separatrix, green));
    fig.curves.push_back(svg_curve(inf.blue.quarter, grey));
    fig.curves.push_back(svg_curve(inf.halves[0], blue));
    fig.curves.push_back(svg_curve(inf.halves[1], SvgStyle{"#1f78b4", 1.5, true}));
    fig.markers.push_back({{half_pi, quarter_pi}, "α∞"});
    fig.markers.push_back({{inf.r_infty, quarter_pi}, "r∞"});
    return fig;
}

SvgFigure ladder_figure(const RunConfig& cfg) {
    SvgFigure fig;
    fig.title = "hat(1) and check(2), n = " + std::to_string(cfg.n);
    IterationLadder lad = iteration_ladder(cfg.n, 2, cfg.tol_bisect, cfg.shooting());
    AssembledCurve sphere = assemble(lad.rungs[0].hat, CurveKind::SphereCurve);
    AssembledCurve torus = assemble(lad.rungs[1].check, CurveKind::ImmersedTorusOrbit);
    for (std::size_t i = 1; i < torus.segments.size(); ++i)
        fig.curves.push_back(svg_curve(torus.segments[i], SvgStyle{"#1f78b4", 1.0, true}));
    for (std::size_t i = 1; i < sphere.segments.size(); ++i)
        fig.curves.push_back(svg_curve(sphere.segments[i], SvgStyle{"#d95f02", 1.0, true}));
    fig.curves.push_back(svg_curve(torus.segments[0], blue));
    fig.curves.push_back(svg_curve(sphere.segments[0], thick_orange));
    return fig;
}

SvgFigure centre_figure(const RunConfig& cfg) {
    SvgFigure fig;
    fig.title = "shooting from the centre, n = " + std::to_string(cfg.n);
    LabOptions lab;
    lab.integ = cfg.integrator();
    EventSpec ev;
    ev.add(events::theta_min());
    for (double a0 : default_probe_sweep({cfg.n}).probe_alpha0) {
        Trajectory t = integrate(make_shifted(half_pi, 0.0, a0), SystemParams::double_product(cfg.n), ev, lab.integ);
        fig.curves.push_back(svg_curve(t, grey, 300));
        if (t.exit.kind == ExitKind::ThetaMin) {
            const bool cw = std::abs(t.exit.state_exit.alpha + pi) < 1e-3;
            fig.markers.push_back({rt(t.final_state()), cw ? "" : "a"});
        }
    }
    return fig;
}

SvgFigure t4_figure(const RunConfig& cfg) {
    SvgFigure fig;
    fig.title = "free-boundary arc, triple product";
    fig.r_hi = half_pi;
    const auto opts = cfg.shooting();
    CornerResult c = find_t4_corner(cfg.tol_bisect, opts);
    for (double r0 : {0.3, 1.0}) {
        Trajectory t = t4_shot(r0, opts.integ);
        fig.curves.push_back(svg_curve(t, grey));
        fig.markers.push_back({rt(t.final_state()), t.exit.name});
    }
    AssembledCurve closed = assemble(c.quarter, CurveKind::FreeBoundaryOrbit);
    for (std::size_t i = 1; i < closed.segments.size(); ++i) fig.curves.push_back(svg_curve(closed.segments[i], dotted_grey));
    fig.curves.push_back(svg_curve(c.quarter, thick_orange));
    fig.markers.push_back({rt(c.quarter.initial()), "r0*"});
    return fig;
}

}  // namespace

SvgFigure build_figure(int id, const RunConfig& cfg) {
    switch (id) {
        case 1: return torus_figure(cfg);
        case 2: return first_return_figure(cfg);
        case 3: return infty_figure(cfg);
        case 4: return ladder_figure(cfg);
        case 5: return centre_figure(cfg);
        case 6: return t4_figure(cfg);
        default: throw UsageError("unknown figure id " + std::to_string(id) + " (expected 1-6)");
    }
}

}  // namespace eqmin
