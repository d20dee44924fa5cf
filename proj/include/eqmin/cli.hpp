#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eqmin/geometry.hpp"
#include "eqmin/integrator.hpp"
#include "eqmin/shooting.hpp"

namespace eqmin {

struct RunConfig {
    std::string subcommand;
    System system = System::DoubleProduct;
    int n = 2;
    double r0 = 0.0;
    double theta0 = quarter_pi;
    double alpha0 = 0.0;
    double tol_abs = 1e-12;
    double tol_rel = 1e-10;
    double tol_event = 1e-11;
    double tol_bisect = 1e-10;
    double tol_corner = 1e-8;
    double s_max = 100.0;
    double eps_bdry = 1e-9;
    std::string out;
    std::uint64_t seed = 12345;
    std::string suite = "lemmas";
    int id = 1;
    int k = 3;

    // throws UsageError
    void validate() const;
    IntegratorOptions integrator() const;
    ShootingOptions shooting() const;
};

// header s,r,theta,alpha ; shortest round-trip decimals ; LF endings
std::size_t write_trajectory_csv(const Trajectory& traj, std::ostream& out);
// segments are concatenated on the global arc length; junction duplicates are dropped
std::size_t write_trajectory_csv(const AssembledCurve& curve, std::ostream& out);

struct CsvRow {
    double s = 0.0;
    State state{};
};
std::vector<CsvRow> read_trajectory_csv(std::istream& in);

// SVG figures in the (r, theta) chart

struct SvgStyle {
    std::string stroke = "#000000";
    double width = 1.0;
    bool dotted = false;
};

struct SvgCurve {
    std::vector<Point2> pts;  // (r, theta)
    SvgStyle style{};
};

struct SvgMarker {
    Point2 at{};
    std::string label;
};

struct SvgFigure {
    std::string title;
    double r_lo = 0.0, r_hi = pi;
    double theta_lo = 0.0, theta_hi = half_pi;
    std::vector<SvgCurve> curves;
    std::vector<SvgMarker> markers;
};

SvgCurve svg_curve(const Trajectory& traj, SvgStyle style = {}, std::size_t points = 400);
std::vector<SvgCurve> svg_curves(const AssembledCurve& curve, SvgStyle style = {}, std::size_t points = 400);

std::size_t render_svg(const SvgFigure& fig, std::ostream& out);

// figure ids: 1 torus shooting, 2 first return, 3 infinity figure, 4 sphere and immersed
// torus pair, 5 shooting from the centre, 6 free-boundary arc
SvgFigure build_figure(int id, const RunConfig& cfg);

// full command line front end; returns the process exit status
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace eqmin
