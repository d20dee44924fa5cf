#include "eqmin/shooting.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "eqmin/dynamics.hpp"

namespace eqmin {

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

struct Probe {
    int side = 0;  // -1 / +1, 0 when the shot could not be classified
    double defect = inf;
    Trajectory traj;
};

using Shooter = std::function<Probe(double)>;

CornerResult scan_and_bisect(const Shooter& shoot, const std::vector<double>& grid, double tol, bool refine,
                             const std::string& what) {
    std::vector<int> sides(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) sides[i] = shoot(grid[i]).side;

    std::size_t first = grid.size();
    std::size_t changes = 0;
    int last_side = 0;
    std::size_t last_idx = 0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (sides[i] == 0) continue;
        if (last_side != 0 && sides[i] != last_side) {
            ++changes;
            if (first == grid.size() && last_idx + 1 == i) first = last_idx;
        }
        last_side = sides[i];
        last_idx = i;
    }
    if (first == grid.size()) {
        std::ostringstream os;
        os << what << ": coarse scan of " << grid.size() << " shots over [" << grid.front() << ", " << grid.back()
           << "] found no sign change";
        throw BracketNotFound(os.str());
    }

    double a = grid[first], b = grid[first + 1];
    const int sa = sides[first];
    Probe pa = shoot(a), pb = shoot(b);
    auto bisect_once = [&]() {
        const double m = 0.5 * (a + b);
        Probe pm = shoot(m);
        if (pm.side == 0) {
            std::ostringstream os;
            os << what << ": unclassified shot at " << m << " inside the bracket (exit "
               << exit_kind_name(pm.traj.exit.kind) << " / " << pm.traj.exit.name << ")";
            throw BracketNotFound(os.str());
        }
        if (pm.side == sa) {
            a = m;
            pa = std::move(pm);
        } else {
            b = m;
            pb = std::move(pm);
        }
    };
    while (std::abs(b - a) > tol * 1e-2) bisect_once();
    if (refine) {
        while (std::min(pa.defect, pb.defect) > tol * 1e-3 &&
               std::abs(b - a) > 4.0 * std::numeric_limits<double>::epsilon() * std::abs(a))
            bisect_once();
    }

    CornerResult out;
    const bool take_a = pa.defect <= pb.defect;
    out.r0_star = take_a ? a : b;
    out.defect = take_a ? pa.defect : pb.defect;
    out.quarter = take_a ? std::move(pa.traj) : std::move(pb.traj);
    out.bracket_lo = std::min(a, b);
    out.bracket_hi = std::max(a, b);
    out.sign_changes = changes;
    return out;
}

Probe torus_probe(double r0, int n, const IntegratorOptions& opts) {
    Probe p;
    p.traj = torus_shot(r0, n, opts);
    const State& e = p.traj.exit.state_exit;
    switch (p.traj.exit.kind) {
        case ExitKind::Roof: p.side = -1; break;
        case ExitKind::Side: p.side = +1; break;
        default: p.side = 0; return p;
    }
    p.defect = std::max(std::abs(e.alpha), std::abs(e.r - half_pi));
    return p;
}

bool is_alpha_limit(const ExitEvent& e) { return e.name == "alpha_upper" || e.name == "alpha_lower"; }

}  // namespace

const char* shot_kind_name(ShotClass::Kind k) {
    switch (k) {
        case ShotClass::Kind::Roof: return "Roof";
        case ShotClass::Kind::Side: return "Side";
        case ShotClass::Kind::Corner: return "Corner";
        case ShotClass::Kind::Undetermined: return "Undetermined";
    }
    return "?";
}

Trajectory torus_shot(double r0, int n, const IntegratorOptions& opts) {
    if (!(r0 > 0.0 && r0 < half_pi)) throw std::invalid_argument("torus shot needs r0 in (0, pi/2)");
    EventSpec ev;
    ev.add(events::roof()).add(events::side());
    return integrate(make_shifted(r0, 0.0, -half_pi), SystemParams::double_product(n), ev, opts);
}

ShotClass classify_torus_shot(double r0, int n, double corner_tol, const IntegratorOptions& opts) {
    const Trajectory t = torus_shot(r0, n, opts);
    const State& e = t.exit.state_exit;
    ShotClass c;
    if (t.exit.kind != ExitKind::Roof && t.exit.kind != ExitKind::Side) {
        c.kind = ShotClass::Kind::Undetermined;
        c.detail = std::string(exit_kind_name(t.exit.kind)) + ":" + t.exit.name;
        return c;
    }
    if (std::abs(e.alpha) <= corner_tol && std::abs(e.r - half_pi) <= corner_tol) {
        c.kind = ShotClass::Kind::Corner;
        c.tol = corner_tol;
        return c;
    }
    c.kind = t.exit.kind == ExitKind::Roof ? ShotClass::Kind::Roof : ShotClass::Kind::Side;
    return c;
}

CornerResult find_torus_corner(int n, double tol, const ShootingOptions& opts) {
    SystemParams::double_product(n).validate();
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    std::vector<double> grid(opts.scan_points);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = half_pi * static_cast<double>(i + 1) / static_cast<double>(grid.size() + 1);
    return scan_and_bisect([&](double r0) { return torus_probe(r0, n, opts.integ); }, grid, tol, true,
                           "torus corner");
}

ReturnReport first_return(double r0, double alpha0, int n, const IntegratorOptions& opts) {
    if (!(r0 >= half_pi && r0 < pi)) throw std::invalid_argument("first_return needs r0 in [pi/2, pi)");
    if (!(alpha0 > 0.0 && alpha0 < half_pi)) throw std::invalid_argument("first_return needs alpha0 in (0, pi/2)");
    EventSpec ev;
    ev.add(events::vartheta_zero(Direction::Falling, true, 1e-10))
        .add(events::alpha_zero_falling())
        .add(events::alpha_upper())
        .add(events::alpha_lower());
    ReturnReport rep;
    rep.traj = integrate(make_shifted(r0, 0.0, alpha0), SystemParams::double_product(n), ev, opts);
    rep.returned = rep.traj.exit.kind == ExitKind::VarthetaZero;
    if (rep.returned) {
        rep.sigma = rep.traj.exit.s_exit;
        rep.alpha_at_return = rep.traj.exit.state_exit.alpha;
    }
    for (const auto& r : rep.traj.records) {
        if (r.name == "alpha_zero") {
            rep.has_s2 = true;
            rep.s2 = r.s;
            rep.vartheta_max = r.state.vartheta();
            break;
        }
    }
    if (!rep.has_s2) {
        for (const auto& smp : rep.traj.samples) rep.vartheta_max = std::max(rep.vartheta_max, smp.state.vartheta());
    }
    return rep;
}

InftyFigure find_infty_figure(int n, double tol, const ShootingOptions& opts) {
    SystemParams::double_product(n).validate();
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    InftyFigure out;

    // stage 1: separatrix between returning and non-returning shots from r0 = 2pi/3
    const double r_green = 2.0 * pi / 3.0;
    std::vector<double> grid(opts.scan_points);
    const double lo = 1e-6, hi = half_pi - 1e-3;
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(grid.size() - 1));
    auto green = [&](double a0) {
        Probe p;
        ReturnReport rep = first_return(r_green, a0, n, opts.integ);
        if (rep.returned)
            p.side = -1;
        else if (is_alpha_limit(rep.traj.exit))
            p.side = +1;
        p.traj = std::move(rep.traj);
        return p;
    };
    CornerResult sep = scan_and_bisect(green, grid, tol, false, "infinity figure, stage 1");
    // the non-returning side of the bracket hugs the separatrix down to alpha = -pi/2
    {
        Probe p_hi = green(sep.bracket_hi);
        Probe p_lo = green(sep.bracket_lo);
        Probe& nr = p_hi.side == +1 ? p_hi : p_lo;
        out.separatrix_alpha0 = p_hi.side == +1 ? sep.bracket_hi : sep.bracket_lo;
        out.separatrix = std::move(nr.traj);
    }
    if (out.separatrix.exit.name != "alpha_lower") {
        throw BracketNotFound("infinity figure, stage 1: separatrix side does not end at alpha = -pi/2 (exit " +
                              out.separatrix.exit.name + ")");
    }
    out.r1 = out.separatrix.exit.state_exit.r;

    // stage 2: centrally reflected start (pi - r1, 0, -pi/2) moved towards the centre
    const double a2 = pi - out.r1, b2 = half_pi;
    if (!(a2 < b2)) throw BracketNotFound("infinity figure, stage 2: empty r0 range");
    std::vector<double> grid2(opts.scan_points);
    for (std::size_t i = 0; i < grid2.size(); ++i)
        grid2[i] = a2 + (b2 - a2) * static_cast<double>(i + 1) / static_cast<double>(grid2.size() + 1);
    const SystemParams params = SystemParams::double_product(n);
    auto blue = [&](double r0) {
        EventSpec ev;
        ev.add(events::side()).add(events::vartheta_zero(Direction::Rising, true, 1e-10)).add(events::alpha_upper());
        Probe p;
        p.traj = integrate(make_shifted(r0, 0.0, -half_pi), params, ev, opts.integ);
        const State& e = p.traj.exit.state_exit;
        if (p.traj.exit.kind == ExitKind::VarthetaZero)
            p.side = -1;
        else if (p.traj.exit.kind == ExitKind::Side)
            p.side = +1;
        else
            return p;
        p.defect = std::max(std::abs(e.r - half_pi), std::abs(e.vartheta()));
        return p;
    };
    out.blue = scan_and_bisect(blue, grid2, tol, true, "infinity figure, stage 2");
    out.alpha_infty = out.blue.quarter.exit.state_exit.alpha;
    out.r_infty = pi - out.blue.r0_star;
    out.halves[0] = out.blue.quarter;
    out.halves[1] = apply_symmetry(out.blue.quarter, SymmetryKind::CentralTimeReversed);
    return out;
}

CentreShot shoot_centre(double alpha0, int n, const IntegratorOptions& opts) {
    if (!(alpha0 > 0.0 && alpha0 < half_pi)) throw std::invalid_argument("centre shot needs alpha0 in (0, pi/2)");
    EventSpec ev;
    ev.add(events::vartheta_zero(Direction::Any, false, 1e-10)).add(events::alpha_upper()).add(events::alpha_lower());
    CentreShot cs;
    cs.alpha0 = alpha0;
    cs.traj = integrate(make_shifted(half_pi, 0.0, alpha0), SystemParams::double_product(n), ev, opts);
    cs.returns = static_cast<int>(cs.traj.count_records("vartheta_zero"));
    if (is_alpha_limit(cs.traj.exit)) {
        const bool positive = cs.traj.exit.name == "alpha_upper";
        const bool expected = positive == (cs.returns % 2 == 0);
        cs.code = 2 * cs.returns + (expected ? 0 : 1);
    }
    return cs;
}

namespace {

struct CodeBoundary {
    double lo = 0.0;
    double hi = 0.0;
    CentreShot hi_shot;
    bool corner_stop = false;
};

// boundary between code m - 1 (larger alpha0) and code m (smaller alpha0), searched below `upper`
CodeBoundary find_code_boundary(int m, double upper, double tol, int n, bool is_hat, const ShootingOptions& opts) {
    const std::size_t N = opts.scan_points;
    std::vector<double> grid(N + 1);
    std::vector<int> codes(N + 1);
    for (std::size_t i = 0; i <= N; ++i) {
        grid[i] = upper * std::pow(10.0, -static_cast<double>(i) / 8.0);
        if (!(grid[i] < half_pi)) grid[i] = std::nextafter(half_pi, 0.0);
    }
    std::size_t found = N + 1;
    for (std::size_t i = 0; i <= N; ++i) {
        codes[i] = shoot_centre(grid[i], n, opts.integ).code;
        if (i > 0 && codes[i - 1] >= 0 && codes[i - 1] <= m - 1 && codes[i] >= m) {
            found = i - 1;
            break;
        }
    }
    if (found > N) {
        std::ostringstream os;
        os << "ladder: no shot pair with codes " << m - 1 << " | " << m << " below alpha0 = " << upper;
        throw BracketNotFound(os.str());
    }
    CodeBoundary b;
    b.hi = grid[found];
    b.lo = grid[found + 1];
    b.hi_shot = shoot_centre(b.hi, n, opts.integ);
    CentreShot lo_shot = shoot_centre(b.lo, n, opts.integ);
    const int k = is_hat ? (m - 1) / 2 : m / 2;

    auto bisect_once = [&]() -> bool {
        const double mid = 0.5 * (b.lo + b.hi);
        CentreShot cs = shoot_centre(mid, n, opts.integ);
        if (!cs.determined()) {
            // blow-up at the corner |vartheta| = pi/4: the limit of the hat trajectory itself
            const bool at_corner = cs.traj.exit.kind == ExitKind::BlowUp &&
                                   std::abs(cs.traj.exit.state_exit.vartheta()) > quarter_pi - 1e-3;
            if (is_hat && at_corner && cs.returns == k) {
                b.corner_stop = true;
                return false;
            }
            std::ostringstream os;
            os << "ladder: undetermined centre shot at alpha0 = " << mid << " (exit " << cs.traj.exit.name
               << ", returns " << cs.returns << ") while resolving codes " << m - 1 << " | " << m;
            throw RungToleranceExceeded(os.str());
        }
        if (cs.code >= m) {
            b.lo = mid;
            lo_shot = std::move(cs);
        } else {
            b.hi = mid;
            b.hi_shot = std::move(cs);
        }
        return true;
    };
    while (b.hi - b.lo > tol) {
        if (!bisect_once()) break;
    }
    // keep narrowing until the upper-side trajectory sits on its limit: vartheta = 0 for
    // check rungs, the corner |vartheta| = pi/4 for hat rungs
    auto at_limit = [&]() {
        const double vt = std::abs(b.hi_shot.traj.exit.state_exit.vartheta());
        return is_hat ? b.corner_stop : vt <= 1e-11;
    };
    while (!at_limit() && b.hi - b.lo > 4.0 * std::numeric_limits<double>::epsilon() * b.hi) {
        if (!bisect_once()) break;
    }
    if (lo_shot.code != m || b.hi_shot.code != m - 1) {
        std::ostringstream os;
        os << "ladder: bracket [" << b.lo << ", " << b.hi << "] has codes " << lo_shot.code << " | "
           << b.hi_shot.code << ", expected " << m << " | " << m - 1;
        throw RungToleranceExceeded(os.str());
    }
    return b;
}

}  // namespace

IterationLadder iteration_ladder(int n, int K, double tol, const ShootingOptions& opts) {
    SystemParams::double_product(n).validate();
    if (K < 1) throw std::invalid_argument("ladder needs K >= 1");
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    IterationLadder lad;
    lad.n = n;
    double upper = half_pi - 1e-3;
    for (int k = 1; k <= K; ++k) {
        Rung rung;
        rung.k = k;
        CodeBoundary chk = find_code_boundary(2 * k, upper, tol, n, false, opts);
        CodeBoundary hat = find_code_boundary(2 * k + 1, chk.lo, tol, n, true, opts);
        rung.alpha_check = chk.hi;
        rung.check = std::move(chk.hi_shot.traj);
        rung.crossings_check = chk.hi_shot.returns + 2;
        rung.alpha_hat = hat.hi;
        rung.hat = std::move(hat.hi_shot.traj);
        rung.crossings_hat = hat.hi_shot.returns + 1;
        rung.hat_corner_stop = hat.corner_stop;
        upper = hat.lo;
        lad.rungs.push_back(std::move(rung));
    }
    return lad;
}

Trajectory t4_shot(double r0, const IntegratorOptions& opts) {
    if (!(r0 > 0.0 && r0 < half_pi)) throw std::invalid_argument("t4 shot needs r0 in (0, pi/2)");
    EventSpec ev;
    ev.add(events::roof()).add(events::appendix_boundary());
    return integrate(make_shifted(r0, 0.0, -half_pi), SystemParams::triple_product(), ev, opts);
}

CornerResult find_t4_corner(double tol, const ShootingOptions& opts) {
    if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
    const double varrho = std::atan(std::sqrt(2.0));
    std::vector<double> grid(opts.scan_points);
    for (std::size_t i = 0; i < grid.size(); ++i)
        grid[i] = varrho * static_cast<double>(i + 1) / static_cast<double>(grid.size() + 1);
    auto shoot = [&](double r0) {
        Probe p;
        p.traj = t4_shot(r0, opts.integ);
        const State& e = p.traj.exit.state_exit;
        if (p.traj.exit.kind == ExitKind::Roof) {
            p.side = -1;
        } else if (p.traj.exit.kind == ExitKind::AppendixBoundary) {
            const Gauge g = boundary_gauge(e.r, e.theta);
            p.side = e.alpha >= g.v ? -1 : +1;
            p.defect = std::max(std::abs(g.u - 1.0), std::abs(e.alpha - g.v));
        }
        return p;
    };
    return scan_and_bisect(shoot, grid, tol, true, "free-boundary corner");
}

}  // namespace eqmin
