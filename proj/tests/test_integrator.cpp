#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "eqmin/integrator.hpp"
#include "eqmin/shooting.hpp"
#include "plotted_data.hpp"
#include "support.hpp"

using namespace eqmin;
using testsupport::for_all;
using testsupport::Gen;

namespace {

const SystemParams P2 = SystemParams::double_product(2);

EventSpec torus_events() {
    EventSpec e;
    e.add(events::roof()).add(events::side());
    return e;
}

// classical RK4 with a fixed step, straight on eval_field in (r, theta, alpha)
struct FixedStepOracle {
    std::vector<double> s;
    std::vector<State> y;
};

State axpy(const State& a, double h, const Derivative& d) {
    return {a.r + h * d.dr, a.theta + h * d.dtheta, a.alpha + h * d.dalpha};
}

FixedStepOracle rk4(State y0, const SystemParams& p, double h, double s_end) {
    FixedStepOracle o;
    o.s.push_back(0.0);
    o.y.push_back(y0);
    State y = y0;
    const int steps = static_cast<int>(std::ceil(s_end / h));
    for (int i = 0; i < steps; ++i) {
        const Derivative k1 = eval_field(y, p);
        const Derivative k2 = eval_field(axpy(y, h / 2, k1), p);
        const Derivative k3 = eval_field(axpy(y, h / 2, k2), p);
        const Derivative k4 = eval_field(axpy(y, h, k3), p);
        y.r += h / 6 * (k1.dr + 2 * k2.dr + 2 * k3.dr + k4.dr);
        y.theta += h / 6 * (k1.dtheta + 2 * k2.dtheta + 2 * k3.dtheta + k4.dtheta);
        y.alpha += h / 6 * (k1.dalpha + 2 * k2.dalpha + 2 * k3.dalpha + k4.dalpha);
        o.s.push_back(h * (i + 1));
        o.y.push_back(y);
    }
    return o;
}

double point_segment(const std::array<double, 2>& p, const std::array<double, 2>& a, const std::array<double, 2>& b) {
    const double dx = b[0] - a[0], dy = b[1] - a[1];
    const double L2 = dx * dx + dy * dy;
    double t = L2 > 0 ? ((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / L2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    return std::hypot(p[0] - a[0] - t * dx, p[1] - a[1] - t * dy);
}

double point_polyline(const std::array<double, 2>& p, const std::vector<std::array<double, 2>>& poly) {
    double best = 1e300;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) best = std::min(best, point_segment(p, poly[i], poly[i + 1]));
    return best;
}

}  // namespace

TEST_CASE("plotted torus shots exit through the roof and the side") {
    const Trajectory a = integrate({0.3927, quarter_pi, -half_pi}, P2, torus_events());
    CHECK(a.exit.kind == ExitKind::Roof);
    CHECK(std::abs(a.exit.state_exit.alpha) < 1e-10);
    const Trajectory b = integrate({1.4923, quarter_pi, -half_pi}, P2, torus_events());
    CHECK(b.exit.kind == ExitKind::Side);
    CHECK(std::abs(b.exit.state_exit.r - half_pi) < 1e-10);
}

TEST_CASE("plotted corner shot exits near (pi/2, 0.1891)") {
    const Trajectory t = integrate({1.2321, quarter_pi, -half_pi}, P2, torus_events());
    CHECK((t.exit.kind == ExitKind::Roof || t.exit.kind == ExitKind::Side));
    CHECK(std::abs(t.exit.state_exit.r - half_pi) < 0.01);
    CHECK(std::abs(t.exit.state_exit.theta - 0.1891) < 0.01);
    CHECK(std::abs(t.exit.state_exit.alpha) < 0.01);
}

TEST_CASE("resampling the corner quarter reproduces the plotted polyline") {
    const Trajectory t = integrate({1.2321, quarter_pi, -half_pi}, P2, torus_events());
    const auto rs = resample(t, 1001);
    REQUIRE(rs.size() == 1001);
    std::vector<std::array<double, 2>> ours;
    for (const auto& s : rs) ours.push_back({s.state.r, s.state.theta});
    double sup = 0.0;
    for (const auto& p : testdata::torus_quarter_plot) sup = std::max(sup, point_polyline(p, ours));
    for (const auto& p : ours) sup = std::max(sup, point_polyline(p, testdata::torus_quarter_plot));
    CHECK(sup < 0.01);
}

TEST_CASE("resample endpoints and spacing") {
    const Trajectory t = integrate({0.8, quarter_pi, -half_pi}, P2, torus_events());
    const auto two = resample(t, 2);
    REQUIRE(two.size() == 2);
    CHECK(two[0].s == 0.0);
    CHECK(two[0].state.r == t.initial().r);
    CHECK(two[1].s == t.length());
    CHECK(two[1].state.theta == t.final_state().theta);
    const auto many = resample(t, 57);
    for (std::size_t i = 1; i < many.size(); ++i)
        CHECK(many[i].s - many[i - 1].s == doctest::Approx(t.length() / 56).epsilon(1e-12));
}

TEST_CASE("resample agrees with a halved-tolerance integration") {
    IntegratorOptions fine;
    fine.abs_tol *= 0.5;
    fine.rel_tol *= 0.5;
    const Trajectory a = integrate({0.8, quarter_pi, -half_pi}, P2, torus_events());
    const Trajectory b = integrate({0.8, quarter_pi, -half_pi}, P2, torus_events(), fine);
    const double L = std::min(a.length(), b.length());
    double worst = 0.0;
    for (int i = 0; i <= 500; ++i) {
        const double s = L * i / 500.0;
        const State x = a.at(s), y = b.at(s);
        worst = std::max({worst, std::abs(x.r - y.r), std::abs(x.theta - y.theta), std::abs(x.alpha - y.alpha)});
    }
    CHECK(worst < 1e-7);
}

TEST_CASE("dense output against a fixed-step RK4 oracle") {
    const State y0{1.0, quarter_pi, -half_pi};
    const Trajectory t = integrate(y0, P2, torus_events());
    const FixedStepOracle o = rk4(y0, P2, 1e-4, 0.95 * t.length());
    double worst = 0.0;
    for (std::size_t i = 0; i < o.s.size(); i += 50) {
        const State a = t.at(o.s[i]);
        worst = std::max({worst, std::abs(a.r - o.y[i].r), std::abs(a.theta - o.y[i].theta),
                          std::abs(a.alpha - o.y[i].alpha)});
    }
    CHECK(worst < 1e-9);
}

TEST_CASE("event location on alpha going through zero") {
    const Trajectory t = integrate({0.3927, quarter_pi, -half_pi}, P2, EventSpec{});
    // alpha rises through zero somewhere; find that step
    bool found = false;
    for (const auto& d : t.dense) {
        const double a0 = from_internal(d.eval_tau(0.0)).alpha, a1 = from_internal(d.eval_tau(1.0)).alpha;
        if (a0 < 0.0 && a1 > 0.0) {
            auto f = [](const State& s) { return s.alpha; };
            const double s = locate_event(d, f, Direction::Rising);
            CHECK(s >= d.s0);
            CHECK(s <= d.s1());
            CHECK(std::abs(from_internal(d.eval(s)).alpha) < 1e-11);
            const double sb = locate_event(d, f, Direction::Rising, 1e-11, RootMethod::Bisection);
            CHECK(std::abs(s - sb) < 1e-12);
            CHECK_THROWS_AS(locate_event(d, f, Direction::Falling), NoCrossing);
            found = true;
            break;
        }
    }
    CHECK(found);
}

TEST_CASE("first return located against a finer fixed-step oracle") {
    const ReturnReport rep = first_return(2 * pi / 3, pi / 36, 2);
    REQUIRE(rep.returned);
    CHECK(std::abs(rep.traj.at(rep.sigma).vartheta()) < 1e-11);

    // secant and bisection on one dense step of an unterminated run through sigma
    IntegratorOptions wo;
    wo.s_max = rep.sigma + 0.05;
    const Trajectory w = integrate(make_shifted(2 * pi / 3, 0.0, pi / 36), P2, EventSpec{}, wo);
    const DenseStep& d = w.dense[w.step_index(rep.sigma)];
    auto f = [](const State& s) { return s.vartheta(); };
    const double a = locate_event(d, f, Direction::Falling, 1e-11, RootMethod::Secant);
    const double b = locate_event(d, f, Direction::Falling, 1e-11, RootMethod::Bisection);
    CHECK(std::abs(a - b) < 1e-12);
    CHECK(std::abs(a - rep.sigma) < 1e-10);

    // independent crossing from RK4 plus linear interpolation between its steps
    const double h = 2e-4;
    const FixedStepOracle o = rk4({2 * pi / 3, quarter_pi, pi / 36}, P2, h, rep.sigma + 0.01);
    double s_oracle = -1.0;
    for (std::size_t i = 10; i + 1 < o.s.size(); ++i) {
        const double v0 = o.y[i].theta - quarter_pi, v1 = o.y[i + 1].theta - quarter_pi;
        if (v0 > 0.0 && v1 <= 0.0) {
            // cubic Hermite would be tighter; linear suffices at this step size for 1e-6
            s_oracle = o.s[i] + h * v0 / (v0 - v1);
            break;
        }
    }
    REQUIRE(s_oracle > 0.0);
    CHECK(std::abs(s_oracle - rep.sigma) < 1e-6);
}

TEST_CASE("property: monotone coordinates before the torus exit") {
    for_all(21, 40, [](Gen& g, int) {
        const double r0 = g.uniform(0.01, half_pi - 0.01);
        const Trajectory t = integrate({r0, quarter_pi, -half_pi}, P2, torus_events());
        CHECK((t.exit.kind == ExitKind::Roof || t.exit.kind == ExitKind::Side));
        CHECK(t.final_state().theta > 0.0);
        for (std::size_t i = 1; i < t.samples.size(); ++i) {
            const Derivative d = eval_field(t.samples[i].state, P2);
            CHECK(d.dr >= -1e-9);
            CHECK(d.dtheta <= 1e-9);
            CHECK(d.dalpha >= -1e-9);
        }
    });
}

TEST_CASE("property: constraint transport on accepted steps") {
    for_all(22, 20, [](Gen& g, int) {
        const int n = g.integer(2, 4);
        const SystemParams p = SystemParams::double_product(n);
        const Trajectory t = integrate({g.uniform(0.05, 1.5), quarter_pi, -half_pi}, p, torus_events());
        CHECK(t.stats.max_constraint_residual < 1e-10);
        double worst = 0.0;
        for (const auto& d : t.dense) {
            for (double tau : {0.0, 1.0}) {
                const double s = d.s0 + tau * d.h;
                const Vec3 dy = d.deriv(s);
                const State st = from_internal(d.eval(s));
                worst = std::max(worst, constraint_defect(st, Derivative{dy[0], dy[1], dy[2]}));
            }
        }
        CHECK(worst < 1e-10);
    });
}

TEST_CASE("halving the tolerances moves exit states by less than ten event tolerances") {
    IntegratorOptions fine;
    fine.abs_tol *= 0.5;
    fine.rel_tol *= 0.5;
    for (double r0 : {0.3927, 1.0, 1.4923}) {
        const Trajectory a = integrate({r0, quarter_pi, -half_pi}, P2, torus_events());
        const Trajectory b = integrate({r0, quarter_pi, -half_pi}, P2, torus_events(), fine);
        REQUIRE(a.exit.kind == b.exit.kind);
        const double tol = 10 * IntegratorOptions{}.event_tol;
        CHECK(std::abs(a.exit.s_exit - b.exit.s_exit) < tol);
        CHECK(std::abs(a.exit.state_exit.r - b.exit.state_exit.r) < tol);
        CHECK(std::abs(a.exit.state_exit.theta - b.exit.state_exit.theta) < tol);
        CHECK(std::abs(a.exit.state_exit.alpha - b.exit.state_exit.alpha) < tol);
    }
}

TEST_CASE("property: continuous dependence on r0") {
    for_all(23, 20, [](Gen& g, int) {
        const double r0 = g.uniform(0.1, 1.15);  // Roof side, away from the corner
        const Trajectory a = integrate({r0, quarter_pi, -half_pi}, P2, torus_events());
        const Trajectory b = integrate({r0 + 1e-9, quarter_pi, -half_pi}, P2, torus_events());
        REQUIRE(a.exit.kind == b.exit.kind);
        CHECK(std::abs(a.exit.state_exit.r - b.exit.state_exit.r) < 1e-6);
        CHECK(std::abs(a.exit.state_exit.theta - b.exit.state_exit.theta) < 1e-6);
        CHECK(std::abs(a.exit.s_exit - b.exit.s_exit) < 1e-6);
    });
}

TEST_CASE("step limit and boundary guards") {
    IntegratorOptions o;
    o.s_max = 0.1;
    const Trajectory t = integrate({1.0, quarter_pi, -half_pi}, P2, EventSpec{}, o);
    CHECK(t.exit.kind == ExitKind::StepLimit);
    CHECK(t.length() == doctest::Approx(0.1).epsilon(1e-14));

    // straight down the bisector into r = 0
    const Trajectory u = integrate({0.5, quarter_pi, pi}, P2, EventSpec{});
    CHECK(u.exit.kind == ExitKind::BlowUp);
    CHECK(u.exit.name == "guard:r_low");
    CHECK(u.exit.state_exit.r == doctest::Approx(IntegratorOptions{}.eps_bdry).epsilon(1e-3));
    CHECK(u.length() == doctest::Approx(0.5).epsilon(1e-8));

    // the first-return shot with alpha0 close to pi/2 never comes back
    const ReturnReport rep = first_return(2 * pi / 3, half_pi - 0.01, 2);
    CHECK_FALSE(rep.returned);
    CHECK(rep.traj.exit.kind != ExitKind::VarthetaZero);
}

TEST_CASE("initial data outside the quotient is rejected") {
    CHECK_THROWS_AS(integrate({0.0, quarter_pi, -half_pi}, P2, EventSpec{}), DomainError);
    CHECK_THROWS_AS(integrate({pi, quarter_pi, -half_pi}, P2, EventSpec{}), DomainError);
    CHECK_THROWS_AS(integrate({1.0, 0.0, -half_pi}, P2, EventSpec{}), DomainError);
    CHECK_THROWS_AS(integrate({1.0, half_pi, -half_pi}, P2, EventSpec{}), DomainError);
    CHECK_THROWS_AS(integrate({1.6, quarter_pi, -half_pi}, SystemParams::triple_product(), EventSpec{}), DomainError);
    CHECK_THROWS_AS(integrate({1.0, quarter_pi, NAN}, P2, EventSpec{}), DomainError);
}

TEST_CASE("events start on their own surface without firing") {
    // the centre-line start sits on alpha = -pi/2 and the roof event is armed only later
    const Trajectory t = integrate(make_shifted(2 * pi / 3, 0.0, 0.1), P2,
                                   EventSpec{}.add(events::vartheta_zero(Direction::Falling, true, 1e-10)));
    CHECK(t.exit.kind == ExitKind::VarthetaZero);
    CHECK(t.exit.s_exit > 0.1);
}

TEST_CASE("xyz integration matches the polar side shot") {
    const State y0{1.4923, quarter_pi, -half_pi};
    const Trajectory t = integrate(y0, P2, torus_events());
    REQUIRE(t.exit.kind == ExitKind::Side);
    const double S = 0.9 * t.length();
    const XyzPath q = integrate_xyz(chart_transform(y0), 2, S);
    double worst = 0.0;
    for (int i = 0; i <= 400; ++i) {
        const double s = S * i / 400.0;
        const State a = t.at(s);
        const Vec3 b = q.at(s);
        const State c = chart_inverse({b[0], b[1], b[2]});
        worst = std::max({worst, std::abs(a.r - c.r), std::abs(a.theta - c.theta), std::abs(a.alpha - c.alpha)});
    }
    CHECK(worst < 1e-6);
    CHECK_THROWS_AS(integrate_xyz({0.0, 0.0, 0.0}, 2, 1.0), DomainError);
}

TEST_CASE("recorded non-terminal events carry their state") {
    EventSpec e;
    e.add(events::vartheta_level(0.01)).add(events::vartheta_zero(Direction::Falling, true, 1e-10));
    const Trajectory t = integrate(make_shifted(2 * pi / 3, 0.0, pi / 36), P2, e);
    REQUIRE(t.count_records("vartheta_level") >= 1);
    for (const auto& rec : t.records) {
        if (rec.name == "vartheta_level") {
            CHECK(rec.state.vartheta() == doctest::Approx(0.01).epsilon(1e-9));
            CHECK_FALSE(rec.terminal);
        }
    }
}
