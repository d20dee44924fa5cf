#include "eqmin/integrator.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>

namespace eqmin {

namespace {

using Field = std::function<bool(const Vec3&, Vec3&)>;

// Dormand-Prince 5(4) tableau
constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                 a65 = -5103.0 / 18656;
constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784, a76 = 11.0 / 84;
constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                 e6 = 22.0 / 525, e7 = -1.0 / 40;
// dense output weights (Hairer's contd5)
constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                 d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                 d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

struct StepResult {
    Vec3 y1{};
    Vec3 k7{};
    double err = 0.0;
    std::array<Vec3, 7> k{};
};

class Stepper {
public:
    Stepper(Field f, double atol, double rtol) : f_(std::move(f)), atol_(atol), rtol_(rtol) {}

    bool eval(const Vec3& y, Vec3& dy) const { return f_(y, dy); }

    bool attempt(const Vec3& y, const Vec3& k1, double h, StepResult& out) const {
        auto& k = out.k;
        k[0] = k1;
        Vec3 t{};
        for (int i = 0; i < 3; ++i) t[i] = y[i] + h * a21 * k[0][i];
        if (!f_(t, k[1])) return false;
        for (int i = 0; i < 3; ++i) t[i] = y[i] + h * (a31 * k[0][i] + a32 * k[1][i]);
        if (!f_(t, k[2])) return false;
        for (int i = 0; i < 3; ++i) t[i] = y[i] + h * (a41 * k[0][i] + a42 * k[1][i] + a43 * k[2][i]);
        if (!f_(t, k[3])) return false;
        for (int i = 0; i < 3; ++i)
            t[i] = y[i] + h * (a51 * k[0][i] + a52 * k[1][i] + a53 * k[2][i] + a54 * k[3][i]);
        if (!f_(t, k[4])) return false;
        for (int i = 0; i < 3; ++i)
            t[i] = y[i] + h * (a61 * k[0][i] + a62 * k[1][i] + a63 * k[2][i] + a64 * k[3][i] + a65 * k[4][i]);
        if (!f_(t, k[5])) return false;
        for (int i = 0; i < 3; ++i)
            out.y1[i] = y[i] + h * (a71 * k[0][i] + a73 * k[2][i] + a74 * k[3][i] + a75 * k[4][i] + a76 * k[5][i]);
        if (!f_(out.y1, k[6])) return false;
        out.k7 = k[6];
        double acc = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double e =
                h * (e1 * k[0][i] + e3 * k[2][i] + e4 * k[3][i] + e5 * k[4][i] + e6 * k[5][i] + e7 * k[6][i]);
            const double sc = atol_ + rtol_ * std::max(std::abs(y[i]), std::abs(out.y1[i]));
            acc += (e / sc) * (e / sc);
        }
        // error per unit step, so the accumulated error stays near the tolerance over unit arc length
        out.err = std::sqrt(acc / 3.0) / std::clamp(h, 1e-2, 1.0);
        return std::isfinite(out.err);
    }

    static DenseStep dense(double s0, double h, const Vec3& y0, const StepResult& st) {
        DenseStep d;
        d.s0 = s0;
        d.h = h;
        const auto& k = st.k;
        for (int i = 0; i < 3; ++i) {
            const double r1 = y0[i];
            const double r2 = st.y1[i] - y0[i];
            const double r3 = h * k[0][i] - r2;
            const double r4 = r2 - h * k[6][i] - r3;
            const double r5 =
                h * (d1 * k[0][i] + d3 * k[2][i] + d4 * k[3][i] + d5 * k[4][i] + d6 * k[5][i] + d7 * k[6][i]);
            d.c[0][i] = r1;
            d.c[1][i] = r2 + r3;
            d.c[2][i] = -r3 + r4 + r5;
            d.c[3][i] = -r4 - 2.0 * r5;
            d.c[4][i] = r5;
        }
        return d;
    }

    double initial_step(const Vec3& y0, const Vec3& f0, double h_max) const {
        double dn0 = 0.0, dn1 = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double sc = atol_ + rtol_ * std::abs(y0[i]);
            dn0 += (y0[i] / sc) * (y0[i] / sc);
            dn1 += (f0[i] / sc) * (f0[i] / sc);
        }
        dn0 = std::sqrt(dn0 / 3.0);
        dn1 = std::sqrt(dn1 / 3.0);
        double h = (dn0 <= 1e-10 || dn1 <= 1e-10) ? 1e-6 : 0.01 * dn0 / dn1;
        h = std::min(h, h_max);
        Vec3 y1{}, f1{};
        for (int i = 0; i < 3; ++i) y1[i] = y0[i] + h * f0[i];
        if (!f_(y1, f1)) return std::min(1e-6, h);
        double dn2 = 0.0;
        for (int i = 0; i < 3; ++i) {
            const double sc = atol_ + rtol_ * std::abs(y0[i]);
            dn2 += ((f1[i] - f0[i]) / sc) * ((f1[i] - f0[i]) / sc);
        }
        dn2 = std::sqrt(dn2 / 3.0) / h;
        const double der = std::max(dn1, dn2);
        const double h1 = der <= 1e-15 ? std::max(1e-6, h * 1e-3) : std::pow(0.01 / der, 0.2);
        return std::min({100.0 * h, h1, h_max});
    }

private:
    Field f_;
    double atol_, rtol_;
};

// proportional-integral controller as in Hairer & Wanner's dopri5
struct Controller {
    double facold = 1e-4;
    static constexpr double beta = 0.04, safe = 0.9, facc1 = 5.0, facc2 = 0.1;
    static constexpr double expo1 = 0.2 - beta * 0.75;

    double accepted(double h, double err) {
        const double fac11 = std::pow(err, expo1);
        double fac = fac11 / std::pow(facold, beta);
        fac = std::max(facc2, std::min(facc1, fac / safe));
        facold = std::max(err, 1e-4);
        return h / fac;
    }
    static double rejected(double h, double err) {
        const double fac11 = std::pow(err, expo1);
        return h / std::min(facc1, fac11 / safe);
    }
};

bool crosses(double prev, double now, Direction dir) {
    switch (dir) {
        case Direction::Rising: return prev < 0.0 && now >= 0.0;
        case Direction::Falling: return prev > 0.0 && now <= 0.0;
        case Direction::Any: return (prev < 0.0 && now >= 0.0) || (prev > 0.0 && now <= 0.0);
    }
    return false;
}

std::vector<EventFunction> guards(const SystemParams& p, double eps) {
    std::vector<EventFunction> g;
    const double r_top = p.is_triple() ? half_pi : pi;
    g.push_back({"guard:r_low", [eps](const State& s) { return s.r - eps; }, Direction::Falling, true,
                 ExitKind::BlowUp, 0.0});
    g.push_back({"guard:r_high", [eps, r_top](const State& s) { return (r_top - eps) - s.r; }, Direction::Falling,
                 true, ExitKind::BlowUp, 0.0});
    g.push_back({"guard:theta", [eps](const State& s) { return (quarter_pi - eps) - std::abs(s.vartheta()); },
                 Direction::Falling, true, ExitKind::BlowUp, 0.0});
    return g;
}

struct Candidate {
    double s;
    std::size_t idx;
};

}  // namespace

double locate_event(const DenseStep& step, const std::function<double(const State&)>& f, Direction dir, double a,
                    double b, double tol, RootMethod method) {
    auto g = [&](double s) { return f(from_internal(step.eval(s))); };
    double fa = g(a), fb = g(b);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    const bool rising = fa < 0.0 && fb > 0.0;
    const bool falling = fa > 0.0 && fb < 0.0;
    if ((!rising && !falling) || (dir == Direction::Rising && !rising) || (dir == Direction::Falling && !falling))
        throw NoCrossing("no sign change of the event function over the step");
    const double target = 0.01 * tol;
    double ga = fa, gb = fb;  // possibly down-weighted copies for the Illinois update
    int side = 0;
    double width_check = b - a;
    double best = std::abs(fa) < std::abs(fb) ? a : b;
    double best_f = std::min(std::abs(fa), std::abs(fb));
    for (int it = 0; it < 300; ++it) {
        double m;
        if (method == RootMethod::Bisection) {
            m = 0.5 * (a + b);
        } else {
            m = b - gb * (b - a) / (gb - ga);
            if (it % 4 == 3) {
                if (b - a > 0.5 * width_check) m = 0.5 * (a + b);
                width_check = b - a;
            }
            if (!(m > a && m < b)) m = 0.5 * (a + b);
        }
        const double fm = g(m);
        if (std::abs(fm) < best_f) {
            best_f = std::abs(fm);
            best = m;
        }
        if (std::abs(fm) <= target || fm == 0.0) return m;
        if ((fm > 0.0) == (fb > 0.0)) {
            b = m;
            fb = fm;
            gb = fm;
            if (side == -1) ga *= 0.5;
            side = -1;
        } else {
            a = m;
            fa = fm;
            ga = fm;
            if (side == +1) gb *= 0.5;
            side = +1;
        }
        if (b - a <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(a))) break;
    }
    return best;
}

Trajectory integrate(const State& initial, const SystemParams& params, const EventSpec& spec,
                     const IntegratorOptions& opts) {
    params.validate();
    const double r_top = params.is_triple() ? half_pi : pi;
    if (!(initial.r > opts.eps_bdry && initial.r < r_top - opts.eps_bdry) ||
        !(std::abs(initial.vartheta()) < quarter_pi - opts.eps_bdry) || !std::isfinite(initial.alpha)) {
        std::ostringstream os;
        os << "initial state (" << initial.r << ", " << initial.theta << ", " << initial.alpha
           << ") is not an admissible start for " << params.describe();
        throw DomainError(os.str());
    }
    Stepper stepper([&params](const Vec3& y, Vec3& dy) { return shifted_field(params, y, dy); }, opts.abs_tol,
                    opts.rel_tol);

    std::vector<EventFunction> evs = spec.events;
    const std::size_t n_user = evs.size();
    for (auto& g : guards(params, opts.eps_bdry)) evs.push_back(std::move(g));

    Trajectory tr;
    tr.params = params;
    Vec3 y = to_internal(initial);
    Vec3 k1{};
    if (!stepper.eval(y, k1)) throw DomainError("field not finite at the initial state");
    tr.samples.push_back(Sample::from(0.0, y));

    // an event is armed from the start unless the initial state sits on (or within arm_above of) its surface
    std::vector<double> prev(evs.size(), 0.0);
    std::vector<char> armed(evs.size(), 0);
    for (std::size_t i = 0; i < evs.size(); ++i) {
        prev[i] = evs[i].f(initial);
        armed[i] = prev[i] != 0.0 && std::abs(prev[i]) > evs[i].arm_above;
    }
    double s = 0.0;
    double h = stepper.initial_step(y, k1, opts.h_max);
    Controller ctl;
    bool last_rejected = false;

    auto finish = [&](ExitKind kind, const std::string& name) {
        tr.exit.kind = kind;
        tr.exit.name = name;
        tr.exit.s_exit = tr.samples.back().s;
        tr.exit.state_exit = tr.samples.back().state;
    };

    while (true) {
        if (s >= opts.s_max) {
            finish(ExitKind::StepLimit, "s_max");
            return tr;
        }
        h = std::min({h, opts.h_max, opts.s_max - s});
        if (h < opts.h_min) {
            finish(ExitKind::BlowUp, "guard:step_underflow");
            return tr;
        }
        StepResult st;
        if (!stepper.attempt(y, k1, h, st)) {
            ++tr.stats.rejected;
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        if (st.err > 1.0) {
            ++tr.stats.rejected;
            h = Controller::rejected(h, st.err);
            last_rejected = true;
            continue;
        }
        double h_new = ctl.accepted(h, st.err);
        if (last_rejected) h_new = std::min(h_new, h);
        last_rejected = false;
        ++tr.stats.steps;

        DenseStep dstep = Stepper::dense(s, h, y, st);
        const double s_new = (opts.s_max - s - h <= 1e-15 * std::max(1.0, opts.s_max)) ? opts.s_max : s + h;
        const State end_state = from_internal(st.y1);

        // events over (s, s_new]
        std::vector<double> now(evs.size());
        std::vector<Candidate> cands;
        for (std::size_t i = 0; i < evs.size(); ++i) {
            now[i] = evs[i].f(end_state);
            if (armed[i] && crosses(prev[i], now[i], evs[i].direction)) {
                double sc;
                try {
                    sc = locate_event(dstep, evs[i].f, evs[i].direction, s, s + h, opts.event_tol);
                } catch (const NoCrossing&) {
                    continue;
                }
                cands.push_back({sc, i});
            }
        }
        std::sort(cands.begin(), cands.end(), [](const Candidate& a, const Candidate& b) {
            return a.s < b.s || (a.s == b.s && a.idx < b.idx);
        });
        const Candidate* term = nullptr;
        for (const auto& c : cands) {
            if (evs[c.idx].terminal) {
                term = &c;
                break;
            }
        }
        for (const auto& c : cands) {
            if (term && c.s > term->s) break;
            const auto& e = evs[c.idx];
            if (term && &c != term && e.terminal) continue;
            EventRecord rec;
            rec.index = c.idx < n_user ? c.idx : SIZE_MAX;
            rec.name = e.name;
            rec.s = c.s;
            rec.state = from_internal(dstep.eval(c.s));
            rec.terminal = e.terminal;
            tr.records.push_back(rec);
        }

        // arc-length constraint of the interpolant at the accepted step end
        {
            const Vec3 ye = dstep.eval_tau(1.0);
            const Vec3 de = dstep.deriv(s + h);
            const double sr = std::sin(ye[0]);
            const double res = std::abs(de[0] * de[0] + sr * sr * de[1] * de[1] - 1.0);
            tr.stats.max_constraint_residual = std::max(tr.stats.max_constraint_residual, res);
        }

        if (term) {
            const double tau = std::clamp((term->s - s) / h, 0.0, 1.0);
            if (tau > 0.0) {
                const auto& fe = evs[term->idx].f;
                // the interpolant is a lower order than the step itself, so take a real step
                // onto the event surface (Newton on the step length)
                double he = term->s - s;
                StepResult se;
                bool stepped = false;
                for (int it = 0; it < 6 && he > 0.0 && he <= h; ++it) {
                    if (!stepper.attempt(y, k1, he, se)) break;
                    stepped = true;
                    const double g = fe(from_internal(se.y1));
                    if (std::abs(g) <= 0.01 * opts.event_tol) break;
                    const DenseStep d = Stepper::dense(s, he, y, se);
                    const double del = 1e-6 * he;
                    const double slope = (fe(from_internal(d.eval_tau(1.0))) -
                                          fe(from_internal(d.eval_tau(1.0 - del / he)))) / del;
                    if (!(std::abs(slope) > 0.0) || !std::isfinite(slope)) break;
                    const double hn = he - g / slope;
                    if (!(hn > 0.0 && hn <= h) || std::abs(hn - he) < 1e-16 * std::max(1.0, s)) break;
                    he = hn;
                }
                if (stepped) {
                    DenseStep cut = Stepper::dense(s, he, y, se);
                    tr.dense.push_back(cut);
                    tr.samples.push_back(Sample::from(s + he, se.y1));
                    for (auto it = tr.records.rbegin(); it != tr.records.rend(); ++it) {
                        if (it->terminal && it->name == evs[term->idx].name) {
                            it->s = s + he;
                            it->state = from_internal(se.y1);
                            break;
                        }
                    }
                } else {
                    DenseStep cut = dstep.truncated(tau);
                    double s_e = s + cut.h;
                    if (!(s_e > s)) s_e = std::nextafter(s, opts.s_max);
                    cut.h = s_e - s;
                    tr.dense.push_back(cut);
                    tr.samples.push_back(Sample::from(s_e, dstep.eval(term->s)));
                }
            }
            finish(evs[term->idx].kind, evs[term->idx].name);
            return tr;
        }

        tr.dense.push_back(dstep);
        tr.samples.push_back(Sample::from(s_new, st.y1));
        for (std::size_t i = 0; i < evs.size(); ++i) {
            bool fired = false;
            for (const auto& c : cands)
                if (c.idx == i) fired = true;
            if (fired && evs[i].arm_above > 0.0) armed[i] = 0;
            prev[i] = now[i];
            if (!armed[i] && std::abs(now[i]) > evs[i].arm_above) armed[i] = 1;
        }
        y = st.y1;
        k1 = st.k7;
        s = s_new;
        h = h_new;
    }
}

std::vector<Sample> resample(const Trajectory& traj, std::size_t m) {
    std::vector<Sample> out;
    if (traj.samples.empty() || m == 0) return out;
    if (m == 1) {
        out.push_back(traj.samples.front());
        return out;
    }
    const double L = traj.length();
    out.reserve(m);
    out.push_back(traj.samples.front());
    for (std::size_t i = 1; i + 1 < m; ++i) {
        const double s = L * static_cast<double>(i) / static_cast<double>(m - 1);
        out.push_back(Sample::from(s, traj.internal_at(s)));
    }
    out.push_back(traj.samples.back());
    return out;
}

Vec3 XyzPath::at(double sq) const {
    if (dense.empty()) return q.front();
    sq = std::clamp(sq, s.front(), s.back());
    auto it = std::upper_bound(dense.begin(), dense.end(), sq, [](double v, const DenseStep& d) { return v < d.s0; });
    const std::size_t i = it == dense.begin() ? 0 : static_cast<std::size_t>(std::distance(dense.begin(), it)) - 1;
    return dense[i].eval(sq);
}

XyzPath integrate_xyz(const XyzState& q0, int n, double s_end, const IntegratorOptions& opts) {
    if (!(q0.x > 0.0)) throw DomainError("xyz chart needs x > 0");
    Stepper stepper([n](const Vec3& q, Vec3& dq) { return xyz_field(n, q, dq); }, opts.abs_tol, opts.rel_tol);
    XyzPath path;
    Vec3 y{q0.x, q0.y, q0.z};
    Vec3 k1{};
    if (!stepper.eval(y, k1)) throw DomainError("xyz field not finite at the initial point");
    path.s.push_back(0.0);
    path.q.push_back(y);
    double s = 0.0;
    double h = stepper.initial_step(y, k1, opts.h_max);
    Controller ctl;
    bool last_rejected = false;
    while (s < s_end) {
        h = std::min({h, opts.h_max, s_end - s});
        if (h < opts.h_min) throw NonFinite("xyz integration: step size underflow");
        StepResult st;
        if (!stepper.attempt(y, k1, h, st)) {
            h *= 0.25;
            last_rejected = true;
            continue;
        }
        if (st.err > 1.0) {
            h = Controller::rejected(h, st.err);
            last_rejected = true;
            continue;
        }
        double h_new = ctl.accepted(h, st.err);
        if (last_rejected) h_new = std::min(h_new, h);
        last_rejected = false;
        path.dense.push_back(Stepper::dense(s, h, y, st));
        s = (s_end - s - h <= 1e-15 * std::max(1.0, s_end)) ? s_end : s + h;
        path.s.push_back(s);
        path.q.push_back(st.y1);
        y = st.y1;
        k1 = st.k7;
        h = h_new;
    }
    return path;
}

namespace events {

EventFunction roof() {
    return {"roof", [](const State& s) { return s.alpha; }, Direction::Rising, true, ExitKind::Roof, 0.0};
}

EventFunction side() {
    return {"side", [](const State& s) { return s.r - half_pi; }, Direction::Rising, true, ExitKind::Side, 0.0};
}

EventFunction vartheta_zero(Direction dir, bool terminal, double arm_above) {
    return {"vartheta_zero", [](const State& s) { return s.vartheta(); }, dir, terminal, ExitKind::VarthetaZero,
            arm_above};
}

EventFunction alpha_upper() {
    return {"alpha_upper", [](const State& s) { return s.alpha - half_pi; }, Direction::Rising, true,
            ExitKind::BlowUp, 0.0};
}

EventFunction alpha_lower() {
    return {"alpha_lower", [](const State& s) { return s.alpha + half_pi; }, Direction::Falling, true,
            ExitKind::BlowUp, 0.0};
}

EventFunction appendix_boundary() {
    return {"appendix_boundary", [](const State& s) { return std::tan(s.r) * std::cos(s.theta) - 1.0; },
            Direction::Rising, true, ExitKind::AppendixBoundary, 0.0};
}

EventFunction theta_min() {
    return {"theta_min", [](const State& s) { return std::sin(s.alpha); }, Direction::Rising, true,
            ExitKind::ThetaMin, 0.0};
}

EventFunction vartheta_level(double level) {
    return {"vartheta_level", [level](const State& s) { return s.vartheta() - level; }, Direction::Rising, false,
            ExitKind::VarthetaZero, 0.0};
}

EventFunction alpha_zero_falling() {
    return {"alpha_zero", [](const State& s) { return s.alpha; }, Direction::Falling, false, ExitKind::Roof, 0.0};
}

}  // namespace events

}  // namespace eqmin
