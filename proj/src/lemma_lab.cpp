#include "eqmin/lemma_lab.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <ostream>
#include <random>
#include <sstream>

#include "eqmin/shooting.hpp"

namespace eqmin {

namespace {

std::string num(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

std::string inputs_of(std::initializer_list<std::pair<const char*, double>> kv) {
    std::string s;
    for (const auto& [k, v] : kv) {
        if (!s.empty()) s += ';';
        s += k;
        s += '=';
        s += num(v);
    }
    return s;
}

// stored samples merged with an equispaced pass at the requested density
std::vector<Sample> dense_samples(const Trajectory& t, double density) {
    std::vector<Sample> out = t.samples;
    if (t.samples.size() >= 2) {
        const auto m = static_cast<std::size_t>(std::ceil(density * t.length())) + 1;
        auto extra = resample(t, std::max<std::size_t>(m, 2));
        out.insert(out.end(), extra.begin(), extra.end());
        std::stable_sort(out.begin(), out.end(), [](const Sample& a, const Sample& b) { return a.s < b.s; });
    }
    return out;
}

double vartheta_slope(const State& s) { return std::sin(s.alpha) / std::sin(s.r); }

}  // namespace

BoundCheck lower_bound_check(std::string id, std::string inputs, double bound, double observed) {
    BoundCheck c{std::move(id), std::move(inputs), bound, observed, false, observed - bound};
    c.satisfied = std::isfinite(observed) && c.margin >= -bound_slack;
    return c;
}

BoundCheck upper_bound_check(std::string id, std::string inputs, double bound, double observed) {
    BoundCheck c{std::move(id), std::move(inputs), bound, observed, false, bound - observed};
    c.satisfied = std::isfinite(observed) && c.margin >= -bound_slack;
    return c;
}

const char* outcome_name(TurnProbe::Outcome o) {
    return o == TurnProbe::Outcome::Clockwise ? "Clockwise" : "Anticlockwise";
}

double roof_constant(int n) {
    if (n < 2) throw std::invalid_argument("roof constant needs n >= 2");
    const double x = 1.0 / (3.0 * n);
    return 2.0 * std::exp(pi / (4.0 * n - 4.0) * std::cos(x) / std::sin(x));
}

double dipping_delta(int n) { return 1.0 / (6.0 * n); }

double first_arc_level(double alpha0, int n) { return (half_pi - alpha0) * alpha0 / (4.0 * n); }

double return_ratio_bound(double r0, int n) {
    return std::max(1.0, (2.0 * n - 1.0) / (2.0 * n - 2.0) * std::abs(std::cos(r0)));
}

BoundCheck check_dipping_down(double r0, int n, const LabOptions& opts) {
    if (!(r0 > 0.0 && r0 < pi / 8.0)) throw DomainError("dipping-down check needs r0 in (0, pi/8)");
    const Trajectory t = torus_shot(r0, n, opts.integ);
    const double bound = quarter_pi - dipping_delta(n);
    double worst = -std::numeric_limits<double>::infinity();
    bool any = false;
    for (const auto& smp : dense_samples(t, opts.sample_density)) {
        if (smp.state.r >= 2.0 * r0) {
            any = true;
            worst = std::max(worst, smp.state.theta);
        }
    }
    const std::string in = inputs_of({{"n", n}, {"r0", r0}});
    if (!any) {
        // hypothesis r >= 2 r0 never met before the exit
        double r_max = 0.0;
        for (const auto& smp : t.samples) r_max = std::max(r_max, smp.state.r);
        return BoundCheck{"dipping_down", in + ";vacuous=1;rmax_over_r0=" + num(r_max / r0), bound, std::nan(""),
                          true, std::nan("")};
    }
    return upper_bound_check("dipping_down", in, bound, worst);
}

BoundCheck check_roof_bound(double r0, int n, const LabOptions& opts) {
    const double cn = roof_constant(n);
    if (!(r0 > 0.0 && cn * r0 < half_pi)) throw DomainError("roof bound check needs 0 < c_n r0 < pi/2");
    const Trajectory t = torus_shot(r0, n, opts.integ);
    const std::string in = inputs_of({{"n", n}, {"r0", r0}});
    BoundCheck c = upper_bound_check("roof_bound", in, cn * r0, t.exit.state_exit.r);
    if (t.exit.kind != ExitKind::Roof) {
        c.inputs += ";exit=" + t.exit.name;
        c.satisfied = false;
    }
    return c;
}

BoundCheck check_first_arc(double r0, double alpha0, int n, const LabOptions& opts) {
    if (!(r0 >= half_pi && r0 < pi)) throw DomainError("first arc check needs r0 in [pi/2, pi)");
    if (!(alpha0 > 0.0 && alpha0 < half_pi)) throw DomainError("first arc check needs alpha0 in (0, pi/2)");
    const double level = first_arc_level(alpha0, n);
    EventFunction lv = events::vartheta_level(level);
    lv.terminal = true;
    EventFunction az = events::alpha_zero_falling();
    az.terminal = true;
    EventSpec ev;
    ev.add(lv).add(az).add(events::alpha_upper());
    const Trajectory t = integrate(make_shifted(r0, 0.0, alpha0), SystemParams::double_product(n), ev, opts.integ);
    const std::string in = inputs_of({{"n", n}, {"r0", r0}, {"alpha0", alpha0}});
    if (t.exit.name != "vartheta_level") throw S1NotFound("level not reached (" + in + ", exit " + t.exit.name + ")");

    const double t0 = std::tan(alpha0);
    double ratio = std::numeric_limits<double>::infinity();
    double vt_lo = std::numeric_limits<double>::infinity(), vt_hi = -std::numeric_limits<double>::infinity();
    for (const auto& smp : dense_samples(t, opts.sample_density)) {
        if (smp.s <= 0.0) continue;
        ratio = std::min(ratio, std::tan(smp.state.alpha) / t0);
        vt_lo = std::min(vt_lo, smp.state.vartheta());
        vt_hi = std::max(vt_hi, smp.state.vartheta());
    }
    BoundCheck c = lower_bound_check("first_arc", in, 0.5, ratio);
    // 0 < vartheta <= vartheta(s1) on (0, s1]
    const double range_margin = std::min(vt_lo, level - vt_hi);
    if (range_margin < -bound_slack) {
        c.satisfied = false;
        c.margin = std::min(c.margin, range_margin);
    }
    return c;
}

std::vector<BoundCheck> check_return_bounds(double r0, double alpha0, int n, const LabOptions& opts) {
    const ReturnReport rep = first_return(r0, alpha0, n, opts.integ);
    const std::string in = inputs_of({{"n", n}, {"r0", r0}, {"alpha0", alpha0}});
    if (!rep.returned) throw PreconditionNotMet("no return to vartheta = 0 (" + in + ", exit " + rep.traj.exit.name + ")");
    if (!rep.has_s2) throw PreconditionNotMet("no alpha = 0 point before the return (" + in + ")");

    std::vector<BoundCheck> out;
    out.push_back(lower_bound_check("return_ratio", in, return_ratio_bound(r0, n),
                                    std::abs(rep.alpha_at_return / alpha0)));
    out.push_back(lower_bound_check("return_height", in, alpha0 / (2.0 * n - 2.0), rep.vartheta_max));
    out.push_back(lower_bound_check("return_end_slope", in, vartheta_slope(rep.traj.initial()),
                                    -vartheta_slope(rep.traj.exit.state_exit)));
    double rise = -std::numeric_limits<double>::infinity();
    double prev = std::numeric_limits<double>::quiet_NaN();
    for (const auto& smp : dense_samples(rep.traj, opts.sample_density)) {
        if (smp.s < rep.s2) continue;
        const double d = vartheta_slope(smp.state);
        if (!std::isnan(prev)) rise = std::max(rise, d - prev);
        prev = d;
    }
    if (!std::isfinite(rise)) rise = 0.0;
    out.push_back(upper_bound_check("return_slope_monotone", in, 0.0, rise));
    return out;
}

TurnProbe probe_turning(int n, double alpha0, const LabOptions& opts) {
    if (!(alpha0 > 0.0 && alpha0 < half_pi)) throw DomainError("probe needs alpha0 in (0, pi/2)");
    EventSpec ev;
    ev.add(events::theta_min());
    const Trajectory t = integrate(make_shifted(half_pi, 0.0, alpha0), SystemParams::double_product(n), ev, opts.integ);
    std::ostringstream where;
    where << "n=" << n << " alpha0=" << num(alpha0);
    if (t.exit.kind != ExitKind::ThetaMin)
        throw ProbeInconclusive("no interior theta minimum (" + where.str() + ", exit " + t.exit.name + ")");
    TurnProbe p;
    p.n = n;
    p.alpha0 = alpha0;
    p.alpha_at_event = t.exit.state_exit.alpha;
    p.theta_min = t.exit.state_exit.theta;
    p.s_event = t.exit.s_exit;
    // alpha is continuous along the shot, so no unwrapping is needed
    if (std::abs(p.alpha_at_event + pi) < 1e-3)
        p.outcome = TurnProbe::Outcome::Clockwise;
    else if (std::abs(p.alpha_at_event) < 1e-3)
        p.outcome = TurnProbe::Outcome::Anticlockwise;
    else
        throw ProbeInconclusive("alpha = " + num(p.alpha_at_event) + " at the theta minimum (" + where.str() + ")");
    return p;
}

std::vector<double> linear_grid(double lo, double hi, std::size_t count) {
    std::vector<double> g(count);
    if (count == 1) g[0] = lo;
    for (std::size_t i = 0; count > 1 && i < count; ++i)
        g[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
    return g;
}

std::vector<double> log_grid(double lo, double hi, std::size_t count) {
    if (!(lo > 0.0 && hi > 0.0)) throw std::invalid_argument("log grid needs positive ends");
    std::vector<double> g(count);
    if (count == 1) g[0] = lo;
    for (std::size_t i = 0; count > 1 && i < count; ++i)
        g[i] = lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(count - 1));
    return g;
}

SweepSpec default_sweep(const std::vector<int>& ns) {
    SweepSpec s;
    s.ns = ns;
    s.dipping_r0 = log_grid(1e-4, pi / 8.0 - 1e-3, 20);
    s.roof_r0 = linear_grid(0.05, 0.95, 20);
    s.arc_r0 = linear_grid(half_pi, pi - 0.01, 20);
    s.arc_alpha0 = log_grid(1e-4, 0.5, 30);
    s.arc_random = 50;
    s.return_r0 = linear_grid(half_pi, pi - 0.01, 20);
    s.return_alpha0 = log_grid(1e-4, 0.1, 30);
    return s;
}

SweepSpec default_probe_sweep(const std::vector<int>& ns) {
    SweepSpec s;
    s.probe_ns = ns;
    s.probe_alpha0 = log_grid(1e-6, half_pi - 1e-3, 30);
    return s;
}

bool Report::all_satisfied() const {
    if (!errors.empty()) return false;
    return std::all_of(checks.begin(), checks.end(), [](const BoundCheck& c) { return c.satisfied; });
}

Report sweep(const SweepSpec& spec) {
    Report rep;
    const LabOptions& lab = spec.lab;
    auto guarded = [&rep](auto&& fn) {
        try {
            fn();
        } catch (const PreconditionNotMet& e) {
            rep.skipped.emplace_back(e.what());
        } catch (const std::exception& e) {
            rep.errors.emplace_back(e.what());
        }
    };
    std::mt19937_64 rng(spec.seed);
    for (int n : spec.ns) {
        for (double r0 : spec.dipping_r0) guarded([&] { rep.checks.push_back(check_dipping_down(r0, n, lab)); });
        const double r_cap = half_pi / roof_constant(n);
        for (double f : spec.roof_r0) guarded([&] { rep.checks.push_back(check_roof_bound(f * r_cap, n, lab)); });
        for (double r0 : spec.arc_r0)
            for (double a0 : spec.arc_alpha0) guarded([&] { rep.checks.push_back(check_first_arc(r0, a0, n, lab)); });
        std::uniform_real_distribution<double> ur(half_pi, pi - 0.01), ua(std::log(1e-4), std::log(0.5));
        for (std::size_t i = 0; i < spec.arc_random; ++i) {
            const double r0 = ur(rng), a0 = std::exp(ua(rng));
            guarded([&] { rep.checks.push_back(check_first_arc(r0, a0, n, lab)); });
        }
        for (double r0 : spec.return_r0)
            for (double a0 : spec.return_alpha0)
                guarded([&] {
                    auto v = check_return_bounds(r0, a0, n, lab);
                    rep.checks.insert(rep.checks.end(), v.begin(), v.end());
                });
    }
    for (int n : spec.probe_ns)
        for (double a0 : spec.probe_alpha0) guarded([&] { rep.probes.push_back(probe_turning(n, a0, lab)); });
    return rep;
}

std::size_t write_report_csv(const Report& report, std::ostream& out) {
    std::string s = "lemma_id,inputs,bound,observed,satisfied,margin\n";
    for (const auto& c : report.checks) {
        s += c.lemma_id + ',' + c.inputs + ',' + num(c.bound_value) + ',' + num(c.observed_value) + ',' +
             (c.satisfied ? "true" : "false") + ',' + num(c.margin) + '\n';
    }
    for (const auto& p : report.probes) {
        s += std::string("EVIDENCE:turning,") + inputs_of({{"n", p.n}, {"alpha0", p.alpha0}}) + ',' +
             outcome_name(p.outcome) + ',' + num(p.alpha_at_event) + ",true," + num(p.theta_min) + '\n';
    }
    auto flat = [](std::string msg) {
        std::replace(msg.begin(), msg.end(), ',', ';');
        std::replace(msg.begin(), msg.end(), '\n', ' ');
        return msg;
    };
    for (const auto& e : report.skipped) s += "SKIPPED," + flat(e) + ",nan,nan,n/a,nan\n";
    for (const auto& e : report.errors) s += "ERROR," + flat(e) + ",nan,nan,false,nan\n";
    out << s;
    if (!out) throw std::ios_base::failure("report write failed");
    return s.size();
}

}  // namespace eqmin
