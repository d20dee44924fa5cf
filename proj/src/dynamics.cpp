#include "eqmin/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace eqmin {

SystemParams SystemParams::double_product(int n) {
    SystemParams p{System::DoubleProduct, n};
    p.validate();
    return p;
}

SystemParams SystemParams::triple_product() { return SystemParams{System::TripleProduct, 2}; }

void SystemParams::validate() const {
    if (system == System::DoubleProduct && n < 2) throw std::invalid_argument("double product needs n >= 2");
    if (system == System::TripleProduct && n != 2) throw std::invalid_argument("triple product is fixed to n = 2");
}

std::string SystemParams::describe() const {
    std::ostringstream os;
    os << (is_triple() ? "triple" : "double") << "(n=" << n << ")";
    return os.str();
}

const char* symmetry_name(SymmetryKind k) {
    switch (k) {
        case SymmetryKind::ReflectVartheta: return "ReflectVartheta";
        case SymmetryKind::CentralTimeReversed: return "CentralTimeReversed";
        case SymmetryKind::AxisR: return "AxisR";
        case SymmetryKind::AxisTheta: return "AxisTheta";
        case SymmetryKind::Reverse: return "Reverse";
        case SymmetryKind::SwapXZ: return "SwapXZ";
        case SymmetryKind::SwapYZ: return "SwapYZ";
    }
    return "?";
}

bool reverses_time(SymmetryKind k) { return k == SymmetryKind::CentralTimeReversed || k == SymmetryKind::Reverse; }

bool is_affine(SymmetryKind k) { return k != SymmetryKind::SwapXZ && k != SymmetryKind::SwapYZ; }

bool shifted_field(const SystemParams& p, const Vec3& y, Vec3& dy) {
    const double r = y[0], vt = y[1], a = y[2];
    if (!(r > 0.0 && r < pi && std::abs(vt) < quarter_pi)) return false;
    if (p.is_triple() && !(r < half_pi)) return false;
    const double sr = std::sin(r), ca = std::cos(a), sa = std::sin(a);
    const double t2 = std::tan(2.0 * vt);  // cot(2 theta) = -tan(2 vartheta)
    dy[0] = ca;
    dy[1] = sa / sr;
    if (p.is_triple()) {
        dy[2] = -2.0 * t2 * ca / sr - (2.0 + 4.0 * std::cos(2.0 * r)) / std::sin(2.0 * r) * sa;
    } else {
        const double m = static_cast<double>(p.n);
        dy[2] = -(2.0 * m - 2.0) * t2 * ca / sr - (2.0 * m - 1.0) * (std::cos(r) / sr) * sa;
    }
    return std::isfinite(dy[0]) && std::isfinite(dy[1]) && std::isfinite(dy[2]);
}

namespace {

void require_interior(const State& s, const SystemParams& p) {
    const bool r_ok = p.is_triple() ? (s.r > 0.0 && s.r < half_pi) : (s.r > 0.0 && s.r < pi);
    if (!r_ok || !(s.theta > 0.0 && s.theta < half_pi) || !std::isfinite(s.alpha)) {
        std::ostringstream os;
        os << "state (" << s.r << ", " << s.theta << ", " << s.alpha << ") outside the open domain of "
           << p.describe();
        throw DomainError(os.str());
    }
}

}  // namespace

Derivative eval_field(const State& state, const SystemParams& params) {
    params.validate();
    require_interior(state, params);
    Vec3 dy{};
    if (!shifted_field(params, to_internal(state), dy)) throw DomainError("field not finite");
    return Derivative{dy[0], dy[1], dy[2]};
}

bool xyz_field(int n, const Vec3& q, Vec3& dq) {
    const double x = q[0], y = q[1], z = q[2];
    if (!(x > 0.0)) return false;
    const double wz = std::sqrt(z * z + 1.0), wx = std::sqrt(x * x + 1.0);
    const double m = static_cast<double>(n);
    dq[0] = (x * x + 1.0) * z / wz;
    dq[1] = 2.0 * (y * y + 1.0) * wx / (x * wz);
    dq[2] = (2.0 * m - 2.0) * y * z * wz * wx / x + (2.0 * m - 1.0) * wz / x;
    return std::isfinite(dq[0]) && std::isfinite(dq[1]) && std::isfinite(dq[2]);
}

XyzDerivative eval_field_xyz(const XyzState& q, int n) {
    if (!(q.x > 0.0)) throw DomainError("xyz chart needs x > 0");
    Vec3 d{};
    if (!xyz_field(n, {q.x, q.y, q.z}, d)) throw DomainError("xyz field not finite");
    return XyzDerivative{d[0], d[1], d[2]};
}

XyzState chart_transform(const State& s) {
    const double vt = s.vartheta();
    if (!(s.r > 0.0 && s.r < half_pi) || !(s.theta > 0.0 && vt <= 0.0) || !(s.alpha >= -half_pi && s.alpha < 0.0))
        throw DomainError("chart_transform: state outside r in (0,pi/2), theta in (0,pi/4], alpha in [-pi/2,0)");
    // tan(-2 vt) = cot(2 theta) and tan(alpha + pi/2) = -cot(alpha), both exact zero on the start strata
    return XyzState{std::tan(s.r), std::tan(-2.0 * vt), std::tan(s.alpha + half_pi)};
}

State chart_inverse(const XyzState& q) {
    if (!(q.x > 0.0) || !(q.y >= 0.0) || !(q.z >= 0.0)) throw DomainError("chart_inverse: point outside Q");
    return State{std::atan(q.x), quarter_pi - 0.5 * std::atan(q.y), std::atan(q.z) - half_pi};
}

double unit_sphere_volume(int k) {
    const double h = 0.5 * static_cast<double>(k + 1);
    return 2.0 * std::pow(pi, h) / std::tgamma(h);
}

double weight(double r, double theta, const SystemParams& params) {
    if (theta <= 0.0 || theta >= half_pi || r <= 0.0) return 0.0;
    if (params.is_triple()) {
        if (r >= half_pi) return 0.0;
        return 4.0 * pi * pi * pi * std::pow(std::sin(r), 2) * std::cos(r) * std::sin(2.0 * theta);
    }
    if (r >= pi) return 0.0;
    const int n = params.n;
    const double w = unit_sphere_volume(n - 1);
    return w * w * std::pow(std::sin(r), 2 * n - 2) * std::pow(std::sin(2.0 * theta), n - 1) /
           std::pow(2.0, n - 1);
}

LogWeightGradient log_weight_gradient(double r, double theta, const SystemParams& params) {
    const double cot2 = -std::tan(2.0 * (theta - quarter_pi));
    const double cotr = std::cos(r) / std::sin(r);
    if (params.is_triple()) return LogWeightGradient{2.0 * cotr - std::tan(r), 2.0 * cot2};
    const double m = static_cast<double>(params.n);
    return LogWeightGradient{(2.0 * m - 2.0) * cotr, (2.0 * m - 2.0) * cot2};
}

double boundary_distance(double r, double theta, const SystemParams& params) {
    const double r_top = params.is_triple() ? half_pi : pi;
    const double sr = std::sin(r);
    // the strata theta = 0 and theta = pi/2 are great circles through the poles
    return std::min({r, r_top - r, std::asin(std::min(1.0, sr * std::sin(theta))),
                     std::asin(std::min(1.0, sr * std::cos(theta)))});
}

Gauge boundary_gauge(double r, double theta) {
    if (!(r > 0.0 && r < half_pi)) throw DomainError("boundary_gauge needs r in (0, pi/2)");
    return Gauge{std::tan(r) * std::cos(theta), -std::atan(std::cos(r) * std::tan(theta))};
}

namespace {

struct Affine {
    Vec3 a{1, 1, 1};
    Vec3 b{0, 0, 0};
};

Affine affine_of(SymmetryKind k) {
    switch (k) {
        case SymmetryKind::ReflectVartheta:
        case SymmetryKind::AxisTheta: return Affine{{1, -1, -1}, {0, 0, 0}};
        case SymmetryKind::AxisR: return Affine{{-1, 1, -1}, {pi, 0, pi}};
        case SymmetryKind::CentralTimeReversed: return Affine{{-1, -1, 1}, {pi, 0, 0}};
        case SymmetryKind::Reverse: return Affine{{1, 1, 1}, {0, 0, pi}};
        default: throw std::logic_error("not an affine symmetry");
    }
}

Vec3 apply_affine(const Affine& m, const Vec3& y) {
    return {m.a[0] * y[0] + m.b[0], m.a[1] * y[1] + m.b[1], m.a[2] * y[2] + m.b[2]};
}

using V3 = std::array<double, 3>;

State swap_state(const State& s, SymmetryKind k) {
    const double sr = std::sin(s.r), cr = std::cos(s.r), st = std::sin(s.theta), ct = std::cos(s.theta);
    V3 p{sr * ct, sr * st, cr};
    V3 er{cr * ct, cr * st, -sr};
    V3 et{-st, ct, 0.0};
    V3 t{};
    for (int i = 0; i < 3; ++i) t[i] = std::cos(s.alpha) * er[i] + std::sin(s.alpha) * et[i];
    const int i0 = (k == SymmetryKind::SwapXZ) ? 0 : 1;
    std::swap(p[i0], p[2]);
    std::swap(t[i0], t[2]);
    State o;
    o.r = std::atan2(std::hypot(p[0], p[1]), p[2]);
    o.theta = std::atan2(p[1], p[0]);
    const double cr2 = std::cos(o.r), st2 = std::sin(o.theta), ct2 = std::cos(o.theta);
    V3 er2{cr2 * ct2, cr2 * st2, -std::sin(o.r)};
    V3 et2{-st2, ct2, 0.0};
    double a = 0.0, b = 0.0;
    for (int i = 0; i < 3; ++i) {
        a += t[i] * er2[i];
        b += t[i] * et2[i];
    }
    o.alpha = std::atan2(b, a);
    return o;
}

double unwrap_near(double a, double ref) {
    const double two_pi = 2.0 * pi;
    return a + two_pi * std::round((ref - a) / two_pi);
}

}  // namespace

State map_state(const State& s, SymmetryKind kind) {
    if (is_affine(kind)) return from_internal(apply_affine(affine_of(kind), to_internal(s)));
    return swap_state(s, kind);
}

namespace {

Trajectory apply_affine_symmetry(const Trajectory& tr, SymmetryKind kind) {
    const Affine m = affine_of(kind);
    Trajectory out;
    out.params = tr.params;
    out.stats = tr.stats;
    const double L = tr.length();
    const bool rev = reverses_time(kind);
    const std::size_t ns = tr.samples.size();
    out.samples.reserve(ns);
    for (std::size_t i = 0; i < ns; ++i) {
        const Sample& src = rev ? tr.samples[ns - 1 - i] : tr.samples[i];
        const double s = rev ? (i == 0 ? 0.0 : L - src.s) : src.s;
        out.samples.push_back(Sample::from(s, apply_affine(m, src.y)));
    }
    const std::size_t nd = tr.dense.size();
    out.dense.reserve(nd);
    for (std::size_t i = 0; i < nd; ++i) {
        DenseStep d = rev ? tr.dense[nd - 1 - i].reversed() : tr.dense[i];
        if (rev) d.s0 = L - (d.s0 + d.h);
        for (int k = 0; k < 5; ++k)
            for (int j = 0; j < 3; ++j) d.c[k][j] = m.a[j] * d.c[k][j] + (k == 0 ? m.b[j] : 0.0);
        out.dense.push_back(d);
    }
    if (rev && !out.dense.empty()) out.dense.front().s0 = 0.0;
    for (const auto& e : tr.records) {
        EventRecord r = e;
        r.s = rev ? L - e.s : e.s;
        r.state = from_internal(apply_affine(m, to_internal(e.state)));
        out.records.push_back(r);
    }
    if (rev) std::reverse(out.records.begin(), out.records.end());
    out.exit = tr.exit;
    out.exit.s_exit = out.length();
    out.exit.state_exit = out.samples.empty() ? State{} : out.samples.back().state;
    return out;
}

// power-basis quartic through 5 equispaced nodes tau = 0, 1/4, ..., 1
std::array<double, 5> quartic_through(const std::array<double, 5>& v) {
    // Newton divided differences on nodes j/4, then expansion into powers of tau
    std::array<double, 5> x{0.0, 0.25, 0.5, 0.75, 1.0};
    std::array<double, 5> dd = v;
    for (int j = 1; j < 5; ++j)
        for (int i = 4; i >= j; --i) dd[i] = (dd[i] - dd[i - 1]) / (x[i] - x[i - j]);
    std::array<double, 5> c{dd[4], 0, 0, 0, 0};
    int deg = 0;
    for (int i = 3; i >= 0; --i) {
        // c <- c * (tau - x[i]) + dd[i]
        std::array<double, 5> nc{};
        for (int k = 0; k <= deg; ++k) {
            nc[k + 1] += c[k];
            nc[k] -= x[i] * c[k];
        }
        nc[0] += dd[i];
        c = nc;
        ++deg;
    }
    return c;
}

Trajectory apply_swap_symmetry(const Trajectory& tr, SymmetryKind kind) {
    if (!tr.params.is_triple()) throw std::invalid_argument("coordinate swaps only act on the triple product");
    Trajectory out;
    out.params = tr.params;
    out.stats = tr.stats;
    double ref = 0.0;
    bool first = true;
    std::vector<double> sample_alpha;
    for (const auto& smp : tr.samples) {
        State m = swap_state(smp.state, kind);
        if (!first) m.alpha = unwrap_near(m.alpha, ref);
        first = false;
        ref = m.alpha;
        out.samples.push_back(Sample::from(smp.s, to_internal(m)));
    }
    for (std::size_t i = 0; i < tr.dense.size(); ++i) {
        const DenseStep& d = tr.dense[i];
        std::array<std::array<double, 5>, 3> vals{};
        double aref = out.samples[i].y[2];
        for (int j = 0; j < 5; ++j) {
            Vec3 y;
            if (j == 0) {
                y = out.samples[i].y;
            } else if (j == 4 && i + 1 < out.samples.size()) {
                y = out.samples[i + 1].y;
            } else {
                State m = swap_state(from_internal(d.eval_tau(0.25 * j)), kind);
                m.alpha = unwrap_near(m.alpha, aref);
                y = to_internal(m);
            }
            aref = y[2];
            for (int c = 0; c < 3; ++c) vals[c][j] = y[c];
        }
        DenseStep nd;
        nd.s0 = d.s0;
        nd.h = d.h;
        for (int c = 0; c < 3; ++c) {
            auto coef = quartic_through(vals[c]);
            for (int k = 0; k < 5; ++k) nd.c[k][c] = coef[k];
        }
        out.dense.push_back(nd);
    }
    for (const auto& e : tr.records) {
        EventRecord r = e;
        r.state = swap_state(e.state, kind);
        out.records.push_back(r);
    }
    out.exit = tr.exit;
    out.exit.state_exit = out.samples.empty() ? State{} : out.samples.back().state;
    return out;
}

}  // namespace

Trajectory apply_symmetry(const Trajectory& traj, SymmetryMap map) {
    if (is_affine(map.kind)) return apply_affine_symmetry(traj, map.kind);
    return apply_swap_symmetry(traj, map.kind);
}

double constraint_defect(const State& s, const Derivative& d) {
    return std::abs(d.dr - std::cos(s.alpha)) + std::abs(std::sin(s.r) * d.dtheta - std::sin(s.alpha));
}

}  // namespace eqmin
