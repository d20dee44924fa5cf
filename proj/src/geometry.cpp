#include "eqmin/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "eqmin/errors.hpp"

namespace eqmin {

const char* curve_kind_name(CurveKind k) {
    switch (k) {
        case CurveKind::TorusOrbit: return "TorusOrbit";
        case CurveKind::SphereCurve: return "SphereCurve";
        case CurveKind::ImmersedTorusOrbit: return "ImmersedTorusOrbit";
        case CurveKind::FreeBoundaryOrbit: return "FreeBoundaryOrbit";
    }
    return "?";
}

bool is_closed(CurveKind k) { return k != CurveKind::SphereCurve; }

double AssembledCurve::length() const {
    if (segments.empty()) return 0.0;
    return offsets.back() + segments.back().length();
}

std::size_t AssembledCurve::segment_of(double s) const {
    auto it = std::upper_bound(offsets.begin(), offsets.end(), s);
    if (it == offsets.begin()) return 0;
    return static_cast<std::size_t>(std::distance(offsets.begin(), it)) - 1;
}

State AssembledCurve::at(double s) const {
    const std::size_t i = segment_of(s);
    return segments[i].at(s - offsets[i]);
}

Vec3 AssembledCurve::internal_deriv(double s) const {
    const std::size_t i = segment_of(s);
    return segments[i].internal_deriv(s - offsets[i]);
}

namespace {

void shift_alpha(Trajectory& t, double delta) {
    if (delta == 0.0) return;
    for (auto& smp : t.samples) {
        smp.y[2] += delta;
        smp.state.alpha += delta;
    }
    for (auto& d : t.dense) d.c[0][2] += delta;
    for (auto& r : t.records) r.state.alpha += delta;
    t.exit.state_exit.alpha += delta;
}

double wrap_angle(double a) { return std::remainder(a, 2.0 * pi); }

Junction compare_states(std::size_t index, double s, const State& end, const State& start) {
    Junction j;
    j.index = index;
    j.s = s;
    j.position_mismatch = std::max(std::abs(end.r - start.r), std::abs(end.theta - start.theta));
    j.tangent_mismatch = std::abs(wrap_angle(end.alpha - start.alpha));
    return j;
}

Trajectory apply_word(const Trajectory& base, const std::vector<SymmetryKind>& word) {
    Trajectory t = base;
    for (SymmetryKind k : word) t = apply_symmetry(t, k);
    return t;
}

std::string word_label(const std::vector<SymmetryKind>& word) {
    std::string s = "base";
    for (SymmetryKind k : word) s = std::string(symmetry_name(k)) + "(" + s + ")";
    return s;
}

}  // namespace

AssembledCurve assemble(const Trajectory& base, CurveKind kind, const AssemblyTolerances& tol) {
    if (base.samples.size() < 2) throw std::invalid_argument("cannot assemble an empty trajectory");
    const bool triple = base.params.is_triple();
    if (triple != (kind == CurveKind::FreeBoundaryOrbit))
        throw std::invalid_argument(std::string(curve_kind_name(kind)) + " does not match " +
                                    base.params.describe());
    AssembledCurve c;
    c.kind = kind;
    c.params = base.params;

    using S = SymmetryKind;
    std::vector<std::vector<S>> words;
    switch (kind) {
        case CurveKind::TorusOrbit:
            words = {{}, {S::AxisR, S::Reverse}, {S::AxisR, S::AxisTheta}, {S::AxisTheta, S::Reverse}};
            break;
        case CurveKind::ImmersedTorusOrbit:
            words = {{}, {S::ReflectVartheta, S::Reverse}, {S::AxisR}, {S::ReflectVartheta, S::AxisR, S::Reverse}};
            break;
        case CurveKind::SphereCurve: words = {{S::CentralTimeReversed}, {}}; break;
        case CurveKind::FreeBoundaryOrbit: {
            const S walls[5] = {S::SwapXZ, S::SwapYZ, S::AxisTheta, S::SwapXZ, S::SwapYZ};
            words.push_back({});
            for (S w : walls) {
                auto next = words.back();
                next.push_back(w);
                next.push_back(S::Reverse);
                words.push_back(next);
            }
            break;
        }
    }

    for (std::size_t i = 0; i < words.size(); ++i) {
        // free-boundary segments are built from the previous one to keep the swaps well conditioned
        Trajectory seg = (kind == CurveKind::FreeBoundaryOrbit && i > 0)
                             ? apply_word(c.segments.back(), {words[i][words[i].size() - 2], S::Reverse})
                             : apply_word(base, words[i]);
        if (!c.segments.empty()) {
            const double prev_end = c.segments.back().final_state().alpha;
            const double start = seg.initial().alpha;
            shift_alpha(seg, 2.0 * pi * std::round((prev_end - start) / (2.0 * pi)));
        }
        c.offsets.push_back(c.segments.empty() ? 0.0 : c.offsets.back() + c.segments.back().length());
        c.labels.push_back(word_label(words[i]));
        c.segments.push_back(std::move(seg));
    }

    for (std::size_t i = 0; i + 1 < c.segments.size(); ++i)
        c.junctions.push_back(
            compare_states(i, c.offsets[i + 1], c.segments[i].final_state(), c.segments[i + 1].initial()));
    if (is_closed(kind)) {
        Junction j = compare_states(c.segments.size() - 1, c.length(), c.segments.back().final_state(),
                                    c.segments.front().initial());
        c.closure_gap = j.position_mismatch;
        c.junctions.push_back(j);
    }
    for (const auto& j : c.junctions) {
        if (j.position_mismatch > tol.position || j.tangent_mismatch > tol.tangent) {
            std::ostringstream os;
            os << curve_kind_name(kind) << ": junction " << j.index << " at s = " << j.s
               << " mismatches by position " << j.position_mismatch << ", tangent " << j.tangent_mismatch;
            throw JunctionMismatch(os.str());
        }
    }
    return c;
}

void assemble(const AssembledCurve& curve, CurveKind kind, const AssemblyTolerances&) {
    throw AlreadyAssembled(std::string("curve of kind ") + curve_kind_name(curve.kind) +
                           " is already assembled; cannot assemble it again as " + curve_kind_name(kind));
}

std::vector<double> segment_nodes(const Trajectory& t, const NodeOptions& opts) {
    const double L = t.length();
    std::vector<double> nodes{0.0};
    if (!(L > 0.0)) return nodes;
    const double h0 = L / static_cast<double>(std::max<std::size_t>(opts.per_segment, 4));
    double s = 0.0;
    while (true) {
        const State st = t.at(s);
        const double d = boundary_distance(st.r, st.theta, t.params);
        const double ds = std::max(std::min(h0, opts.grading * d), 1e-15 * std::max(1.0, L));
        if (s + 1.5 * ds >= L) {
            if (L - s > ds) nodes.push_back(s + 0.5 * (L - s));
            nodes.push_back(L);
            break;
        }
        s += ds;
        nodes.push_back(s);
    }
    return nodes;
}

std::vector<double> fd_weights(double x0, const std::vector<double>& x) {
    const std::size_t n = x.size();
    std::vector<std::array<double, 2>> c(n, {0.0, 0.0});
    double c1 = 1.0, c4 = x[0] - x0;
    c[0][0] = 1.0;
    for (std::size_t i = 1; i < n; ++i) {
        const int mn = 1;
        double c2 = 1.0;
        const double c5 = c4;
        c4 = x[i] - x0;
        for (std::size_t j = 0; j < i; ++j) {
            const double c3 = x[i] - x[j];
            c2 *= c3;
            if (j == i - 1) {
                for (int k = mn; k >= 1; --k) c[i][k] = c1 * (k * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for (int k = mn; k >= 1; --k) c[j][k] = (c4 * c[j][k] - k * c[j][k - 1]) / c3;
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    std::vector<double> w(n);
    for (std::size_t i = 0; i < n; ++i) w[i] = c[i][1];
    return w;
}

namespace {

std::vector<ResidualNode> residual_nodes(const Trajectory& t, const SystemParams& params, const NodeOptions& opts) {
    const std::vector<double> s = segment_nodes(t, opts);
    const std::size_t m = s.size();
    std::vector<Vec3> y(m);
    for (std::size_t i = 0; i < m; ++i) y[i] = t.internal_at(s[i]);
    std::vector<ResidualNode> out;
    if (m < 5) return out;
    out.reserve(m);
    std::vector<double> xs(5);
    for (std::size_t i = 0; i < m; ++i) {
        const std::size_t lo = std::min(i >= 2 ? i - 2 : 0, m - 5);
        for (std::size_t k = 0; k < 5; ++k) xs[k] = s[lo + k];
        const auto w = fd_weights(s[i], xs);
        double tt = 0.0, at = 0.0;
        for (std::size_t k = 0; k < 5; ++k) {
            tt += w[k] * y[lo + k][1];
            at += w[k] * y[lo + k][2];
        }
        const double r = y[i][0];
        const double theta = y[i][1] + quarter_pi;
        const double a = y[i][2];
        const LogWeightGradient g = log_weight_gradient(r, theta, params);
        // kappa_g from differentiated alpha and theta; the normal derivative of ln V uses alpha itself
        const double kappa = at + std::cos(r) * tt;
        const double res = kappa + std::sin(a) * g.d_r - std::cos(a) * g.d_theta / std::sin(r);
        out.push_back({s[i], boundary_distance(r, theta, params), res});
    }
    return out;
}

double max_residual(const std::vector<ResidualNode>& nodes, double cutoff) {
    double mx = 0.0;
    for (const auto& p : nodes)
        if (p.distance >= cutoff) mx = std::max(mx, std::abs(p.value));
    return mx;
}

}  // namespace

std::vector<ResidualNode> residual_profile(const Trajectory& traj, const NodeOptions& opts) {
    return residual_nodes(traj, traj.params, opts);
}

double curvature_residual(const Trajectory& traj, const NodeOptions& opts) {
    return max_residual(residual_nodes(traj, traj.params, opts), opts.residual_cutoff);
}

double curvature_residual(const AssembledCurve& curve, const SystemParams& params, const NodeOptions& opts) {
    double mx = 0.0;
    for (const auto& seg : curve.segments)
        mx = std::max(mx, max_residual(residual_nodes(seg, params, opts), opts.residual_cutoff));
    return mx;
}

double lifted_volume(const Trajectory& traj, std::size_t intervals) {
    if (intervals < 2) intervals = 2;
    if (intervals % 2) ++intervals;
    const double L = traj.length();
    const double h = L / static_cast<double>(intervals);
    double acc = 0.0;
    for (std::size_t i = 0; i <= intervals; ++i) {
        const double s = i == intervals ? L : h * static_cast<double>(i);
        const State st = traj.at(s);
        const double w = (i == 0 || i == intervals) ? 1.0 : (i % 2 ? 4.0 : 2.0);
        acc += w * weight(st.r, st.theta, traj.params);
    }
    return acc * h / 3.0;
}

double lifted_volume(const AssembledCurve& curve, const SystemParams& params, std::size_t intervals) {
    double v = 0.0;
    for (auto seg : curve.segments) {
        seg.params = params;
        v += lifted_volume(seg, intervals);
    }
    return v;
}

Polyline curve_polyline(const AssembledCurve& curve, const NodeOptions& opts) {
    Polyline p;
    p.closed = is_closed(curve.kind);
    p.length = curve.length();
    for (std::size_t k = 0; k < curve.segments.size(); ++k) {
        const auto& seg = curve.segments[k];
        const auto nodes = segment_nodes(seg, opts);
        for (std::size_t i = (k == 0 ? 0 : 1); i < nodes.size(); ++i) {
            const State st = seg.at(nodes[i]);
            p.pts.push_back({st.r, st.theta});
            p.s.push_back(curve.offsets[k] + nodes[i]);
            p.vartheta.push_back(st.vartheta());
        }
    }
    if (p.closed && p.pts.size() > 1) {
        p.pts.pop_back();
        p.s.pop_back();
        p.vartheta.pop_back();
    }
    return p;
}

bool edges_adjacent(std::size_t i, std::size_t j, std::size_t n_edges, bool closed) {
    if (i == j) return true;
    const std::size_t d = i > j ? i - j : j - i;
    if (d == 1) return true;
    return closed && d == n_edges - 1;
}

bool segment_intersection(const Point2& a, const Point2& b, const Point2& c, const Point2& d, double& t, double& u) {
    const double rx = b[0] - a[0], ry = b[1] - a[1];
    const double sx = d[0] - c[0], sy = d[1] - c[1];
    const double den = rx * sy - ry * sx;
    if (den == 0.0) return false;
    const double qx = c[0] - a[0], qy = c[1] - a[1];
    t = (qx * sy - qy * sx) / den;
    u = (qx * ry - qy * rx) / den;
    return t >= 0.0 && t <= 1.0 && u >= 0.0 && u <= 1.0;
}

std::vector<EdgeHit> polyline_edge_hits(const Polyline& poly) {
    std::vector<EdgeHit> hits;
    const std::size_t nv = poly.pts.size();
    if (nv < 3) return hits;
    const std::size_t ne = poly.closed ? nv : nv - 1;
    auto endpoint = [&](std::size_t e, int which) -> const Point2& { return poly.pts[(e + which) % nv]; };

    double lx = std::numeric_limits<double>::infinity(), ly = lx, hx = -lx, hy = -lx;
    double total = 0.0;
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& a = endpoint(e, 0);
        const auto& b = endpoint(e, 1);
        total += std::hypot(b[0] - a[0], b[1] - a[1]);
        lx = std::min(lx, a[0]);
        hx = std::max(hx, a[0]);
        ly = std::min(ly, a[1]);
        hy = std::max(hy, a[1]);
    }
    const double cell = std::max(2.0 * total / static_cast<double>(ne), 1e-12);
    auto key = [](std::int64_t x, std::int64_t y) { return (static_cast<std::uint64_t>(x) << 32) ^ static_cast<std::uint32_t>(y); };
    std::unordered_map<std::uint64_t, std::vector<std::size_t>> grid;
    for (std::size_t e = 0; e < ne; ++e) {
        const auto& a = endpoint(e, 0);
        const auto& b = endpoint(e, 1);
        const auto x0 = static_cast<std::int64_t>(std::floor((std::min(a[0], b[0]) - lx) / cell));
        const auto x1 = static_cast<std::int64_t>(std::floor((std::max(a[0], b[0]) - lx) / cell));
        const auto y0 = static_cast<std::int64_t>(std::floor((std::min(a[1], b[1]) - ly) / cell));
        const auto y1 = static_cast<std::int64_t>(std::floor((std::max(a[1], b[1]) - ly) / cell));
        for (auto x = x0; x <= x1; ++x)
            for (auto y = y0; y <= y1; ++y) grid[key(x, y)].push_back(e);
    }
    std::unordered_set<std::uint64_t> seen;
    std::vector<std::uint64_t> keys;
    keys.reserve(grid.size());
    for (const auto& kv : grid) keys.push_back(kv.first);
    std::sort(keys.begin(), keys.end());
    for (auto k : keys) {
        const auto& list = grid[k];
        for (std::size_t p = 0; p < list.size(); ++p) {
            for (std::size_t q = p + 1; q < list.size(); ++q) {
                std::size_t i = list[p], j = list[q];
                if (i > j) std::swap(i, j);
                if (edges_adjacent(i, j, ne, poly.closed)) continue;
                const std::uint64_t pk = static_cast<std::uint64_t>(i) * ne + j;
                if (!seen.insert(pk).second) continue;
                double t, u;
                if (segment_intersection(endpoint(i, 0), endpoint(i, 1), endpoint(j, 0), endpoint(j, 1), t, u))
                    hits.push_back({i, j, t, u});
            }
        }
    }
    std::sort(hits.begin(), hits.end(),
              [](const EdgeHit& a, const EdgeHit& b) { return a.i < b.i || (a.i == b.i && a.j < b.j); });
    return hits;
}

std::size_t count_vartheta_crossings(const std::vector<double>& vt, bool closed, double zero_tol) {
    const std::size_t m = vt.size();
    if (m == 0) return 0;
    auto sgn = [&](std::size_t i) { return std::abs(vt[i]) < zero_tol ? 0 : (vt[i] > 0.0 ? 1 : -1); };
    std::size_t start = m;
    for (std::size_t i = 0; i < m; ++i)
        if (sgn(i) != 0) {
            start = i;
            break;
        }
    if (start == m) throw DegenerateTangency("curve lies on vartheta = 0 at resolution");
    std::size_t count = 0;
    if (closed) {
        int last = sgn(start);
        bool zero_run = false;
        for (std::size_t k = 1; k <= m; ++k) {
            const int s = sgn((start + k) % m);
            if (s == 0) {
                zero_run = true;
                continue;
            }
            if (s != last)
                ++count;
            else if (zero_run)
                throw DegenerateTangency("tangential contact with vartheta = 0");
            last = s;
            zero_run = false;
        }
        return count;
    }
    if (start > 0) ++count;  // open curve starting on the bisector
    int last = sgn(start);
    bool zero_run = false;
    for (std::size_t i = start + 1; i < m; ++i) {
        const int s = sgn(i);
        if (s == 0) {
            zero_run = true;
            continue;
        }
        if (s != last)
            ++count;
        else if (zero_run)
            throw DegenerateTangency("tangential contact with vartheta = 0");
        last = s;
        zero_run = false;
    }
    if (zero_run) ++count;  // open curve ending on the bisector
    return count;
}

namespace {

Point2 point_at(const AssembledCurve& c, double s) {
    const State st = c.at(s);
    return {st.r, st.theta};
}

// recursive halving of both parameter intervals, keeping the chord pair that still intersects
bool subdivide(const AssembledCurve& c, double a0, double a1, double b0, double b1, int depth,
               std::array<double, 2>& out, double& sin_angle) {
    const Point2 pa0 = point_at(c, a0), pa1 = point_at(c, a1), pb0 = point_at(c, b0), pb1 = point_at(c, b1);
    double t, u;
    if (!segment_intersection(pa0, pa1, pb0, pb1, t, u)) return false;
    if (depth == 0 || (a1 - a0 < 1e-13 && b1 - b0 < 1e-13)) {
        out = {a0 + t * (a1 - a0), b0 + u * (b1 - b0)};
        const double rm = 0.5 * (pa0[0] + pa1[0]);
        const double dx1 = pa1[0] - pa0[0], dy1 = std::sin(rm) * (pa1[1] - pa0[1]);
        const double dx2 = pb1[0] - pb0[0], dy2 = std::sin(rm) * (pb1[1] - pb0[1]);
        sin_angle = std::abs(dx1 * dy2 - dy1 * dx2) / (std::hypot(dx1, dy1) * std::hypot(dx2, dy2));
        return true;
    }
    const double am = 0.5 * (a0 + a1), bm = 0.5 * (b0 + b1);
    const std::array<std::array<double, 2>, 2> ai{{{a0, am}, {am, a1}}};
    const std::array<std::array<double, 2>, 2> bi{{{b0, bm}, {bm, b1}}};
    for (const auto& x : ai)
        for (const auto& y : bi)
            if (subdivide(c, x[0], x[1], y[0], y[1], depth - 1, out, sin_angle)) return true;
    return false;
}

}  // namespace

std::vector<std::array<double, 2>> refine_and_merge(const AssembledCurve& curve, const Polyline& poly,
                                                    const std::vector<EdgeHit>& hits) {
    const std::size_t nv = poly.pts.size();
    const double L = poly.length;
    auto edge_params = [&](std::size_t e) -> std::array<double, 2> {
        const double s0 = poly.s[e];
        const double s1 = (e + 1 < nv) ? poly.s[e + 1] : L;
        return {s0, s1};
    };
    std::vector<std::array<double, 2>> found;
    for (const auto& h : hits) {
        const auto ea = edge_params(h.i), eb = edge_params(h.j);
        std::array<double, 2> p{ea[0] + h.t * (ea[1] - ea[0]), eb[0] + h.u * (eb[1] - eb[0])};
        double sin_angle = 1.0;
        std::array<double, 2> refined{};
        // widen by one neighbouring edge on each side so a crossing at a vertex is kept
        const double wa = ea[1] - ea[0], wb = eb[1] - eb[0];
        const double a0 = std::max(0.0, ea[0] - 0.5 * wa), a1 = std::min(L, ea[1] + 0.5 * wa);
        const double b0 = std::max(0.0, eb[0] - 0.5 * wb), b1 = std::min(L, eb[1] + 0.5 * wb);
        if (subdivide(curve, a0, a1, b0, b1, 60, refined, sin_angle)) p = refined;
        if (sin_angle < 1e-6) {
            std::ostringstream os;
            os << "tangential self-contact at s = " << p[0] << ", " << p[1];
            throw DegenerateTangency(os.str());
        }
        if (p[0] > p[1]) std::swap(p[0], p[1]);
        found.push_back(p);
    }
    // merge hits describing the same crossing (parameters close, with wrap-around on closed curves)
    auto close = [&](double x, double y) {
        double d = std::abs(x - y);
        if (poly.closed) d = std::min(d, L - d);
        return d < 1e-7 * std::max(1.0, L);
    };
    std::vector<std::array<double, 2>> merged;
    for (const auto& p : found) {
        bool dup = false;
        for (const auto& q : merged) {
            if ((close(p[0], q[0]) && close(p[1], q[1])) || (close(p[0], q[1]) && close(p[1], q[0]))) {
                dup = true;
                break;
            }
        }
        if (!dup) merged.push_back(p);
    }
    std::sort(merged.begin(), merged.end());
    return merged;
}

CrossingCount count_crossings(const AssembledCurve& curve, const NodeOptions& opts) {
    const Polyline poly = curve_polyline(curve, opts);
    CrossingCount cc;
    cc.z_crossings = count_vartheta_crossings(poly.vartheta, poly.closed);
    cc.intersection_params = refine_and_merge(curve, poly, polyline_edge_hits(poly));
    cc.self_intersections = cc.intersection_params.size();
    return cc;
}

CrossingCount count_crossings(const Trajectory& traj, const NodeOptions& opts) {
    AssembledCurve c;
    c.kind = CurveKind::SphereCurve;  // open, single segment
    c.params = traj.params;
    c.segments.push_back(traj);
    c.offsets.push_back(0.0);
    c.labels.push_back("base");
    return count_crossings(c, opts);
}

std::array<EndpointCertificate, 2> sphere_endpoint_certificate(const AssembledCurve& curve, double eps) {
    if (curve.kind != CurveKind::SphereCurve) throw std::invalid_argument("endpoint certificate needs a SphereCurve");
    std::array<EndpointCertificate, 2> out{};
    const double L = curve.length();
    for (int end = 0; end < 2; ++end) {
        EndpointCertificate& ec = out[end];
        const State tip = end == 0 ? curve.at(0.0) : curve.at(L);
        ec.distance = quarter_pi - std::abs(tip.vartheta());
        ec.alpha_gap = std::abs(std::abs(std::remainder(tip.alpha, 2.0 * pi)) - half_pi);
        // walk inwards from the tip over one decade of boundary distance
        std::vector<double> lx, ly;
        const double d_lo = std::max(ec.distance, eps);
        const double d_hi = 10.0 * d_lo;
        const std::size_t steps = 4000;
        double s_lim = 0.0;
        {
            // arc length over which the distance grows to d_hi
            double s = 0.0, ds = std::max(d_lo * 1e-3, 1e-14);
            while (s < 0.5 * L) {
                const double sp = end == 0 ? s : L - s;
                const State st = curve.at(sp);
                if (quarter_pi - std::abs(st.vartheta()) >= d_hi) break;
                s += ds;
                ds *= 1.01;
            }
            s_lim = s;
        }
        for (std::size_t i = 0; i <= steps; ++i) {
            const double s = s_lim * static_cast<double>(i) / static_cast<double>(steps);
            const double sp = end == 0 ? s : L - s;
            const State st = curve.at(sp);
            const double d = quarter_pi - std::abs(st.vartheta());
            const double a = std::remainder(st.alpha, 2.0 * pi);
            const double g = std::abs(std::abs(a) - half_pi);
            if (d < d_lo || d > d_hi || !(g > 0.0)) continue;
            lx.push_back(std::log(d));
            ly.push_back(std::log(g));
        }
        ec.points = lx.size();
        if (lx.size() < 3) continue;
        const double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / static_cast<double>(lx.size());
        const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / static_cast<double>(ly.size());
        double sxx = 0.0, sxy = 0.0;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            sxx += (lx[i] - mx) * (lx[i] - mx);
            sxy += (lx[i] - mx) * (ly[i] - my);
        }
        ec.slope = sxx > 0.0 ? sxy / sxx : 0.0;
        ec.extrapolated_alpha_gap = std::exp(my + ec.slope * (std::log(eps) - mx));
    }
    return out;
}

}  // namespace eqmin
