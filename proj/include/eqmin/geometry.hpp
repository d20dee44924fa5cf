#pragma once

#include <array>
#include <string>
#include <vector>

#include "eqmin/dynamics.hpp"
#include "eqmin/trajectory.hpp"

namespace eqmin {

enum class CurveKind { TorusOrbit, SphereCurve, ImmersedTorusOrbit, FreeBoundaryOrbit };

const char* curve_kind_name(CurveKind k);
bool is_closed(CurveKind k);

struct Junction {
    std::size_t index = 0;  // junction between segment index and index + 1 (mod count when closing)
    double s = 0.0;
    double position_mismatch = 0.0;  // max(|dr|, |dtheta|)
    double tangent_mismatch = 0.0;   // |alpha difference| mod 2 pi
};

struct AssemblyTolerances {
    double position = 1e-9;
    double tangent = 1e-8;
};

struct AssembledCurve {
    CurveKind kind = CurveKind::TorusOrbit;
    SystemParams params{};
    std::vector<Trajectory> segments;
    std::vector<std::string> labels;  // symmetry word producing each segment from the base
    std::vector<double> offsets;      // arc length where each segment starts
    std::vector<Junction> junctions;  // consecutive junctions, then the closing one for closed kinds
    double closure_gap = 0.0;

    double length() const;
    std::size_t segment_of(double s) const;
    State at(double s) const;
    Vec3 internal_deriv(double s) const;
};

// TorusOrbit: quarter from the centre-line shot to the corner (4 segments).
// SphereCurve: hat trajectory from the centre; 2 segments through the central reflection.
// ImmersedTorusOrbit: check trajectory from the centre; 4 segments.
// FreeBoundaryOrbit: triple-product arc from theta = pi/4 to u = 1; 6 segments by wall reflections.
AssembledCurve assemble(const Trajectory& base, CurveKind kind, const AssemblyTolerances& tol = {});
// a curve is never re-assembled
[[noreturn]] void assemble(const AssembledCurve& curve, CurveKind kind, const AssemblyTolerances& tol = {});

struct NodeOptions {
    std::size_t per_segment = 2000;  // uniform spacing L / per_segment away from the boundary
    double grading = 0.02;           // spacing <= grading * boundary distance
    // curvature_residual skips nodes closer than this to the boundary (0 keeps all)
    double residual_cutoff = 1e-3;
};

// local arc-length nodes on one trajectory, graded towards the singular boundary
std::vector<double> segment_nodes(const Trajectory& t, const NodeOptions& opts = {});

// weights of the first derivative at x0 from nodes x (Fornberg's recursion)
std::vector<double> fd_weights(double x0, const std::vector<double>& x);

double curvature_residual(const AssembledCurve& curve, const SystemParams& params, const NodeOptions& opts = {});
double curvature_residual(const Trajectory& traj, const NodeOptions& opts = {});

struct ResidualNode {
    double s = 0.0;
    double distance = 0.0;  // boundary distance of the node
    double value = 0.0;
};

// residual at every node of one trajectory
std::vector<ResidualNode> residual_profile(const Trajectory& traj, const NodeOptions& opts = {});

double lifted_volume(const AssembledCurve& curve, const SystemParams& params, std::size_t intervals = 4096);
double lifted_volume(const Trajectory& traj, std::size_t intervals = 4096);

using Point2 = std::array<double, 2>;

struct Polyline {
    std::vector<Point2> pts;      // (r, theta)
    std::vector<double> s;        // global arc length of each vertex
    std::vector<double> vartheta;
    bool closed = false;
    double length = 0.0;
};

Polyline curve_polyline(const AssembledCurve& curve, const NodeOptions& opts = {});

struct EdgeHit {
    std::size_t i = 0;  // edge (pts[i], pts[i+1]) ; the closing edge has i = pts.size() - 1
    std::size_t j = 0;
    double t = 0.0;
    double u = 0.0;
};

bool edges_adjacent(std::size_t i, std::size_t j, std::size_t n_edges, bool closed);
// transversal or touching intersection of two segments; parameters in [0, 1]
bool segment_intersection(const Point2& a, const Point2& b, const Point2& c, const Point2& d, double& t, double& u);
// candidate pairs through a uniform grid of cells
std::vector<EdgeHit> polyline_edge_hits(const Polyline& poly);

struct CrossingCount {
    std::size_t z_crossings = 0;
    std::size_t self_intersections = 0;
    std::vector<std::array<double, 2>> intersection_params;  // (s_a, s_b), s_a < s_b
};

// zero crossings of vartheta along the vertex sequence; |vartheta| < zero_tol counts as zero
std::size_t count_vartheta_crossings(const std::vector<double>& vartheta, bool closed, double zero_tol = 1e-9);

CrossingCount count_crossings(const AssembledCurve& curve, const NodeOptions& opts = {});
CrossingCount count_crossings(const Trajectory& traj, const NodeOptions& opts = {});

// refine polyline hits on the curve and merge the ones describing the same crossing
std::vector<std::array<double, 2>> refine_and_merge(const AssembledCurve& curve, const Polyline& poly,
                                                    const std::vector<EdgeHit>& hits);

struct EndpointCertificate {
    double distance = 0.0;   // pi/4 - |vartheta| at the end point
    double alpha_gap = 0.0;  // pi/2 - |alpha| at the end point
    double slope = 0.0;      // fitted d log(alpha gap) / d log(distance)
    double extrapolated_alpha_gap = 0.0;  // fit evaluated at distance = eps
    std::size_t points = 0;
};

// fit over the last decade of distance approaching the corner at each end of a SphereCurve
std::array<EndpointCertificate, 2> sphere_endpoint_certificate(const AssembledCurve& curve, double eps = 1e-9);

}  // namespace eqmin
