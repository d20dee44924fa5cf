#pragma once

#include <utility>

#include "eqmin/errors.hpp"
#include "eqmin/trajectory.hpp"
#include "eqmin/types.hpp"

namespace eqmin {

// AxisTheta and ReflectVartheta act identically on (r, theta, alpha); both
// names are kept since the constructions refer to them in different roles.
// Reverse is plain reversal of the direction of travel (alpha -> alpha + pi).
// SwapXZ/SwapYZ permute the ambient coordinates X = sin r cos theta,
// Y = sin r sin theta, Z = cos r and only make sense for the triple product.
enum class SymmetryKind { ReflectVartheta, CentralTimeReversed, AxisR, AxisTheta, Reverse, SwapXZ, SwapYZ };

struct SymmetryMap {
    SymmetryKind kind = SymmetryKind::ReflectVartheta;
};

const char* symmetry_name(SymmetryKind k);
bool reverses_time(SymmetryKind k);
bool is_affine(SymmetryKind k);

// Raw right hand side in internal coordinates (r, vartheta, alpha).  Returns
// false outside the open quotient domain or on a non-finite value; never throws.
bool shifted_field(const SystemParams& p, const Vec3& y, Vec3& dy);

Derivative eval_field(const State& state, const SystemParams& params);

XyzDerivative eval_field_xyz(const XyzState& q, int n);
bool xyz_field(int n, const Vec3& q, Vec3& dq);

XyzState chart_transform(const State& state);
State chart_inverse(const XyzState& q);

// orbit volume of the point (r, theta)
double weight(double r, double theta, const SystemParams& params);
double unit_sphere_volume(int k);  // volume of the unit k-sphere

struct LogWeightGradient {
    double d_r = 0.0;
    double d_theta = 0.0;
};
LogWeightGradient log_weight_gradient(double r, double theta, const SystemParams& params);

// geodesic distance (orbital metric) of (r, theta) to the singular strata of the quotient
double boundary_distance(double r, double theta, const SystemParams& params);

struct Gauge {
    double u = 0.0;
    double v = 0.0;
};
Gauge boundary_gauge(double r, double theta);

// pointwise action; time reversal (where the map has it) is not applied here
State map_state(const State& s, SymmetryKind kind);

Trajectory apply_symmetry(const Trajectory& traj, SymmetryMap map);
inline Trajectory apply_symmetry(const Trajectory& traj, SymmetryKind kind) { return apply_symmetry(traj, SymmetryMap{kind}); }

// |dr/ds - cos a| + |sin r dtheta/ds - sin a| style defect of an interpolated derivative
double constraint_defect(const State& s, const Derivative& d);

}  // namespace eqmin
