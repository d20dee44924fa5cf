#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "eqmin/integrator.hpp"

namespace eqmin {

struct ShotClass {
    enum class Kind { Roof, Side, Corner, Undetermined };
    Kind kind = Kind::Undetermined;
    double tol = 0.0;     // Corner only
    std::string detail;   // exit name for Undetermined
};

const char* shot_kind_name(ShotClass::Kind k);

struct ShootingOptions {
    IntegratorOptions integ{};
    std::size_t scan_points = 64;
    double corner_tol = 1e-8;
};

// shot from (r0, pi/4, -pi/2) with roof and side events
Trajectory torus_shot(double r0, int n, const IntegratorOptions& opts = {});
ShotClass classify_torus_shot(double r0, int n, double corner_tol = 1e-8, const IntegratorOptions& opts = {});

struct CornerResult {
    double r0_star = 0.0;
    Trajectory quarter;
    double bracket_lo = 0.0;
    double bracket_hi = 0.0;
    std::size_t sign_changes = 0;  // over the coarse scan; > 1 means the first bracket was taken
    double defect = 0.0;           // distance of the exit to the corner
};

CornerResult find_torus_corner(int n, double tol, const ShootingOptions& opts = {});

struct ReturnReport {
    bool returned = false;
    double sigma = 0.0;
    double alpha_at_return = 0.0;
    bool has_s2 = false;
    double s2 = 0.0;
    double vartheta_max = 0.0;
    Trajectory traj;
};

// shot from (r0, vartheta = 0, alpha0) until the first return to vartheta = 0
ReturnReport first_return(double r0, double alpha0, int n, const IntegratorOptions& opts = {});

struct InftyFigure {
    double alpha_infty = 0.0;
    double r_infty = 0.0;
    std::array<Trajectory, 2> halves;  // blue shot and its central reflection
    double separatrix_alpha0 = 0.0;    // stage 1 result from r0 = 2pi/3
    double r1 = 0.0;                   // where the separatrix meets vartheta = 0, alpha = -pi/2
    Trajectory separatrix;
    CornerResult blue;                 // stage 2 bisection in r0
};

InftyFigure find_infty_figure(int n, double tol, const ShootingOptions& opts = {});

// Shots from the centre (pi/2, vartheta = 0, alpha0).  code = 2j + b where j
// counts the vartheta = 0 returns before alpha reaches +-pi/2, and b = 0 when
// the sign of alpha there is (-1)^j.  code < 0 when neither happened.
struct CentreShot {
    double alpha0 = 0.0;
    int code = -1;
    int returns = 0;
    Trajectory traj;

    bool determined() const { return code >= 0; }
};

CentreShot shoot_centre(double alpha0, int n, const IntegratorOptions& opts = {});

struct Rung {
    int k = 0;
    double alpha_hat = 0.0;
    double alpha_check = 0.0;
    int crossings_hat = 0;
    int crossings_check = 0;
    Trajectory hat;
    Trajectory check;
    bool hat_corner_stop = false;  // bisection stopped at the corner limit
};

struct IterationLadder {
    int n = 2;
    std::vector<Rung> rungs;
};

IterationLadder iteration_ladder(int n, int K, double tol, const ShootingOptions& opts = {});

// Appendix free-boundary arc: triple product, shots from (r0, pi/4, -pi/2)
CornerResult find_t4_corner(double tol, const ShootingOptions& opts = {});
Trajectory t4_shot(double r0, const IntegratorOptions& opts = {});

}  // namespace eqmin
