#pragma once

#include <functional>
#include <string>
#include <vector>

#include "eqmin/dynamics.hpp"
#include "eqmin/trajectory.hpp"

namespace eqmin {

enum class Direction { Rising, Falling, Any };

struct EventFunction {
    std::string name;
    std::function<double(const State&)> f;
    Direction direction = Direction::Any;
    bool terminal = true;
    ExitKind kind = ExitKind::BlowUp;
    // the event is (re)armed only once |f| has exceeded this value at a step end
    double arm_above = 0.0;
};

struct EventSpec {
    std::vector<EventFunction> events;

    EventSpec& add(EventFunction e) {
        events.push_back(std::move(e));
        return *this;
    }
};

struct IntegratorOptions {
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
    double event_tol = 1e-11;
    double s_max = 100.0;
    double eps_bdry = 1e-9;
    double h_min = 1e-14;
    double h_max = 0.05;
};

// Shoots from `initial` until the first terminal event, a boundary guard
// (BlowUp), or s_max (StepLimit).
Trajectory integrate(const State& initial, const SystemParams& params, const EventSpec& events,
                     const IntegratorOptions& opts = {});

enum class RootMethod { Secant, Bisection };

// Root of f along one dense step restricted to [a, b].
double locate_event(const DenseStep& step, const std::function<double(const State&)>& f, Direction dir,
                    double a, double b, double tol = 1e-11, RootMethod method = RootMethod::Secant);
inline double locate_event(const DenseStep& step, const std::function<double(const State&)>& f, Direction dir,
                           double tol = 1e-11, RootMethod method = RootMethod::Secant) {
    return locate_event(step, f, dir, step.s0, step.s1(), tol, method);
}

// m states at equal arc-length spacing; endpoints are the stored first/last samples
std::vector<Sample> resample(const Trajectory& traj, std::size_t m);

// plain dense integration of the (x, y, z) chart up to s_end (no events)
struct XyzPath {
    std::vector<double> s;
    std::vector<Vec3> q;
    std::vector<DenseStep> dense;
    Vec3 at(double s) const;
};
XyzPath integrate_xyz(const XyzState& q0, int n, double s_end, const IntegratorOptions& opts = {});

// standard event functions used by the constructions
namespace events {
EventFunction roof();                       // alpha rising through 0
EventFunction side();                       // r rising through pi/2
EventFunction vartheta_zero(Direction dir, bool terminal, double arm_above);
EventFunction alpha_upper();                // alpha rising through +pi/2
EventFunction alpha_lower();                // alpha falling through -pi/2
EventFunction appendix_boundary();          // tan r cos theta rising through 1
EventFunction theta_min();                  // sin alpha rising through 0
EventFunction vartheta_level(double level);  // vartheta rising through level, non-terminal
EventFunction alpha_zero_falling();         // alpha falling through 0, non-terminal
}  // namespace events

}  // namespace eqmin
