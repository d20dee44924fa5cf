#pragma once

#include <array>
#include <cstddef>
#include <string>
#include <vector>

#include "eqmin/types.hpp"

namespace eqmin {

using Vec3 = std::array<double, 3>;

// Internal coordinates are (r, vartheta, alpha); keeping vartheta rather than
// theta lets the error control resolve small excursions off the bisector.
inline Vec3 to_internal(const State& s) { return {s.r, s.theta - quarter_pi, s.alpha}; }
inline State from_internal(const Vec3& y) { return make_shifted(y[0], y[1], y[2]); }

// One accepted step: y(s0 + tau*h) = sum_k c[k] tau^k, tau in [0, 1].
struct DenseStep {
    double s0 = 0.0;
    double h = 0.0;
    std::array<Vec3, 5> c{};

    double s1() const { return s0 + h; }
    Vec3 eval_tau(double tau) const;
    Vec3 eval(double s) const { return eval_tau((s - s0) / h); }
    Vec3 deriv(double s) const;  // d/ds
    // restrict to [s0, s0 + tau_end*h] and re-scale so tau runs over [0, 1] again
    DenseStep truncated(double tau_end) const;
    // tau -> 1 - tau
    DenseStep reversed() const;
};

enum class ExitKind { Roof, Side, VarthetaZero, AppendixBoundary, BlowUp, ThetaMin, StepLimit };

const char* exit_kind_name(ExitKind k);

struct ExitEvent {
    ExitKind kind = ExitKind::StepLimit;
    double s_exit = 0.0;
    State state_exit{};
    std::string name;  // which event function (or guard) fired
};

struct EventRecord {
    std::size_t index = 0;  // position in the EventSpec; guards use SIZE_MAX
    std::string name;
    double s = 0.0;
    State state{};
    bool terminal = false;
};

// y holds the internal coordinates the state was built from
struct Sample {
    double s = 0.0;
    State state{};
    Vec3 y{};

    static Sample from(double s, const Vec3& y) { return Sample{s, from_internal(y), y}; }
};

struct TrajectoryStats {
    std::size_t steps = 0;
    std::size_t rejected = 0;
    double max_constraint_residual = 0.0;
};

struct Trajectory {
    SystemParams params{};
    std::vector<Sample> samples;
    std::vector<DenseStep> dense;
    ExitEvent exit{};
    std::vector<EventRecord> records;
    TrajectoryStats stats{};

    double length() const { return samples.empty() ? 0.0 : samples.back().s; }
    bool empty() const { return samples.empty(); }
    const State& initial() const { return samples.front().state; }
    const State& final_state() const { return samples.back().state; }

    // dense-output queries, s clamped to [0, length()]
    Vec3 internal_at(double s) const;
    State at(double s) const { return from_internal(internal_at(s)); }
    Vec3 internal_deriv(double s) const;

    std::size_t step_index(double s) const;
    std::size_t count_records(const std::string& name) const;
};

}  // namespace eqmin
