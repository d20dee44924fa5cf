#include "eqmin/trajectory.hpp"

#include <algorithm>

namespace eqmin {

Vec3 DenseStep::eval_tau(double tau) const {
    Vec3 y{};
    for (int i = 0; i < 3; ++i) {
        double acc = c[4][i];
        for (int k = 3; k >= 0; --k) acc = acc * tau + c[k][i];
        y[i] = acc;
    }
    return y;
}

Vec3 DenseStep::deriv(double s) const {
    const double tau = (s - s0) / h;
    Vec3 d{};
    for (int i = 0; i < 3; ++i) {
        double acc = 4.0 * c[4][i];
        acc = acc * tau + 3.0 * c[3][i];
        acc = acc * tau + 2.0 * c[2][i];
        acc = acc * tau + c[1][i];
        d[i] = acc / h;
    }
    return d;
}

DenseStep DenseStep::truncated(double tau_end) const {
    DenseStep out = *this;
    out.h = h * tau_end;
    double f = 1.0;
    for (int k = 0; k < 5; ++k) {
        for (int i = 0; i < 3; ++i) out.c[k][i] = c[k][i] * f;
        f *= tau_end;
    }
    return out;
}

DenseStep DenseStep::reversed() const {
    // p(1 - tau) expanded in powers of tau
    static constexpr double binom[5][5] = {
        {1, 0, 0, 0, 0}, {1, 1, 0, 0, 0}, {1, 2, 1, 0, 0}, {1, 3, 3, 1, 0}, {1, 4, 6, 4, 1}};
    DenseStep out = *this;
    for (int j = 0; j < 5; ++j) {
        for (int i = 0; i < 3; ++i) {
            double acc = 0.0;
            for (int k = j; k < 5; ++k) acc += c[k][i] * binom[k][j];
            out.c[j][i] = (j % 2 == 0) ? acc : -acc;
        }
    }
    return out;
}

const char* exit_kind_name(ExitKind k) {
    switch (k) {
        case ExitKind::Roof: return "Roof";
        case ExitKind::Side: return "Side";
        case ExitKind::VarthetaZero: return "VarthetaZero";
        case ExitKind::AppendixBoundary: return "AppendixBoundary";
        case ExitKind::BlowUp: return "BlowUp";
        case ExitKind::ThetaMin: return "ThetaMin";
        case ExitKind::StepLimit: return "StepLimit";
    }
    return "?";
}

std::size_t Trajectory::step_index(double s) const {
    auto it = std::upper_bound(dense.begin(), dense.end(), s,
                               [](double v, const DenseStep& d) { return v < d.s0; });
    if (it == dense.begin()) return 0;
    return static_cast<std::size_t>(std::distance(dense.begin(), it)) - 1;
}

Vec3 Trajectory::internal_at(double s) const {
    if (dense.empty()) return samples.front().y;
    s = std::clamp(s, 0.0, length());
    if (s <= 0.0) return samples.front().y;
    if (s >= length()) return samples.back().y;
    return dense[step_index(s)].eval(s);
}

Vec3 Trajectory::internal_deriv(double s) const {
    if (dense.empty()) return Vec3{};
    s = std::clamp(s, 0.0, length());
    return dense[step_index(s)].deriv(s);
}

std::size_t Trajectory::count_records(const std::string& name) const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [&](const EventRecord& e) { return e.name == name; }));
}

}  // namespace eqmin
