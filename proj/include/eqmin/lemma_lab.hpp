#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "eqmin/integrator.hpp"

namespace eqmin {

inline constexpr double bound_slack = 1e-9;

// the grid point does not satisfy the hypotheses of the bound (e.g. no first return)
class PreconditionNotMet : public DomainError {
public:
    using DomainError::DomainError;
};

struct BoundCheck {
    std::string lemma_id;
    std::string inputs;  // "key=value;key=value"
    double bound_value = 0.0;
    double observed_value = 0.0;
    bool satisfied = false;
    double margin = 0.0;  // >= -slack when satisfied; the sign convention follows the inequality
};

// observed >= bound (lower) or observed <= bound (upper), with the slack
BoundCheck lower_bound_check(std::string id, std::string inputs, double bound, double observed);
BoundCheck upper_bound_check(std::string id, std::string inputs, double bound, double observed);

struct TurnProbe {
    enum class Outcome { Clockwise, Anticlockwise };
    int n = 2;
    double alpha0 = 0.0;
    Outcome outcome = Outcome::Clockwise;
    double theta_min = 0.0;
    double alpha_at_event = 0.0;  // unwrapped
    double s_event = 0.0;
};

const char* outcome_name(TurnProbe::Outcome o);

// c_n = 2 exp(pi/(4n-4) cot(1/(3n)))
double roof_constant(int n);
// delta = 1/(6n)
double dipping_delta(int n);
// level of vartheta at s1: (pi/2 - alpha0) alpha0 / (4n)
double first_arc_level(double alpha0, int n);
// max{1, (2n-1)/(2n-2) |cos r0|}
double return_ratio_bound(double r0, int n);

struct LabOptions {
    IntegratorOptions integ{};
    double sample_density = 1000.0;  // checks per unit arc length, on top of the stored samples
};

BoundCheck check_dipping_down(double r0, int n, const LabOptions& opts = {});
BoundCheck check_roof_bound(double r0, int n, const LabOptions& opts = {});
BoundCheck check_first_arc(double r0, double alpha0, int n, const LabOptions& opts = {});
// ratio |alpha(sigma)/alpha0|, height vartheta(s2), end slope, and monotone slope on [s2, sigma]
std::vector<BoundCheck> check_return_bounds(double r0, double alpha0, int n, const LabOptions& opts = {});

TurnProbe probe_turning(int n, double alpha0, const LabOptions& opts = {});

std::vector<double> linear_grid(double lo, double hi, std::size_t count);
std::vector<double> log_grid(double lo, double hi, std::size_t count);

// Which checks to run and on which points.  Empty lists mean nothing of that kind.
struct SweepSpec {
    std::vector<int> ns;
    std::vector<double> dipping_r0;
    std::vector<double> roof_r0;  // fractions of the admissible range (0, pi/2 / c_n)
    std::vector<double> arc_r0;
    std::vector<double> arc_alpha0;
    std::size_t arc_random = 0;  // extra random (r0, alpha0) pairs for the first arc
    std::vector<double> return_r0;
    std::vector<double> return_alpha0;
    std::vector<int> probe_ns;
    std::vector<double> probe_alpha0;
    std::uint64_t seed = 12345;
    LabOptions lab{};
};

SweepSpec default_sweep(const std::vector<int>& ns);
SweepSpec default_probe_sweep(const std::vector<int>& ns);

struct Report {
    std::vector<BoundCheck> checks;
    std::vector<TurnProbe> probes;
    std::vector<std::string> errors;   // numerical failures at individual grid points
    std::vector<std::string> skipped;  // grid points outside a lemma's hypotheses

    bool all_satisfied() const;
};

Report sweep(const SweepSpec& spec);

// header lemma_id,inputs,bound,observed,satisfied,margin ; probes appear as EVIDENCE rows
std::size_t write_report_csv(const Report& report, std::ostream& out);

}  // namespace eqmin
