#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "annihilator/partition.hpp"

#include <nlohmann/json_fwd.hpp>

namespace annihilator {

/// C-infinity flat step on [0,1]: psi(t) = B(t) / (B(t) + B(1-t)) with
/// B(t) = exp(-1/t) for t > 0, else 0. All one-sided derivatives vanish at
/// t = 0 and t = 1, so level/ramp concatenations are smooth with no matching
/// conditions.
double smooth_step(double t);

/// k-th derivative of smooth_step, 0 <= order <= 4.
double smooth_step_deriv(double t, int order);

/// Compactly supported C-infinity bump
///   h(x) = amplitude * exp(-1 / (1 - s^2)),  s = (x - center) / half_width,
/// for |s| < 1 and 0 outside.
struct Bump {
    double center = 0.5;
    double half_width = 0.1;
    double amplitude = 1.0;

    double value(double x) const;
    /// Derivative of the given order, 0 <= order <= 4.
    double deriv(double x, int order) const;
};

/// The 2n-bump correction basis together with its coefficient vector u.
/// Bumps 0..n_left-1 are supported left of p, the rest right of p; every
/// support keeps clear of the eps0-intervals around all step-phase knots.
struct CorrectionBasis {
    std::vector<Bump> bumps;
    double eps0 = 0.0;
    std::vector<double> u; // same length as bumps

    double p = 0.0;
    int n_left = 0;

    /// sum_m u_m h_m^(order)(x); uses the stored u when `coeffs` is null.
    double eval_sum(double x, int order = 0, const std::vector<double>* coeffs = nullptr) const;

    /// Support endpoints of every bump (panel-alignment knots).
    std::vector<double> support_knots() const;
};

/// Piecewise-constant four-level phase g0. knots.front()/back() are the
/// domain endpoints; level i applies on [knots[i], knots[i+1]) and the last
/// interval is closed. exp(i*g0) is +-1 left of p and +-i right of p.
struct StepPhase {
    std::vector<double> knots;
    std::vector<double> levels;
    double p = 0.5;

    double value(double x) const;
    std::array<double, 2> domain() const { return {knots.front(), knots.back()}; }
    double min_knot_gap() const;
    void validate() const;
};

/// Builds g0 from the two partitions: [alpha_m, alpha_{m+1}) gets pi for m
/// even and 0 for m odd; [beta_m, beta_{m+1}) gets 3pi/2 for m even and pi/2
/// for m odd (alpha_0 and beta_0 are the interval starts).
StepPhase build_g0(const Partition& left, const Partition& right);

struct PhaseSegment {
    enum class Kind { level, ramp };
    Kind kind = Kind::level;
    double from = 0.0; // for level segments from == to
    double to = 0.0;
    double x0 = 0.0;
    double x1 = 0.0;

    double eval(double x, int order) const;
};

/// Compactly supported represented-C-infinity phase: levels joined by
/// smooth_step ramps, plus optional bump-basis correction terms. Segments
/// tile the domain without gaps; first and last segments are zero levels.
class SmoothPhase {
public:
    std::vector<PhaseSegment> segments;
    std::vector<CorrectionBasis> corrections;
    double epsilon = 0.0;

    static SmoothPhase zero(std::array<double, 2> domain);

    std::array<double, 2> domain() const;
    double operator()(double x) const { return eval(x, 0); }
    double eval(double x, int order) const;

    /// Segment boundaries plus all bump support endpoints.
    std::vector<double> knots() const;

    /// The phase -g (negated levels, ramps and correction coefficients).
    SmoothPhase negated() const;

    void validate() const;

private:
    const PhaseSegment& segment_at(double x) const;
};

/// Replaces every jump of the step phase by a smooth_step ramp on
/// [knot - eps, knot + eps]; at the domain ends the outer level is reached
/// from 0 through a ramp of width eps inset by delta = eps/2, so the result
/// vanishes identically on neighborhoods of both endpoints. Requires eps <
/// half the minimum knot gap and enough room for the endpoint ramps; throws
/// std::invalid_argument otherwise. Values stay within [0, 2*pi).
SmoothPhase mollify(const StepPhase& step, double eps);

/// g and its derivatives (correction terms included), 0 <= order <= 4.
double eval_phase(const SmoothPhase& phase, double x, int order = 0);

/// One-sided derivative-continuity check across every segment boundary:
/// central finite differences of orders 1..max_order compared against the
/// analytic values, relative to the local derivative scale. Returns
/// human-readable failure descriptions (empty when smooth).
std::vector<std::string> check_smoothness(const SmoothPhase& phase, int max_order,
                                          double rel_tol);

nlohmann::json phase_to_json(const SmoothPhase& phase);
SmoothPhase phase_from_json(const nlohmann::json& j);

/// Dense sampling export: header "x,g,dg" and n uniform rows over the domain.
std::string phase_samples_csv(const SmoothPhase& phase, int n);

} // namespace annihilator
