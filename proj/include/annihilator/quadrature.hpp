#pragma once

#include <array>
#include <complex>
#include <functional>
#include <vector>

#include "annihilator/function_model.hpp"
#include "annihilator/phase.hpp"

namespace annihilator {

struct QuadratureOptions {
    double abs_tol = 1e-10;
    int max_panel_depth = 30;
    int nodes_per_panel = 15; // Gauss-Legendre order
};

/// What the integrator needs from any phase: a value function plus the
/// structural knots at which integration panels must be split.
struct PhaseView {
    std::function<double(double)> value;
    std::vector<double> knots;
};

PhaseView make_view(const StepPhase& step);
PhaseView make_view(const SmoothPhase& phase);
/// Phase plus bump-basis perturbation: g(x) + sum_m u_m h_m(x).
PhaseView make_view(const PhaseView& base, const CorrectionBasis& basis, const std::vector<double>& u);

/// integral of f(x) e^{i g(x)} over [a,b], panels split at every knot of f
/// and of the phase; within each panel fixed-order Gauss-Legendre with
/// adaptive bisection. phase == nullptr means g == 0. Throws accuracy_error
/// when the tolerance cannot be met at max_panel_depth.
std::complex<double> integrate_product(const FunctionSpec& f, const PhaseView* phase,
                                       std::array<double, 2> interval,
                                       const QuadratureOptions& opts = {});

std::complex<double> integrate_product(const FunctionSpec& f, std::array<double, 2> interval,
                                       const QuadratureOptions& opts = {});
std::complex<double> integrate_product(const FunctionSpec& f, const SmoothPhase& phase,
                                       std::array<double, 2> interval,
                                       const QuadratureOptions& opts = {});
std::complex<double> integrate_product(const FunctionSpec& f, const StepPhase& phase,
                                       std::array<double, 2> interval,
                                       const QuadratureOptions& opts = {});

/// Component j = integrate_product(f_j, phase, fset.domain).
std::vector<std::complex<double>> residual_vector(const FunctionSet& fset, const PhaseView* phase,
                                                  const QuadratureOptions& opts = {});
std::vector<std::complex<double>> residual_vector(const FunctionSet& fset,
                                                  const QuadratureOptions& opts = {});
std::vector<std::complex<double>> residual_vector(const FunctionSet& fset, const SmoothPhase& phase,
                                                  const QuadratureOptions& opts = {});
std::vector<std::complex<double>> residual_vector(const FunctionSet& fset, const StepPhase& phase,
                                                  const QuadratureOptions& opts = {});

/// Adaptive integral of a real integrand with explicit panel knots.
double integrate_real(const std::function<double(double)>& f, const std::vector<double>& knots,
                      std::array<double, 2> interval, const QuadratureOptions& opts = {});

/// Adaptive integral of a complex integrand with explicit panel knots.
std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       const std::vector<double>& knots,
                                       std::array<double, 2> interval,
                                       const QuadratureOptions& opts = {});

/// integral of |f| (panels at the function's knots; kinks handled adaptively).
double integrate_abs(const FunctionSpec& f, std::array<double, 2> interval,
                     const QuadratureOptions& opts = {});

} // namespace annihilator
