#pragma once

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "annihilator/function_model.hpp"
#include "annihilator/phase.hpp"
#include "annihilator/quadrature.hpp"

namespace annihilator {

/// Places n bumps per side of the step phase's split point, at midpoints of
/// the constant segments (subdividing the widest segments when a side has
/// fewer segments than n), with supports clear of eps0-intervals around all
/// knots. Verifies det DQ0(0) != 0 against the un-mollified step phase; on a
/// singular determinant the placement is jittered deterministically (up to
/// 32 attempts) before basis_error is thrown.
CorrectionBasis build_bump_basis(const FunctionSet& fset, const StepPhase& step, double eps0,
                                 std::uint64_t seed, const QuadratureOptions& quad = {});

/// F^j(u) = integral of f_j exp(i (g + sum_m u_m h_m)).
std::vector<std::complex<double>> F_vector(const FunctionSet& fset, const PhaseView& phase,
                                           const CorrectionBasis& basis, const std::vector<double>& u,
                                           const QuadratureOptions& quad = {});

/// Layout (Im F^1..Im F^n, Re F^1..Re F^n).
std::vector<double> Q_from_F(const std::vector<std::complex<double>>& F);

std::vector<double> Q_vector(const FunctionSet& fset, const PhaseView& phase,
                             const CorrectionBasis& basis, const std::vector<double>& u,
                             const QuadratureOptions& quad = {});

/// Analytic Jacobian of Q: column k from dF^j/du_k = i * integral of
/// f_j h_k exp(i(g + sum u_m h_m)), rows arranged to match Q_vector.
Eigen::MatrixXd jacobian(const FunctionSet& fset, const PhaseView& phase, const CorrectionBasis& basis,
                         const std::vector<double>& u, const QuadratureOptions& quad = {});

struct NewtonResult {
    std::vector<double> u;
    std::vector<double> q_norms; // per-iteration ||Q||_2, starting at u = 0
    int iterations = 0;
    bool converged = false;
};

/// Damped Newton with backtracking line search on ||Q||_2 from u = 0.
/// Throws corrector_error when max_iter is exhausted without reaching tol.
NewtonResult newton_correct(const FunctionSet& fset, const SmoothPhase& phase,
                            const CorrectionBasis& basis, double tol, int max_iter,
                            const QuadratureOptions& quad = {});

} // namespace annihilator
