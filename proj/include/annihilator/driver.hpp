#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "annihilator/corrector.hpp"
#include "annihilator/function_model.hpp"
#include "annihilator/hr_partition.hpp"
#include "annihilator/phase.hpp"
#include "annihilator/quadrature.hpp"

#include <nlohmann/json_fwd.hpp>

namespace annihilator {

struct SolveOptions {
    double residual_tol = 1e-8;
    QuadratureOptions quad{};
    int scan_points = 256;
    double rank_tol = 1e-8;
    int max_eps_halvings = 12;
    std::uint64_t seed = 0;
    /// Short-circuit to g == 0 when the residuals already vanish (off by
    /// default so that tests exercise the full pipeline).
    bool allow_trivial = false;
    PartitionSolveOptions partition{};
};

struct TraceNode {
    std::array<double, 2> interval{0.0, 1.0};
    int case_id = 1;     // 1: independent split at p; 2: dependent split at q
    double split = 0.5;  // p or q
    int n_effective = 0;
    int r_left = -1; // breakpoint counts (Case 1 only)
    int r_right = -1;
    double margin = 0.0; // R - L of the dependence scan
};

struct SolveReport {
    std::vector<std::complex<double>> residuals;
    double max_abs_residual = 0.0;
    double eps_final = 0.0;
    int newton_iters = 0;
    std::vector<TraceNode> recursion_trace;
    int r_left = -1;
    int r_right = -1;
    double wall_time_s = 0.0;
    bool passed = true;
    std::vector<std::string> failures;
};

/// Constructs a compactly supported smooth phase g with
/// max_j |integral f_j e^{ig}| < residual_tol: dependence scan, then either
/// the independent-split pipeline (partitions -> step phase -> mollify ->
/// bump-basis Newton correction with eps halving) or a dependent split with
/// recursion on spanning subsets of both sides. Throws solver_error when
/// every strategy is exhausted.
std::pair<SmoothPhase, SolveReport> solve_annihilating_phase(const FunctionSet& fset,
                                                             const SolveOptions& opts = {});

/// Recomputes the residuals on a 10x tighter quadrature and re-checks the
/// compact-support and derivative-continuity invariants.
SolveReport verify(const FunctionSet& fset, const SmoothPhase& phase, const SolveOptions& opts = {});

/// A complex-valued function as a (re, im) pair; a missing im means the
/// function is real.
struct ComplexFunction {
    FunctionSpec re;
    std::optional<FunctionSpec> im;
};

/// Splits complex entries into (Re_1, Im_1, ..., Re_n, Im_n); real entries
/// contribute a single component. Annihilating the realified set
/// annihilates the complex one.
FunctionSet realify(const std::vector<ComplexFunction>& funcs, std::array<double, 2> domain = {0.0, 1.0});

nlohmann::json report_to_json(const SolveReport& report);

} // namespace annihilator
