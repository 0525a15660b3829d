#pragma once

#include <cstdint>

#include "annihilator/function_model.hpp"
#include "annihilator/partition.hpp"
#include "annihilator/quadrature.hpp"

namespace annihilator {

struct PartitionSolveOptions {
    /// Residual tolerance, relative to max_j integral of |f_j|.
    double tol = 1e-9;
    int max_newton_iter = 60;
    int multistarts = 16;
    std::uint64_t seed = 0;
    /// Grid for the brute-force fallback; 0 picks the largest grid with
    /// grid_n^r within the enumeration budget.
    int brute_grid = 0;
    QuadratureOptions quad{};
};

/// Component j = sum_{m=1}^{r+1} (-1)^m * integral_{a_{m-1}}^{a_m} f_j, with
/// a_0 and a_{r+1} the interval endpoints.
std::vector<double> hr_residual(const FunctionSet& fset, const Partition& partition,
                                const QuadratureOptions& quad = {});

/// Finds r <= rank(fset) breakpoints with sup-norm residual below tolerance:
/// damped Newton (least squares when r < n) from uniform order-statistic
/// seeds, escalating r up to n, with brute_force_partition plus Newton
/// polish as the final fallback. Throws solver_error when nothing reaches
/// the tolerance.
Partition solve_partition(const FunctionSet& fset, const PartitionSolveOptions& opts = {});

/// Exhaustive search over increasing r-tuples on a uniform grid of grid_n
/// points across the domain (endpoints excluded); returns the residual-
/// minimizing tuple. Guard: grid_n^r must stay within 1e7 enumerations.
Partition brute_force_partition(const FunctionSet& fset, int r, int grid_n,
                                const QuadratureOptions& quad = {});

} // namespace annihilator
