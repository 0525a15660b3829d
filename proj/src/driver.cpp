#include "annihilator/driver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <sstream>

#include "annihilator/errors.hpp"

#include <nlohmann/json.hpp>

namespace annihilator {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

double max_abs(const std::vector<std::complex<double>>& v) {
    double m = 0.0;
    for (const auto& z : v) m = std::max(m, std::abs(z));
    return m;
}

/// Greedy pivoted-Cholesky selection of a well-conditioned spanning subset.
std::vector<int> spanning_subset(const Eigen::MatrixXd& G, int rank) {
    const int n = static_cast<int>(G.rows());
    Eigen::MatrixXd S = G;
    std::vector<int> selected;
    std::vector<bool> used(n, false);
    for (int step = 0; step < rank; ++step) {
        int pivot = -1;
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            if (!used[i] && S(i, i) > best) {
                best = S(i, i);
                pivot = i;
            }
        }
        if (pivot < 0) break;
        used[pivot] = true;
        selected.push_back(pivot);
        const Eigen::VectorXd col = S.col(pivot) / std::sqrt(S(pivot, pivot));
        S -= col * col.transpose();
    }
    std::sort(selected.begin(), selected.end());
    return selected;
}

/// Appends `tail` to `head` at the shared junction point; both vanish with
/// all derivatives there, so the concatenation stays smooth.
SmoothPhase concatenate(const SmoothPhase& head, const SmoothPhase& tail) {
    SmoothPhase g = head;
    g.segments.insert(g.segments.end(), tail.segments.begin(), tail.segments.end());
    // Merge the adjacent zero levels at the junction into one segment.
    for (std::size_t i = 0; i + 1 < g.segments.size(); ++i) {
        PhaseSegment& s = g.segments[i];
        PhaseSegment& nxt = g.segments[i + 1];
        if (s.kind == PhaseSegment::Kind::level && nxt.kind == PhaseSegment::Kind::level &&
            s.from == nxt.from && s.x1 == nxt.x0) {
            s.x1 = nxt.x1;
            g.segments.erase(g.segments.begin() + i + 1);
            --i;
        }
    }
    g.corrections.insert(g.corrections.end(), tail.corrections.begin(), tail.corrections.end());
    if (tail.epsilon > 0.0)
        g.epsilon = g.epsilon > 0.0 ? std::min(g.epsilon, tail.epsilon) : tail.epsilon;
    return g;
}

struct InnerStats {
    int newton_iters = 0;
    double eps_final = 0.0;
    std::vector<TraceNode> trace;
};

SmoothPhase solve_recursive(const FunctionSet& fset, const SolveOptions& opts, std::uint64_t seed,
                            int depth, int depth_budget, InnerStats& stats);

/// Theorem-2 pipeline on an interval where the family is independent on both
/// sides of p: partitions, step phase, mollify + Newton with eps halving.
SmoothPhase solve_case1(const FunctionSet& fset, const SolveOptions& opts, std::uint64_t seed,
                        double p, InnerStats& stats, TraceNode& node) {
    const double a = fset.domain[0];
    const double b = fset.domain[1];

    PartitionSolveOptions popts = opts.partition;
    popts.quad = opts.quad;
    popts.seed = splitmix64(seed ^ 0x1e57ULL);
    const Partition left = solve_partition(fset.restricted({a, p}), popts);
    popts.seed = splitmix64(seed ^ 0x2141ULL);
    const Partition right = solve_partition(fset.restricted({p, b}), popts);
    node.r_left = static_cast<int>(left.breakpoints.size());
    node.r_right = static_cast<int>(right.breakpoints.size());

    const StepPhase g0 = build_g0(left, right);

    const std::vector<double> l1 = l1_norms(fset, opts.quad);
    const double max_l1 = *std::max_element(l1.begin(), l1.end());
    const double newton_tol = 1e-9 * max_l1;

    double eps = g0.min_knot_gap() / 8.0;
    std::string last_error;
    for (int halving = 0; halving <= opts.max_eps_halvings; ++halving, eps *= 0.5) {
        SmoothPhase smooth = mollify(g0, eps);
        CorrectionBasis basis;
        basis = build_bump_basis(fset, g0, 2.0 * eps, splitmix64(seed ^ 0x3aULL), opts.quad);
        try {
            NewtonResult nr = newton_correct(fset, smooth, basis, newton_tol, 50, opts.quad);
            stats.newton_iters += nr.iterations;
            basis.u = nr.u;
            smooth.corrections.push_back(basis);

            // Independent re-verification on a tightened quadrature.
            QuadratureOptions tight = opts.quad;
            tight.abs_tol *= 0.1;
            const double residual = max_abs(residual_vector(fset, smooth, tight));
            if (residual < std::max(10.0 * newton_tol, opts.residual_tol)) {
                stats.eps_final = stats.eps_final > 0.0 ? std::min(stats.eps_final, eps) : eps;
                return smooth;
            }
            std::ostringstream os;
            os << "re-verification failed (residual " << residual << ")";
            last_error = os.str();
        } catch (const corrector_error& e) {
            last_error = e.what();
        }
    }
    throw solver_error("solve_annihilating_phase: eps halvings exhausted; last failure: " + last_error,
                       0.0);
}

/// Dependent split at q: recurse on spanning subsets of both sides and
/// concatenate. Every side must strictly reduce the effective rank.
SmoothPhase solve_case2(const FunctionSet& fset, const SolveOptions& opts, std::uint64_t seed,
                        double q, int depth, int depth_budget, InnerStats& stats) {
    const double a = fset.domain[0];
    const double b = fset.domain[1];
    const int n = fset.size();
    const double min_len = 1e-9 * (b - a);

    const std::array<std::array<double, 2>, 2> sides{{{a, q}, {q, b}}};
    std::vector<SmoothPhase> pieces;
    for (int s = 0; s < 2; ++s) {
        const auto side = sides[s];
        if (side[1] - side[0] < min_len) continue; // degenerate split (q at an endpoint)
        const FunctionSet sub = fset.restricted(side);
        const Eigen::MatrixXd G = gram_matrix(sub, side, opts.quad);
        const RankResult rk = numerical_rank(G, opts.rank_tol);
        if (rk.rank >= n)
            throw solver_error("solve_annihilating_phase: dependent split failed to reduce the rank "
                               "(pathological numerics near the rank threshold)",
                               0.0);
        if (rk.rank == 0) { // everything vanishes on this side
            pieces.push_back(SmoothPhase::zero(side));
            continue;
        }
        FunctionSet reduced;
        reduced.domain = side;
        for (int idx : spanning_subset(G, rk.rank)) reduced.entries.push_back(sub.entries[idx]);
        pieces.push_back(solve_recursive(reduced, opts, splitmix64(seed + s + 1), depth + 1,
                                         depth_budget, stats));
    }
    if (pieces.empty()) return SmoothPhase::zero({a, b});
    if (pieces.size() == 1) return pieces[0];
    return concatenate(pieces[0], pieces[1]);
}

SmoothPhase solve_recursive(const FunctionSet& fset, const SolveOptions& opts, std::uint64_t seed,
                            int depth, int depth_budget, InnerStats& stats) {
    const double a = fset.domain[0];
    const double b = fset.domain[1];
    if (depth > depth_budget)
        throw solver_error("solve_annihilating_phase: recursion failed to reduce the problem", 0.0);

    // Drop functions whose mass is negligible; they are annihilated by any
    // unimodular multiplier.
    const std::vector<double> l1 = l1_norms(fset, opts.quad);
    const double max_l1 = l1.empty() ? 0.0 : *std::max_element(l1.begin(), l1.end());
    const double drop_tol = std::min(opts.rank_tol * max_l1, opts.residual_tol);
    FunctionSet active;
    active.domain = fset.domain;
    for (std::size_t j = 0; j < fset.entries.size(); ++j)
        if (l1[j] >= drop_tol) active.entries.push_back(fset.entries[j]);
    if (active.entries.empty()) return SmoothPhase::zero({a, b});

    const DependenceBounds dep =
        dependence_bounds(active, opts.scan_points, opts.rank_tol, opts.quad);

    TraceNode node;
    node.interval = {a, b};
    node.n_effective = active.size();
    node.margin = dep.R - dep.L;

    if (dep.L < dep.R) {
        const double p = 0.5 * (dep.L + dep.R);
        node.case_id = 1;
        node.split = p;
        const std::size_t slot = stats.trace.size();
        stats.trace.push_back(node);
        try {
            SmoothPhase g = solve_case1(active, opts, seed, p, stats, stats.trace[slot]);
            return g;
        } catch (const basis_error&) {
            // The independence read was wrong on one side; fall back to a
            // dependent-style split at p.
            stats.trace[slot].case_id = 2;
            return solve_case2(active, opts, seed, p, depth, depth_budget, stats);
        }
    }

    const double q = std::clamp(0.5 * (dep.R + dep.L), dep.R, dep.L);
    node.case_id = 2;
    node.split = q;
    stats.trace.push_back(node);
    return solve_case2(active, opts, seed, q, depth, depth_budget, stats);
}

} // namespace

std::pair<SmoothPhase, SolveReport> solve_annihilating_phase(const FunctionSet& fset,
                                                             const SolveOptions& opts) {
    if (fset.size() < 1) throw std::invalid_argument("solve_annihilating_phase: need n >= 1");
    const auto t0 = std::chrono::steady_clock::now();

    SolveReport report;

    if (opts.allow_trivial) {
        const std::vector<std::complex<double>> r0 = residual_vector(fset, opts.quad);
        if (max_abs(r0) < opts.residual_tol) {
            SmoothPhase g = SmoothPhase::zero(fset.domain);
            report.residuals = r0;
            report.max_abs_residual = max_abs(r0);
            report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            return {g, report};
        }
    }

    InnerStats stats;
    SmoothPhase g = solve_recursive(fset, opts, splitmix64(opts.seed), 0, fset.size() + 1, stats);

    report.newton_iters = stats.newton_iters;
    report.eps_final = stats.eps_final;
    report.recursion_trace = stats.trace;
    if (!stats.trace.empty() && stats.trace.front().case_id == 1) {
        report.r_left = stats.trace.front().r_left;
        report.r_right = stats.trace.front().r_right;
    }

    QuadratureOptions tight = opts.quad;
    tight.abs_tol *= 0.1;
    report.residuals = residual_vector(fset, g, tight);
    report.max_abs_residual = max_abs(report.residuals);
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (report.max_abs_residual >= opts.residual_tol) {
        std::ostringstream os;
        os << "solve_annihilating_phase: final residual " << report.max_abs_residual
           << " above tolerance " << opts.residual_tol;
        throw solver_error(os.str(), report.max_abs_residual);
    }
    return {g, report};
}

SolveReport verify(const FunctionSet& fset, const SmoothPhase& phase, const SolveOptions& opts) {
    const auto t0 = std::chrono::steady_clock::now();
    SolveReport report;

    QuadratureOptions tight = opts.quad;
    tight.abs_tol *= 0.1;
    report.residuals = residual_vector(fset, phase, tight);
    report.max_abs_residual = max_abs(report.residuals);
    if (report.max_abs_residual >= opts.residual_tol) {
        std::ostringstream os;
        os << "residual " << report.max_abs_residual << " above tolerance " << opts.residual_tol;
        report.failures.push_back(os.str());
    }

    try {
        phase.validate();
    } catch (const std::exception& e) {
        report.failures.push_back(std::string("phase invariants: ") + e.what());
    }

    const auto dom = phase.domain();
    if (dom[0] > fset.domain[0] + 1e-12 || dom[1] < fset.domain[1] - 1e-12)
        report.failures.push_back("phase does not cover the function domain");
    if (phase.eval(dom[0], 0) != 0.0 || phase.eval(dom[1], 0) != 0.0)
        report.failures.push_back("phase does not vanish at the domain endpoints");

    const std::vector<std::string> smooth = check_smoothness(phase, 4, 1e-5);
    report.failures.insert(report.failures.end(), smooth.begin(), smooth.end());

    report.passed = report.failures.empty();
    report.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return report;
}

FunctionSet realify(const std::vector<ComplexFunction>& funcs, std::array<double, 2> domain) {
    FunctionSet out;
    out.domain = domain;
    for (const ComplexFunction& f : funcs) {
        out.entries.push_back(f.re);
        if (f.im) out.entries.push_back(*f.im);
    }
    return out;
}

nlohmann::json report_to_json(const SolveReport& report) {
    nlohmann::json j;
    j["residuals"] = nlohmann::json::array();
    for (const auto& z : report.residuals) j["residuals"].push_back({{"re", z.real()}, {"im", z.imag()}});
    j["max_abs_residual"] = report.max_abs_residual;
    j["eps_final"] = report.eps_final;
    j["newton_iters"] = report.newton_iters;
    j["r_left"] = report.r_left;
    j["r_right"] = report.r_right;
    j["wall_time_s"] = report.wall_time_s;
    j["passed"] = report.passed;
    j["failures"] = report.failures;
    j["recursion_trace"] = nlohmann::json::array();
    for (const TraceNode& t : report.recursion_trace) {
        j["recursion_trace"].push_back({{"interval", {t.interval[0], t.interval[1]}},
                                        {"case", t.case_id},
                                        {"split", t.split},
                                        {"n_effective", t.n_effective},
                                        {"r_left", t.r_left},
                                        {"r_right", t.r_right},
                                        {"margin", t.margin}});
    }
    return j;
}

} // namespace annihilator
