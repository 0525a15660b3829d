#include "annihilator/hr_partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include <Eigen/Dense>

#include "annihilator/errors.hpp"

namespace annihilator {

namespace {

double sup_norm(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

std::vector<double> residual_at(const FunctionSet& fset, const std::vector<double>& bps,
                                const QuadratureOptions& quad) {
    Partition part{fset.domain, bps};
    return hr_residual(fset, part, quad);
}

// Pointwise Jacobian entries: d res_j / d alpha_m = 2 (-1)^(m+1) f_j(alpha_m)
// for 1-based m (Leibniz rule on the two adjacent alternating integrals).
Eigen::MatrixXd hr_jacobian(const FunctionSet& fset, const std::vector<double>& bps) {
    const int n = fset.size();
    const int r = static_cast<int>(bps.size());
    Eigen::MatrixXd J(n, r);
    for (int m = 0; m < r; ++m) {
        const double sign = (m % 2 == 0) ? -2.0 : 2.0;
        for (int j = 0; j < n; ++j) J(j, m) = sign * fset.entries[j](bps[m]);
    }
    return J;
}

bool ordered_interior(const std::vector<double>& bps, double a, double b) {
    const double margin = 1e-9 * (b - a);
    double prev = a;
    for (double x : bps) {
        if (!(x > prev + margin)) return false;
        prev = x;
    }
    return bps.empty() || bps.back() < b - margin;
}

struct Candidate {
    std::vector<double> bps;
    double res_inf = std::numeric_limits<double>::infinity();

    bool better_than(const Candidate& other) const {
        if (res_inf != other.res_inf) return res_inf < other.res_inf;
        return bps < other.bps;
    }
};

// Damped Gauss-Newton from one seed, with a Levenberg ladder when the plain
// step makes no progress (columns of J vanish wherever all f_j do).
Candidate newton_polish(const FunctionSet& fset, std::vector<double> bps, double tol_abs,
                        const PartitionSolveOptions& opts) {
    const double a = fset.domain[0];
    const double b = fset.domain[1];
    Candidate cand;
    if (!ordered_interior(bps, a, b)) return cand;
    std::vector<double> res = residual_at(fset, bps, opts.quad);
    double norm2 = Eigen::Map<const Eigen::VectorXd>(res.data(), res.size()).norm();
    cand.bps = bps;
    cand.res_inf = sup_norm(res);

    for (int iter = 0; iter < opts.max_newton_iter; ++iter) {
        if (cand.res_inf < tol_abs) break;
        const Eigen::MatrixXd J = hr_jacobian(fset, bps);
        const Eigen::VectorXd r = Eigen::Map<const Eigen::VectorXd>(res.data(), res.size());
        const Eigen::MatrixXd JtJ = J.transpose() * J;
        const Eigen::VectorXd Jtr = J.transpose() * r;
        const double scale = std::max(JtJ.trace() / JtJ.rows(), 1e-300);

        bool accepted = false;
        for (double lambda : {0.0, 1e-8, 1e-4, 1e-2, 1.0, 1e2}) {
            Eigen::MatrixXd M = JtJ;
            M.diagonal().array() += lambda * scale;
            const Eigen::VectorXd step = M.ldlt().solve(-Jtr);
            if (!step.allFinite() || step.norm() == 0.0) continue;
            for (double t = 1.0; t > 1e-6; t *= 0.5) {
                std::vector<double> trial = bps;
                for (std::size_t m = 0; m < trial.size(); ++m) trial[m] += t * step(m);
                if (!ordered_interior(trial, a, b)) continue;
                const std::vector<double> tres = residual_at(fset, trial, opts.quad);
                const double tnorm =
                    Eigen::Map<const Eigen::VectorXd>(tres.data(), tres.size()).norm();
                if (tnorm < (1.0 - 1e-4 * t) * norm2) {
                    bps = std::move(trial);
                    res = tres;
                    norm2 = tnorm;
                    accepted = true;
                    break;
                }
            }
            if (accepted) break;
        }
        if (!accepted) break;
        const double ri = sup_norm(res);
        if (ri < cand.res_inf || (ri == cand.res_inf && bps < cand.bps)) {
            cand.bps = bps;
            cand.res_inf = ri;
        }
    }
    return cand;
}

// Inverse CDF of the combined |f_j| mass; maps uniform seeds into the
// regions where the functions actually live.
class MassQuantiles {
public:
    MassQuantiles(const FunctionSet& fset, const QuadratureOptions& quad) {
        const double a = fset.domain[0];
        const double b = fset.domain[1];
        const int cells = 512;
        grid_.resize(cells + 1);
        cum_.assign(cells + 1, 0.0);
        for (int i = 0; i <= cells; ++i) grid_[i] = a + (b - a) * i / cells;
        QuadratureOptions rough = quad;
        rough.abs_tol = std::max(quad.abs_tol, 1e-7);
        for (int i = 1; i <= cells; ++i) {
            double mass = 0.0;
            for (const FunctionSpec& f : fset.entries) {
                mass += integrate_real([&f](double x) { return std::abs(f(x)); }, f.knots(),
                                       {grid_[i - 1], grid_[i]}, rough);
            }
            cum_[i] = cum_[i - 1] + mass;
        }
        total_ = cum_.back();
    }

    bool usable() const { return total_ > 0.0; }

    double operator()(double q) const {
        const double target = q * total_;
        const auto it = std::upper_bound(cum_.begin(), cum_.end(), target);
        const std::size_t i = std::min<std::size_t>(cum_.size() - 1,
                                                    std::max<std::ptrdiff_t>(1, it - cum_.begin()));
        const double m0 = cum_[i - 1];
        const double m1 = cum_[i];
        const double t = m1 > m0 ? (target - m0) / (m1 - m0) : 0.5;
        return grid_[i - 1] + t * (grid_[i] - grid_[i - 1]);
    }

private:
    std::vector<double> grid_;
    std::vector<double> cum_;
    double total_ = 0.0;
};

} // namespace

std::vector<double> hr_residual(const FunctionSet& fset, const Partition& partition,
                                const QuadratureOptions& quad) {
    partition.validate();
    if (partition.interval != fset.domain)
        throw std::invalid_argument("hr_residual: partition interval differs from the set's domain");

    std::vector<double> edges{fset.domain[0]};
    edges.insert(edges.end(), partition.breakpoints.begin(), partition.breakpoints.end());
    edges.push_back(fset.domain[1]);

    const int n = fset.size();
    std::vector<double> res(n, 0.0);
    for (std::size_t m = 0; m + 1 < edges.size(); ++m) {
        const double sign = (m % 2 == 0) ? -1.0 : 1.0; // (-1)^m for 1-based m
        for (int j = 0; j < n; ++j) {
            const FunctionSpec& f = fset.entries[j];
            res[j] += sign * integrate_real([&f](double x) { return f(x); }, f.knots(),
                                            {edges[m], edges[m + 1]}, quad);
        }
    }
    return res;
}

Partition brute_force_partition(const FunctionSet& fset, int r, int grid_n,
                                const QuadratureOptions& quad) {
    if (r < 1) throw std::invalid_argument("brute_force_partition: r must be >= 1");
    if (grid_n < r + 2) throw std::invalid_argument("brute_force_partition: grid_n must be >= r+2");
    if (std::pow(static_cast<double>(grid_n), r) > 1e7)
        throw std::invalid_argument("brute_force_partition: enumeration budget exceeded (grid_n^r > 1e7)");

    const double a = fset.domain[0];
    const double b = fset.domain[1];
    const int n = fset.size();

    // Prefix integrals at all grid points; residuals become table lookups.
    std::vector<double> grid(grid_n);
    for (int i = 0; i < grid_n; ++i) grid[i] = a + (b - a) * i / (grid_n - 1);
    std::vector<std::vector<double>> prefix(n, std::vector<double>(grid_n, 0.0));
    for (int j = 0; j < n; ++j) {
        const FunctionSpec& f = fset.entries[j];
        for (int i = 1; i < grid_n; ++i) {
            prefix[j][i] = prefix[j][i - 1] + integrate_real([&f](double x) { return f(x); }, f.knots(),
                                                             {grid[i - 1], grid[i]}, quad);
        }
    }

    auto residual_inf = [&](const std::vector<int>& idx) {
        double worst = 0.0;
        for (int j = 0; j < n; ++j) {
            double s = 0.0;
            double sign = -1.0;
            double prev = 0.0;
            for (int m : idx) {
                s += sign * (prefix[j][m] - prev);
                prev = prefix[j][m];
                sign = -sign;
            }
            s += sign * (prefix[j][grid_n - 1] - prev);
            worst = std::max(worst, std::abs(s));
        }
        return worst;
    };

    // Odometer over strictly increasing interior index tuples.
    std::vector<int> idx(r);
    for (int m = 0; m < r; ++m) idx[m] = m + 1;
    std::vector<int> best = idx;
    double best_res = residual_inf(idx);
    while (true) {
        int m = r - 1;
        while (m >= 0 && idx[m] == grid_n - 2 - (r - 1 - m)) --m;
        if (m < 0) break;
        ++idx[m];
        for (int k = m + 1; k < r; ++k) idx[k] = idx[k - 1] + 1;
        const double res = residual_inf(idx);
        if (res < best_res) {
            best_res = res;
            best = idx;
        }
    }

    Partition part;
    part.interval = fset.domain;
    for (int m : best) part.breakpoints.push_back(grid[m]);
    return part;
}

Partition solve_partition(const FunctionSet& fset, const PartitionSolveOptions& opts) {
    if (fset.size() == 0) throw std::invalid_argument("solve_partition: empty function set");
    const double a = fset.domain[0];
    const double b = fset.domain[1];
    const int n = fset.size();

    const std::vector<double> l1 = l1_norms(fset, opts.quad);
    const double max_l1 = *std::max_element(l1.begin(), l1.end());
    if (max_l1 < 1e-14) return Partition{fset.domain, {}}; // all functions vanish
    const double tol_abs = opts.tol * max_l1;

    const RankResult rk = numerical_rank(gram_matrix(fset, fset.domain, opts.quad), 1e-8);
    const int r0 = std::max(1, rk.rank);

    const MassQuantiles quantile(fset, opts.quad);

    Candidate overall;
    for (int r = r0; r <= n; ++r) {
        std::mt19937_64 rng(opts.seed ^ (0x9e3779b97f4a7c15ULL * (r + 1)));
        std::uniform_real_distribution<double> unif01(0.0, 1.0);
        const int starts = opts.multistarts + 4 * r;

        Candidate best_r;
        for (int s = 0; s < starts; ++s) {
            std::vector<double> seed_bps(r);
            if (s == 0 && quantile.usable()) {
                // Equal-mass quantiles of the combined |f_j| distribution.
                for (int m = 0; m < r; ++m) seed_bps[m] = quantile((m + 1.0) / (r + 1.0));
            } else if (s <= 1) {
                for (int m = 0; m < r; ++m) seed_bps[m] = a + (b - a) * (m + 1.0) / (r + 1.0);
            } else {
                for (int m = 0; m < r; ++m) {
                    const double q = unif01(rng);
                    seed_bps[m] = quantile.usable() && s % 2 == 0 ? quantile(q) : a + (b - a) * q;
                }
                std::sort(seed_bps.begin(), seed_bps.end());
            }
            const Candidate cand = newton_polish(fset, seed_bps, tol_abs, opts);
            if (cand.bps.empty()) continue;
            if (cand.better_than(best_r)) best_r = cand;
            if (best_r.res_inf < 0.01 * tol_abs) break; // clearly converged
        }
        if (best_r.res_inf < tol_abs) return Partition{fset.domain, best_r.bps};
        if (best_r.better_than(overall)) overall = best_r;
    }

    // Brute-force fallback with Newton polish, escalating r.
    for (int r = r0; r <= n; ++r) {
        int grid_n = opts.brute_grid;
        if (grid_n <= 0) grid_n = std::max(r + 2, static_cast<int>(std::pow(1e7, 1.0 / r)));
        grid_n = std::min(grid_n, 401);
        const Partition coarse = brute_force_partition(fset, r, grid_n, opts.quad);
        const Candidate cand = newton_polish(fset, coarse.breakpoints, tol_abs, opts);
        if (cand.res_inf < tol_abs) return Partition{fset.domain, cand.bps};
        if (cand.better_than(overall)) overall = cand;
    }

    std::ostringstream os;
    os << "solve_partition: no partition below tolerance " << tol_abs << " (best residual "
       << overall.res_inf << " with r=" << overall.bps.size() << ")";
    throw solver_error(os.str(), overall.res_inf);
}

} // namespace annihilator
