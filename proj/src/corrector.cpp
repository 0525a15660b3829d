#include "annihilator/corrector.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "annihilator/errors.hpp"

namespace annihilator {

namespace {

struct Slot {
    double lo = 0.0;
    double hi = 0.0;
    bool knot_lo = true; // slot edge sits on a step-phase knot
    bool knot_hi = true;
    double width() const { return hi - lo; }
};

// Segments of the step phase on one side, subdivided until there are at
// least n slots. Subdivision midpoints are not knots, so only original
// segment edges need the eps0 margin.
std::vector<Slot> side_slots(const std::vector<double>& knots, int n) {
    std::vector<Slot> slots;
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
        slots.push_back({knots[i], knots[i + 1], true, true});
    while (static_cast<int>(slots.size()) < n) {
        auto widest = std::max_element(slots.begin(), slots.end(),
                                       [](const Slot& a, const Slot& b) { return a.width() < b.width(); });
        const Slot s = *widest;
        const double mid = 0.5 * (s.lo + s.hi);
        *widest = {s.lo, mid, s.knot_lo, false};
        slots.insert(widest + 1, {mid, s.hi, false, s.knot_hi});
    }
    // Keep the n widest (stable order by position).
    std::vector<int> order(slots.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
    std::stable_sort(order.begin(), order.end(),
                     [&](int a, int b) { return slots[a].width() > slots[b].width(); });
    order.resize(n);
    std::sort(order.begin(), order.end());
    std::vector<Slot> out;
    for (int i : order) out.push_back(slots[i]);
    return out;
}

std::vector<Bump> place_bumps(const std::vector<Slot>& slots, double eps0) {
    std::vector<Bump> bumps;
    for (const Slot& s : slots) {
        const double lo = s.lo + (s.knot_lo ? eps0 : 0.0);
        const double hi = s.hi - (s.knot_hi ? eps0 : 0.0);
        if (!(hi > lo))
            throw basis_error("build_bump_basis: slot too narrow for the eps0 margin");
        bumps.push_back({0.5 * (lo + hi), 0.5 * (hi - lo), 1.0});
    }
    return bumps;
}

} // namespace

std::vector<std::complex<double>> F_vector(const FunctionSet& fset, const PhaseView& phase,
                                           const CorrectionBasis& basis, const std::vector<double>& u,
                                           const QuadratureOptions& quad) {
    const PhaseView v = make_view(phase, basis, u);
    return residual_vector(fset, &v, quad);
}

std::vector<double> Q_from_F(const std::vector<std::complex<double>>& F) {
    std::vector<double> q(2 * F.size());
    for (std::size_t j = 0; j < F.size(); ++j) {
        q[j] = F[j].imag();
        q[F.size() + j] = F[j].real();
    }
    return q;
}

std::vector<double> Q_vector(const FunctionSet& fset, const PhaseView& phase,
                             const CorrectionBasis& basis, const std::vector<double>& u,
                             const QuadratureOptions& quad) {
    return Q_from_F(F_vector(fset, phase, basis, u, quad));
}

Eigen::MatrixXd jacobian(const FunctionSet& fset, const PhaseView& phase, const CorrectionBasis& basis,
                         const std::vector<double>& u, const QuadratureOptions& quad) {
    const int n = fset.size();
    const int dim = static_cast<int>(basis.bumps.size());
    const PhaseView v = make_view(phase, basis, u);
    Eigen::MatrixXd J(2 * n, dim);
    const std::complex<double> iunit(0.0, 1.0);
    for (int k = 0; k < dim; ++k) {
        const Bump& h = basis.bumps[k];
        // The integrand carries the factor h_k, so only its support matters.
        const std::array<double, 2> support{h.center - h.half_width, h.center + h.half_width};
        for (int j = 0; j < n; ++j) {
            const FunctionSpec& f = fset.entries[j];
            std::vector<double> knots = f.knots();
            knots.insert(knots.end(), v.knots.begin(), v.knots.end());
            const auto& g = v.value;
            const std::complex<double> dF = integrate_complex(
                [&](double x) {
                    return iunit * f(x) * h.value(x) * std::exp(std::complex<double>(0.0, g(x)));
                },
                knots, support, quad);
            J(j, k) = dF.imag();     // d Im F^j / d u_k
            J(n + j, k) = dF.real(); // d Re F^j / d u_k
        }
    }
    return J;
}

CorrectionBasis build_bump_basis(const FunctionSet& fset, const StepPhase& step, double eps0,
                                 std::uint64_t seed, const QuadratureOptions& quad) {
    step.validate();
    const int n = fset.size();
    if (!(eps0 > 0.0) || !(eps0 < 0.5 * step.min_knot_gap()))
        throw std::invalid_argument("build_bump_basis: eps0 must lie in (0, half the minimum knot gap)");

    const auto split = std::find(step.knots.begin(), step.knots.end(), step.p);
    std::vector<double> left_knots(step.knots.begin(), split + 1);
    std::vector<double> right_knots(split, step.knots.end());

    const std::vector<Slot> left = side_slots(left_knots, n);
    const std::vector<Slot> right = side_slots(right_knots, n);

    std::mt19937_64 rng(seed ^ 0xb5297a4d2f769c1bULL);
    std::uniform_real_distribution<double> jitter(-1.0, 1.0);
    std::uniform_real_distribution<double> shrink(0.5, 1.0);

    CorrectionBasis basis;
    basis.eps0 = eps0;
    basis.p = step.p;
    basis.n_left = n;
    basis.u.assign(2 * n, 0.0);

    std::string last_failure;
    for (int attempt = 0; attempt < 32; ++attempt) {
        std::vector<Bump> bumps = place_bumps(left, eps0);
        {
            std::vector<Bump> br = place_bumps(right, eps0);
            bumps.insert(bumps.end(), br.begin(), br.end());
        }
        if (attempt > 0) {
            for (Bump& bmp : bumps) {
                const double hw0 = bmp.half_width;
                bmp.half_width = hw0 * shrink(rng);
                bmp.center += jitter(rng) * (hw0 - bmp.half_width);
            }
        }
        basis.bumps = bumps;

        const Eigen::MatrixXd J = jacobian(fset, make_view(step), basis, basis.u, quad);
        const double det = J.determinant();
        double row_norm_product = 1.0;
        bool zero_row = false;
        for (int i = 0; i < J.rows(); ++i) {
            const double rn = J.row(i).norm();
            if (rn == 0.0) zero_row = true;
            row_norm_product *= rn;
        }
        if (!zero_row && std::abs(det) >= 1e-10 * row_norm_product) return basis;

        std::ostringstream os;
        os << "attempt " << attempt << ": |det DQ0(0)| = " << std::abs(det)
           << " below threshold " << 1e-10 * row_norm_product;
        last_failure = os.str();
    }
    throw basis_error("build_bump_basis: all placements singular; the functions are dependent on one "
                      "side of p (" + last_failure + ")");
}

NewtonResult newton_correct(const FunctionSet& fset, const SmoothPhase& phase,
                            const CorrectionBasis& basis, double tol, int max_iter,
                            const QuadratureOptions& quad) {
    const PhaseView view = make_view(phase);
    const int dim = static_cast<int>(basis.bumps.size());

    NewtonResult result;
    result.u.assign(dim, 0.0);

    std::vector<double> q = Q_vector(fset, view, basis, result.u, quad);
    double norm = Eigen::Map<const Eigen::VectorXd>(q.data(), q.size()).norm();
    result.q_norms.push_back(norm);

    for (int iter = 0; iter < max_iter; ++iter) {
        if (norm < tol) {
            result.converged = true;
            return result;
        }
        const Eigen::MatrixXd J = jacobian(fset, view, basis, result.u, quad);
        const Eigen::FullPivLU<Eigen::MatrixXd> lu(J);
        if (!lu.isInvertible())
            throw corrector_error("newton_correct: singular Jacobian at iteration " +
                                      std::to_string(iter),
                                  norm);
        const Eigen::VectorXd step =
            lu.solve(-Eigen::Map<const Eigen::VectorXd>(q.data(), q.size()));

        bool accepted = false;
        for (double t = 1.0; t > 1e-6; t *= 0.5) {
            std::vector<double> trial = result.u;
            for (int m = 0; m < dim; ++m) trial[m] += t * step(m);
            const std::vector<double> tq = Q_vector(fset, view, basis, trial, quad);
            const double tnorm = Eigen::Map<const Eigen::VectorXd>(tq.data(), tq.size()).norm();
            if (tnorm < (1.0 - 1e-4 * t) * norm) {
                result.u = std::move(trial);
                q = tq;
                norm = tnorm;
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw corrector_error("newton_correct: line search stalled at ||Q|| = " +
                                      std::to_string(norm),
                                  norm);
        result.q_norms.push_back(norm);
        ++result.iterations;
    }
    if (norm < tol) {
        result.converged = true;
        return result;
    }
    throw corrector_error("newton_correct: no convergence after " + std::to_string(max_iter) +
                              " iterations (||Q|| = " + std::to_string(norm) + ")",
                          norm);
}

} // namespace annihilator
