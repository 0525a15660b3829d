#include "annihilator/function_model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "annihilator/quadrature.hpp"

namespace annihilator {

namespace {
constexpr double kTwoPi = 2.0 * std::numbers::pi;
}

FunctionSpec FunctionSpec::polynomial(std::vector<double> coeffs) {
    if (coeffs.empty()) throw std::invalid_argument("polynomial: empty coefficient list");
    return FunctionSpec(Impl{Polynomial{std::move(coeffs)}}, {});
}

FunctionSpec FunctionSpec::trigonometric(double constant, std::vector<std::pair<double, double>> pairs) {
    return FunctionSpec(Impl{Trigonometric{constant, std::move(pairs)}}, {});
}

FunctionSpec FunctionSpec::sampled(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("sampled: xs and ys must have equal length >= 2");
    if (xs.front() != 0.0 || xs.back() != 1.0)
        throw std::invalid_argument("sampled: xs must start at 0 and end at 1");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i] < xs[i + 1])) throw std::invalid_argument("sampled: xs not strictly increasing");
    std::vector<double> knots(xs.begin() + 1, xs.end() - 1);
    return FunctionSpec(Impl{Sampled{std::move(xs), std::move(ys)}}, std::move(knots));
}

FunctionSpec FunctionSpec::custom(std::function<double(double)> eval, std::vector<double> knots,
                                  std::string label) {
    if (!eval) throw std::invalid_argument("custom: null evaluator");
    std::sort(knots.begin(), knots.end());
    std::vector<double> ks = knots;
    return FunctionSpec(Impl{Custom{std::move(eval), std::move(knots), std::move(label)}},
                        std::move(ks));
}

double FunctionSpec::operator()(double x) const {
    if (x < 0.0 || x > 1.0) throw std::domain_error("FunctionSpec: x outside [0,1]");
    if (const Polynomial* p = as_polynomial()) {
        double v = 0.0;
        for (auto it = p->coeffs.rbegin(); it != p->coeffs.rend(); ++it) v = v * x + *it;
        return v;
    }
    if (const Trigonometric* t = as_trigonometric()) {
        double v = t->constant;
        for (std::size_t k = 0; k < t->pairs.size(); ++k) {
            const double arg = kTwoPi * static_cast<double>(k + 1) * x;
            v += t->pairs[k].first * std::cos(arg) + t->pairs[k].second * std::sin(arg);
        }
        return v;
    }
    if (const Sampled* s = as_sampled()) {
        const auto& xs = s->xs;
        if (x <= xs.front()) return s->ys.front();
        if (x >= xs.back()) return s->ys.back();
        const auto it = std::upper_bound(xs.begin(), xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
        const double t = (x - xs[i]) / (xs[i + 1] - xs[i]);
        return s->ys[i] + t * (s->ys[i + 1] - s->ys[i]);
    }
    return std::get<Custom>(impl_).eval(x);
}

double eval_function(const FunctionSpec& spec, double x) { return spec(x); }

Eigen::MatrixXd gram_matrix(const FunctionSet& fset, std::array<double, 2> interval,
                            const QuadratureOptions& quad) {
    const int n = fset.size();
    Eigen::MatrixXd G(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k <= j; ++k) {
            const FunctionSpec& fj = fset.entries[j];
            const FunctionSpec& fk = fset.entries[k];
            std::vector<double> knots = fj.knots();
            knots.insert(knots.end(), fk.knots().begin(), fk.knots().end());
            const double v = integrate_real([&fj, &fk](double x) { return fj(x) * fk(x); }, knots,
                                            interval, quad);
            G(j, k) = v;
            G(k, j) = v;
        }
    }
    return G;
}

RankResult numerical_rank(const Eigen::MatrixXd& M, double rel_tol) {
    RankResult r;
    if (M.rows() == 0) return r;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(M);
    const Eigen::VectorXd ev = es.eigenvalues(); // ascending
    const double lmax = std::max(0.0, ev(ev.size() - 1));
    const double thresh = rel_tol * lmax;
    for (int i = 0; i < ev.size(); ++i)
        if (ev(i) > thresh) ++r.rank;
    if (r.rank < M.rows()) {
        Eigen::VectorXd kern = es.eigenvectors().col(0);
        // Deterministic sign: first nonzero component positive.
        for (int i = 0; i < kern.size(); ++i) {
            if (kern(i) != 0.0) {
                if (kern(i) < 0.0) kern = -kern;
                break;
            }
        }
        r.kernel.assign(kern.data(), kern.data() + kern.size());
    }
    return r;
}

namespace {

bool deficient_on(const FunctionSet& fset, std::array<double, 2> sub, double rel_tol,
                  const QuadratureOptions& quad, std::vector<double>* kernel = nullptr) {
    const RankResult r = numerical_rank(gram_matrix(fset, sub, quad), rel_tol);
    if (kernel) *kernel = r.kernel;
    return r.rank < fset.size();
}

} // namespace

DependenceBounds dependence_bounds(const FunctionSet& fset, int scan_points, double rel_tol,
                                   const QuadratureOptions& quad) {
    if (scan_points < 3) throw std::invalid_argument("dependence_bounds: scan_points must be >= 3");
    const double a = fset.domain[0];
    const double b = fset.domain[1];
    auto grid = [&](int i) { return a + (b - a) * i / (scan_points - 1); };

    DependenceBounds out;
    out.L = a;
    out.R = b;

    // L: dependence on [a, x0] is monotone (shrinking the interval keeps any
    // kernel valid), so the deficient grid points form a prefix.
    int last_def = 0; // grid index; 0 stands for the empty interval
    for (int i = 1; i < scan_points; ++i) {
        if (deficient_on(fset, {a, grid(i)}, rel_tol, quad))
            last_def = i;
        else
            break;
    }
    if (last_def > 0) {
        double lo = grid(last_def);
        if (last_def + 1 < scan_points) {
            double hi = grid(last_def + 1);
            while (hi - lo > 1e-6) {
                const double mid = 0.5 * (lo + hi);
                if (deficient_on(fset, {a, mid}, rel_tol, quad))
                    lo = mid;
                else
                    hi = mid;
            }
        }
        out.L = lo;
    }

    // R mirrors L on [x0, b].
    int first_def = scan_points - 1;
    for (int i = scan_points - 2; i >= 0; --i) {
        if (deficient_on(fset, {grid(i), b}, rel_tol, quad))
            first_def = i;
        else
            break;
    }
    if (first_def < scan_points - 1) {
        double hi = grid(first_def);
        if (first_def - 1 >= 0) {
            double lo = grid(first_def - 1);
            while (hi - lo > 1e-6) {
                const double mid = 0.5 * (lo + hi);
                if (deficient_on(fset, {mid, b}, rel_tol, quad))
                    hi = mid;
                else
                    lo = mid;
            }
        }
        out.R = hi;
    }

    if (out.L >= out.R) {
        deficient_on(fset, {a, out.L}, rel_tol, quad, &out.left_kernel);
        deficient_on(fset, {out.R, b}, rel_tol, quad, &out.right_kernel);
    }
    return out;
}

std::vector<double> l1_norms(const FunctionSet& fset, const QuadratureOptions& quad) {
    std::vector<double> norms;
    norms.reserve(fset.entries.size());
    for (const FunctionSpec& f : fset.entries) norms.push_back(integrate_abs(f, fset.domain, quad));
    return norms;
}

} // namespace annihilator
