#include "annihilator/extensions.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "annihilator/errors.hpp"
#include "annihilator/quadrature.hpp"

namespace annihilator {

namespace {

double logistic(double x) { return 1.0 / (1.0 + std::exp(-x)); }
double unlogistic(double t) { return std::log(t / (1.0 - t)); }
/// 1 / (t (1-t)) evaluated stably through x = unlogistic(t).
double jacobian_weight(double x) { return std::exp(x) + 2.0 + std::exp(-x); }

std::uint64_t mix_seed(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    return x ^ (x >> 31);
}

} // namespace

RealLineFunction RealLineFunction::gaussian_poly(std::vector<double> coeffs, double mu, double sigma) {
    if (coeffs.empty()) throw std::invalid_argument("gaussian_poly: empty coefficient list");
    if (!(sigma > 0.0)) throw std::invalid_argument("gaussian_poly: sigma must be positive");
    return RealLineFunction(Impl{GaussianPoly{std::move(coeffs), mu, sigma}});
}

RealLineFunction RealLineFunction::compact_linear(std::vector<double> xs, std::vector<double> ys) {
    if (xs.size() != ys.size() || xs.size() < 2)
        throw std::invalid_argument("compact_linear: xs and ys must have equal length >= 2");
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i] < xs[i + 1]))
            throw std::invalid_argument("compact_linear: xs not strictly increasing");
    if (ys.front() != 0.0 || ys.back() != 0.0)
        throw std::invalid_argument("compact_linear: values must vanish at the support ends");
    return RealLineFunction(Impl{CompactLinear{std::move(xs), std::move(ys)}});
}

RealLineFunction RealLineFunction::custom(std::function<double(double)> eval) {
    if (!eval) throw std::invalid_argument("custom: null evaluator");
    return RealLineFunction(Impl{Custom{std::move(eval)}});
}

double RealLineFunction::operator()(double x) const {
    if (const GaussianPoly* g = std::get_if<GaussianPoly>(&impl_)) {
        double p = 0.0;
        for (auto it = g->coeffs.rbegin(); it != g->coeffs.rend(); ++it) p = p * x + *it;
        const double z = (x - g->mu) / g->sigma;
        return p * std::exp(-0.5 * z * z);
    }
    if (const CompactLinear* c = std::get_if<CompactLinear>(&impl_)) {
        if (x <= c->xs.front() || x >= c->xs.back()) return 0.0;
        const auto it = std::upper_bound(c->xs.begin(), c->xs.end(), x);
        const std::size_t i = static_cast<std::size_t>(it - c->xs.begin()) - 1;
        const double t = (x - c->xs[i]) / (c->xs[i + 1] - c->xs[i]);
        return c->ys[i] + t * (c->ys[i + 1] - c->ys[i]);
    }
    return std::get<Custom>(impl_).eval(x);
}

std::vector<double> RealLineFunction::knots_in(double lo, double hi) const {
    std::vector<double> out;
    if (const CompactLinear* c = std::get_if<CompactLinear>(&impl_)) {
        for (double x : c->xs)
            if (x > lo && x < hi) out.push_back(x);
    }
    return out;
}

double truncation_halfwidth(const RealLineFunction& f, const RealLineOptions& opts) {
    auto absf = [&f](double x) { return std::abs(f(x)); };
    double X = 1.0;
    double total = integrate_real(absf, f.knots_in(-X, X), {-X, X}, opts.quad);
    while (X < opts.x_max) {
        const double X2 = 2.0 * X;
        const double shell = integrate_real(absf, f.knots_in(X, X2), {X, X2}, opts.quad) +
                             integrate_real(absf, f.knots_in(-X2, -X), {-X2, -X}, opts.quad);
        total += shell;
        if (total > 0.0 && shell <= opts.tail_fraction * total) return X2;
        if (total == 0.0 && X >= 64.0) return X; // identically-zero input
        X = X2;
    }
    throw std::invalid_argument(
        "truncation_halfwidth: |f| mass does not converge (input not integrable?)");
}

double integrate_real_line(const std::function<double(double)>& f, const std::vector<double>& knots,
                           const RealLineOptions& opts) {
    auto absf = [&f](double x) { return std::abs(f(x)); };
    double X = 1.0;
    double total = integrate_real(absf, {}, {-X, X}, opts.quad);
    while (X < opts.x_max) {
        const double X2 = 2.0 * X;
        const double shell = integrate_real(absf, {}, {X, X2}, opts.quad) +
                             integrate_real(absf, {}, {-X2, -X}, opts.quad);
        total += shell;
        if (total > 0.0 && shell <= opts.tail_fraction * total) {
            X = X2;
            break;
        }
        if (total == 0.0 && X >= 64.0) return 0.0;
        X = X2;
    }
    if (X >= opts.x_max)
        throw std::invalid_argument("integrate_real_line: mass does not converge");
    std::vector<double> ks;
    for (double k : knots)
        if (k > -X && k < X) ks.push_back(k);
    return integrate_real(f, ks, {-X, X}, opts.quad);
}

FunctionSpec to_unit_interval(const RealLineFunction& f, const ToUnitOptions& opts) {
    const double X_mass = truncation_halfwidth(f, opts.line);

    auto absf = [&f](double x) { return std::abs(f(x)); };
    const double total = integrate_real(absf, f.knots_in(-X_mass, X_mass), {-X_mass, X_mass},
                                        opts.line.quad);
    if (total == 0.0) return FunctionSpec::sampled({0.0, 1.0}, {0.0, 0.0});

    // Beyond |x| ~ 34 the logistic image collides with the endpoints in
    // double precision; reject inputs whose mass lives out there.
    const double X = std::min(X_mass, 34.0);
    if (X < X_mass) {
        const double lost = integrate_real(absf, f.knots_in(X, X_mass), {X, X_mass}, opts.line.quad) +
                            integrate_real(absf, f.knots_in(-X_mass, -X), {-X_mass, -X}, opts.line.quad);
        if (lost > 10.0 * opts.line.tail_fraction * total)
            throw std::invalid_argument(
                "to_unit_interval: significant mass beyond the representable logistic range");
    }

    auto transformed = [&f](double t) { // f(x(t)) / (t(1-t))
        const double x = unlogistic(t);
        return f(x) * jacobian_weight(x);
    };

    int n = opts.init_points;
    for (;; n *= 2) {
        std::vector<double> xs{0.0};
        std::vector<double> ys{0.0};
        xs.reserve(n + 2);
        ys.reserve(n + 2);
        for (int i = 0; i < n; ++i) {
            const double x = -X + 2.0 * X * i / (n - 1);
            xs.push_back(logistic(x));
            ys.push_back(f(x) * jacobian_weight(x));
        }
        xs.push_back(1.0);
        ys.push_back(0.0);

        // Midpoint-deviation estimate of the piecewise-linear L1 error
        // (parabola model per panel: integral ~ 2/3 |deviation| * width).
        double err = 0.0;
        for (std::size_t i = 1; i + 2 < xs.size(); ++i) {
            const double tm = 0.5 * (xs[i] + xs[i + 1]);
            const double dev = transformed(tm) - 0.5 * (ys[i] + ys[i + 1]);
            err += (2.0 / 3.0) * std::abs(dev) * (xs[i + 1] - xs[i]);
        }
        if (err <= opts.target_l1_err || 2 * n > opts.max_points) {
            if (err > opts.target_l1_err)
                throw std::invalid_argument(
                    "to_unit_interval: sampled representation did not converge in L1 "
                    "(transformed function too rough)");
            return FunctionSpec::sampled(std::move(xs), std::move(ys));
        }
    }
}

std::function<double(double)> phase_pushforward(const SmoothPhase& g) {
    return [g](double x) { return g.eval(logistic(x), 0); };
}

RealLineFunction marginalize(const SeparableField& f, int axis, const RealLineOptions& opts) {
    if (f.factors.empty()) throw std::invalid_argument("marginalize: empty factor list");
    if (axis < 0 || axis >= static_cast<int>(f.factors.size()))
        throw std::invalid_argument("marginalize: axis out of range");
    double scale = 1.0;
    for (int d = 0; d < static_cast<int>(f.factors.size()); ++d) {
        if (d == axis) continue;
        const RealLineFunction& g = f.factors[d];
        scale *= integrate_real_line([&g](double x) { return g(x); }, g.knots_in(-1e308, 1e308), opts);
    }
    const RealLineFunction kept = f.factors[axis];
    if (scale == 1.0) return kept;
    return RealLineFunction::custom([kept, scale](double x) { return scale * kept(x); });
}

RealLineFunction marginalize(const GriddedField& f, int axis) {
    const int N = static_cast<int>(f.axes.size());
    if (N < 1 || N > 3) throw std::invalid_argument("marginalize: gridded fields support 1 <= N <= 3");
    if (axis < 0 || axis >= N) throw std::invalid_argument("marginalize: axis out of range");
    std::size_t expected = 1;
    for (const auto& ax : f.axes) {
        if (ax.size() < 2) throw std::invalid_argument("marginalize: each axis needs >= 2 points");
        expected *= ax.size();
    }
    if (f.values.size() != expected)
        throw std::invalid_argument("marginalize: value count does not match the grid");

    // Row-major strides.
    std::vector<std::size_t> stride(N, 1);
    for (int d = N - 2; d >= 0; --d) stride[d] = stride[d + 1] * f.axes[d + 1].size();

    // Trapezoid weights per axis.
    auto weights = [](const std::vector<double>& ax) {
        std::vector<double> w(ax.size(), 0.0);
        for (std::size_t i = 0; i + 1 < ax.size(); ++i) {
            const double h = ax[i + 1] - ax[i];
            w[i] += 0.5 * h;
            w[i + 1] += 0.5 * h;
        }
        return w;
    };

    const std::vector<double>& axis_pts = f.axes[axis];
    std::vector<double> marginal(axis_pts.size(), 0.0);
    std::vector<int> other;
    for (int d = 0; d < N; ++d)
        if (d != axis) other.push_back(d);
    std::vector<std::vector<double>> w(other.size());
    for (std::size_t d = 0; d < other.size(); ++d) w[d] = weights(f.axes[other[d]]);

    for (std::size_t i = 0; i < axis_pts.size(); ++i) {
        double sum = 0.0;
        if (other.empty()) {
            sum = f.values[i * stride[axis]];
        } else if (other.size() == 1) {
            for (std::size_t a = 0; a < f.axes[other[0]].size(); ++a)
                sum += w[0][a] * f.values[i * stride[axis] + a * stride[other[0]]];
        } else {
            for (std::size_t a = 0; a < f.axes[other[0]].size(); ++a)
                for (std::size_t b = 0; b < f.axes[other[1]].size(); ++b)
                    sum += w[0][a] * w[1][b] *
                           f.values[i * stride[axis] + a * stride[other[0]] + b * stride[other[1]]];
        }
        marginal[i] = sum;
    }

    // Force exact zeros at the support ends so the result is compactly
    // supported piecewise-linear.
    std::vector<double> xs = axis_pts;
    if (marginal.front() != 0.0 || marginal.back() != 0.0) {
        const double h0 = xs[1] - xs[0];
        const double h1 = xs[xs.size() - 1] - xs[xs.size() - 2];
        xs.insert(xs.begin(), xs.front() - h0);
        xs.push_back(xs.back() + h1);
        marginal.insert(marginal.begin(), 0.0);
        marginal.push_back(0.0);
    }
    return RealLineFunction::compact_linear(std::move(xs), std::move(marginal));
}

// ---------------------------------------------------------------------------
// Orthogonalization

namespace {

struct LevelIntegrand {
    // conj(a) * b * e^{i g_b}, optionally times the logistic pullback weight.
    std::function<std::complex<double>(double)> eval;
    std::vector<double> knots;
};

std::pair<std::vector<SmoothPhase>, OrthogonalizeReport> orthogonalize_core(
    int n, const std::function<LevelIntegrand(int, int, const SmoothPhase&)>& make_integrand,
    const SolveOptions& opts) {
    std::vector<SmoothPhase> phases(n, SmoothPhase::zero({0.0, 1.0}));
    OrthogonalizeReport report;

    for (int j = n - 2; j >= 0; --j) {
        FunctionSet family;
        family.domain = {0.0, 1.0};
        for (int k = j + 1; k < n; ++k) {
            const LevelIntegrand pk = make_integrand(j, k, phases[k]);
            auto ev = pk.eval;
            family.entries.push_back(FunctionSpec::custom(
                [ev](double t) { return ev(t).real(); }, pk.knots, "re"));
            family.entries.push_back(FunctionSpec::custom(
                [ev](double t) { return ev(t).imag(); }, pk.knots, "im"));
        }
        SolveOptions level_opts = opts;
        level_opts.seed = mix_seed(opts.seed + static_cast<std::uint64_t>(j));
        try {
            auto [h, rep] = solve_annihilating_phase(family, level_opts);
            phases[j] = h.negated();
            report.level_reports.push_back(std::move(rep));
        } catch (const solver_error& e) {
            throw solver_error("orthogonalize: level " + std::to_string(j) + " failed: " + e.what(),
                               e.best_residual());
        }
    }

    // Final pairwise check with the same integrands and the solved phases.
    report.inner_products = Eigen::MatrixXcd::Zero(n, n);
    for (int j = 0; j < n; ++j) {
        for (int k = j + 1; k < n; ++k) {
            const LevelIntegrand pk = make_integrand(j, k, phases[k]);
            const SmoothPhase& gj = phases[j];
            auto ev = pk.eval;
            std::vector<double> knots = pk.knots;
            const std::vector<double> gk = gj.knots();
            knots.insert(knots.end(), gk.begin(), gk.end());
            const std::complex<double> ip = integrate_complex(
                [ev, &gj](double t) {
                    return ev(t) * std::exp(std::complex<double>(0.0, -gj.eval(t, 0)));
                },
                knots, {0.0, 1.0}, opts.quad);
            report.inner_products(j, k) = ip;
            report.inner_products(k, j) = std::conj(ip);
            report.max_offdiag = std::max(report.max_offdiag, std::abs(ip));
        }
    }
    return {std::move(phases), std::move(report)};
}

} // namespace

std::pair<std::vector<SmoothPhase>, OrthogonalizeReport>
orthogonalize(const std::vector<ComplexFunction>& funcs, const SolveOptions& opts) {
    const int n = static_cast<int>(funcs.size());
    if (n < 1) throw std::invalid_argument("orthogonalize: need n >= 1");

    auto make_integrand = [&funcs](int j, int k, const SmoothPhase& gk) {
        const ComplexFunction& fj = funcs[j];
        const ComplexFunction& fk = funcs[k];
        LevelIntegrand li;
        li.knots = fj.re.knots();
        auto merge = [&li](const std::vector<double>& ks) {
            li.knots.insert(li.knots.end(), ks.begin(), ks.end());
        };
        if (fj.im) merge(fj.im->knots());
        merge(fk.re.knots());
        if (fk.im) merge(fk.im->knots());
        merge(gk.knots());
        li.eval = [fj, fk, gk](double t) {
            const std::complex<double> a(fj.re(t), fj.im ? (*fj.im)(t) : 0.0);
            const std::complex<double> b(fk.re(t), fk.im ? (*fk.im)(t) : 0.0);
            return std::conj(a) * b * std::exp(std::complex<double>(0.0, gk.eval(t, 0)));
        };
        return li;
    };

    return orthogonalize_core(n, make_integrand, opts);
}

std::pair<std::vector<SmoothPhase>, OrthogonalizeReport>
orthogonalize_real_line(const std::vector<ComplexRealLineFunction>& funcs, const SolveOptions& opts,
                        const RealLineOptions& ropts) {
    const int n = static_cast<int>(funcs.size());
    if (n < 1) throw std::invalid_argument("orthogonalize_real_line: need n >= 1");

    // Common truncation from every component's own mass profile.
    double X = 1.0;
    for (const ComplexRealLineFunction& f : funcs) {
        X = std::max(X, truncation_halfwidth(f.re, ropts));
        if (f.im) X = std::max(X, truncation_halfwidth(*f.im, ropts));
    }
    X = std::min(X, 34.0);
    const double t_lo = logistic(-X);
    const double t_hi = logistic(X);

    auto make_integrand = [&funcs, t_lo, t_hi](int j, int k, const SmoothPhase& gk) {
        const ComplexRealLineFunction& fj = funcs[j];
        const ComplexRealLineFunction& fk = funcs[k];
        LevelIntegrand li;
        li.knots = {t_lo, t_hi};
        const std::vector<double> gks = gk.knots();
        li.knots.insert(li.knots.end(), gks.begin(), gks.end());
        li.eval = [fj, fk, gk, t_lo, t_hi](double t) -> std::complex<double> {
            if (t <= t_lo || t >= t_hi) return {0.0, 0.0};
            const double x = unlogistic(t);
            const std::complex<double> a(fj.re(x), fj.im ? (*fj.im)(x) : 0.0);
            const std::complex<double> b(fk.re(x), fk.im ? (*fk.im)(x) : 0.0);
            return std::conj(a) * b * jacobian_weight(x) *
                   std::exp(std::complex<double>(0.0, gk.eval(t, 0)));
        };
        return li;
    };

    return orthogonalize_core(n, make_integrand, opts);
}

} // namespace annihilator
