#include "annihilator/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "annihilator/errors.hpp"

namespace annihilator {

namespace {

struct GLRule {
    std::vector<double> x; // nodes on [-1, 1]
    std::vector<double> w;
};

// Nodes via Newton iteration on the Legendre recurrence.
GLRule compute_gl(int n) {
    GLRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    return rule;
}

const GLRule& gl_rule(int n) {
    static std::map<int, GLRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, compute_gl(n)).first;
    return it->second;
}

using CF = std::function<std::complex<double>(double)>;

std::complex<double> gl_sum(const CF& f, double a, double b, const GLRule& rule) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    std::complex<double> s = 0.0;
    for (std::size_t i = 0; i < rule.x.size(); ++i) s += rule.w[i] * f(mid + half * rule.x[i]);
    return half * s;
}

struct AdaptState {
    const CF& f;
    const GLRule& rule;
    int max_depth;
    double worst_shortfall = 0.0;
};

std::complex<double> adapt(AdaptState& st, double a, double b, double tol, int depth) {
    const std::complex<double> whole = gl_sum(st.f, a, b, st.rule);
    const double mid = 0.5 * (a + b);
    const std::complex<double> halves = gl_sum(st.f, a, mid, st.rule) + gl_sum(st.f, mid, b, st.rule);
    const double err = std::abs(halves - whole);
    if (err <= tol || !(std::isfinite(err))) {
        if (!std::isfinite(err)) st.worst_shortfall = std::max(st.worst_shortfall, 1.0);
        return halves;
    }
    if (depth >= st.max_depth) {
        st.worst_shortfall += err;
        return halves;
    }
    return adapt(st, a, mid, 0.5 * tol, depth + 1) + adapt(st, mid, b, 0.5 * tol, depth + 1);
}

// Panel boundaries: interval endpoints plus all interior knots, deduplicated.
std::vector<double> panel_edges(std::array<double, 2> interval, const std::vector<double>* k1,
                                const std::vector<double>* k2) {
    std::vector<double> edges{interval[0], interval[1]};
    const double len = interval[1] - interval[0];
    auto add = [&](const std::vector<double>& ks) {
        for (double k : ks)
            if (k > interval[0] && k < interval[1]) edges.push_back(k);
    };
    if (k1) add(*k1);
    if (k2) add(*k2);
    std::sort(edges.begin(), edges.end());
    std::vector<double> out;
    for (double e : edges)
        if (out.empty() || e - out.back() > 1e-14 * len) out.push_back(e);
    out.back() = interval[1];
    return out;
}

std::complex<double> integrate_panels(const CF& f, const std::vector<double>& edges,
                                      const QuadratureOptions& opts, const char* what) {
    if (!(opts.abs_tol > 0.0)) throw std::invalid_argument("QuadratureOptions: abs_tol must be positive");
    if (opts.nodes_per_panel < 2)
        throw std::invalid_argument("QuadratureOptions: nodes_per_panel must be >= 2");
    const GLRule& rule = gl_rule(opts.nodes_per_panel);
    const double total = edges.back() - edges.front();
    AdaptState st{f, rule, opts.max_panel_depth, 0.0};
    std::complex<double> sum = 0.0;
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
        const double tol = opts.abs_tol * (edges[i + 1] - edges[i]) / total;
        sum += adapt(st, edges[i], edges[i + 1], tol, 0);
    }
    if (st.worst_shortfall > 0.0) {
        std::ostringstream os;
        os << what << ": tolerance " << opts.abs_tol << " not met at max panel depth (shortfall "
           << st.worst_shortfall << ")";
        throw accuracy_error(os.str(), sum, opts.abs_tol + st.worst_shortfall);
    }
    return sum;
}

} // namespace

PhaseView make_view(const StepPhase& step) {
    return {[step](double x) { return step.value(x); }, step.knots};
}

PhaseView make_view(const SmoothPhase& phase) {
    return {[phase](double x) { return phase.eval(x, 0); }, phase.knots()};
}

PhaseView make_view(const PhaseView& base, const CorrectionBasis& basis, const std::vector<double>& u) {
    PhaseView v;
    v.knots = base.knots;
    const std::vector<double> sk = basis.support_knots();
    v.knots.insert(v.knots.end(), sk.begin(), sk.end());
    std::sort(v.knots.begin(), v.knots.end());
    auto g = base.value;
    v.value = [g, basis, u](double x) { return g(x) + basis.eval_sum(x, 0, &u); };
    return v;
}

std::complex<double> integrate_product(const FunctionSpec& f, const PhaseView* phase,
                                       std::array<double, 2> interval, const QuadratureOptions& opts) {
    if (!(interval[0] < interval[1]))
        throw std::invalid_argument("integrate_product: empty interval");
    const std::vector<double> edges =
        panel_edges(interval, &f.knots(), phase ? &phase->knots : nullptr);
    if (!phase) {
        CF integrand = [&f](double x) { return std::complex<double>(f(x), 0.0); };
        return integrate_panels(integrand, edges, opts, "integrate_product");
    }
    const auto& g = phase->value;
    CF integrand = [&f, &g](double x) {
        return f(x) * std::exp(std::complex<double>(0.0, g(x)));
    };
    return integrate_panels(integrand, edges, opts, "integrate_product");
}

std::complex<double> integrate_product(const FunctionSpec& f, std::array<double, 2> interval,
                                       const QuadratureOptions& opts) {
    return integrate_product(f, nullptr, interval, opts);
}

std::complex<double> integrate_product(const FunctionSpec& f, const SmoothPhase& phase,
                                       std::array<double, 2> interval, const QuadratureOptions& opts) {
    const PhaseView v = make_view(phase);
    return integrate_product(f, &v, interval, opts);
}

std::complex<double> integrate_product(const FunctionSpec& f, const StepPhase& phase,
                                       std::array<double, 2> interval, const QuadratureOptions& opts) {
    const PhaseView v = make_view(phase);
    return integrate_product(f, &v, interval, opts);
}

std::vector<std::complex<double>> residual_vector(const FunctionSet& fset, const PhaseView* phase,
                                                  const QuadratureOptions& opts) {
    std::vector<std::complex<double>> r;
    r.reserve(fset.entries.size());
    for (const FunctionSpec& f : fset.entries) r.push_back(integrate_product(f, phase, fset.domain, opts));
    return r;
}

std::vector<std::complex<double>> residual_vector(const FunctionSet& fset, const QuadratureOptions& opts) {
    return residual_vector(fset, nullptr, opts);
}

std::vector<std::complex<double>> residual_vector(const FunctionSet& fset, const SmoothPhase& phase,
                                                  const QuadratureOptions& opts) {
    const PhaseView v = make_view(phase);
    return residual_vector(fset, &v, opts);
}

std::vector<std::complex<double>> residual_vector(const FunctionSet& fset, const StepPhase& phase,
                                                  const QuadratureOptions& opts) {
    const PhaseView v = make_view(phase);
    return residual_vector(fset, &v, opts);
}

double integrate_real(const std::function<double(double)>& f, const std::vector<double>& knots,
                      std::array<double, 2> interval, const QuadratureOptions& opts) {
    if (!(interval[0] < interval[1])) throw std::invalid_argument("integrate_real: empty interval");
    const std::vector<double> edges = panel_edges(interval, &knots, nullptr);
    CF integrand = [&f](double x) { return std::complex<double>(f(x), 0.0); };
    return integrate_panels(integrand, edges, opts, "integrate_real").real();
}

std::complex<double> integrate_complex(const std::function<std::complex<double>(double)>& f,
                                       const std::vector<double>& knots,
                                       std::array<double, 2> interval, const QuadratureOptions& opts) {
    if (!(interval[0] < interval[1])) throw std::invalid_argument("integrate_complex: empty interval");
    const std::vector<double> edges = panel_edges(interval, &knots, nullptr);
    return integrate_panels(f, edges, opts, "integrate_complex");
}

double integrate_abs(const FunctionSpec& f, std::array<double, 2> interval,
                     const QuadratureOptions& opts) {
    return integrate_real([&f](double x) { return std::abs(f(x)); }, f.knots(), interval, opts);
}

} // namespace annihilator
