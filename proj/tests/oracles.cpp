#include "oracles.hpp"

#include <cmath>
#include <stdexcept>

namespace annihilator::oracle {

std::vector<std::complex<double>> riemann_residual(const FunctionSet& fset,
                                                   const std::function<double(double)>& phase,
                                                   int points) {
    if (points < 10000) throw std::invalid_argument("riemann_residual: need at least 1e4 points");
    const double a = fset.domain[0];
    const double b = fset.domain[1];
    const double h = (b - a) / points;
    std::vector<std::complex<double>> out(fset.entries.size(), {0.0, 0.0});
    for (int i = 0; i < points; ++i) {
        const double x = a + (i + 0.5) * h;
        const double g = phase ? phase(x) : 0.0;
        const std::complex<double> e(std::cos(g), std::sin(g));
        for (std::size_t j = 0; j < fset.entries.size(); ++j) out[j] += fset.entries[j](x) * e;
    }
    for (auto& z : out) z *= h;
    return out;
}

std::vector<std::complex<double>> riemann_residual(const FunctionSet& fset, const SmoothPhase& phase,
                                                   int points) {
    return riemann_residual(
        fset, [&phase](double x) { return phase.eval(x, 0); }, points);
}

std::vector<std::vector<double>> fd_jacobian(
    const std::function<std::vector<double>(const std::vector<double>&)>& Q,
    const std::vector<double>& u, double h) {
    const std::size_t dim = u.size();
    std::vector<std::vector<double>> J;
    const std::vector<double> q0 = Q(u);
    J.assign(q0.size(), std::vector<double>(dim, 0.0));
    for (std::size_t k = 0; k < dim; ++k) {
        std::vector<double> up = u;
        std::vector<double> dn = u;
        up[k] += h;
        dn[k] -= h;
        const std::vector<double> qp = Q(up);
        const std::vector<double> qn = Q(dn);
        for (std::size_t i = 0; i < q0.size(); ++i) J[i][k] = (qp[i] - qn[i]) / (2.0 * h);
    }
    return J;
}

} // namespace annihilator::oracle
