#pragma once

#include <complex>
#include <functional>
#include <optional>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "annihilator/driver.hpp"
#include "annihilator/function_model.hpp"
#include "annihilator/phase.hpp"

namespace annihilator {

/// Integrable function on the real line. Closed-form kinds: polynomial with
/// a Gaussian envelope, and a compactly supported piecewise-linear profile
/// (this also serves as sampled data with compact support). The custom kind
/// wraps an arbitrary evaluator for library-internal use; its integrability
/// is validated numerically like everything else.
class RealLineFunction {
public:
    struct GaussianPoly {
        std::vector<double> coeffs; // ascending degree, evaluated at x (not x - mu)
        double mu = 0.0;
        double sigma = 1.0;
    };
    struct CompactLinear {
        std::vector<double> xs; // strictly increasing; ys vanish at both ends
        std::vector<double> ys;
    };
    struct Custom {
        std::function<double(double)> eval;
    };

    static RealLineFunction gaussian_poly(std::vector<double> coeffs, double mu, double sigma);
    static RealLineFunction compact_linear(std::vector<double> xs, std::vector<double> ys);
    static RealLineFunction custom(std::function<double(double)> eval);

    double operator()(double x) const;
    /// Structural breakpoints inside [lo, hi] (quadrature panel alignment).
    std::vector<double> knots_in(double lo, double hi) const;

    const GaussianPoly* as_gaussian_poly() const { return std::get_if<GaussianPoly>(&impl_); }
    const CompactLinear* as_compact_linear() const { return std::get_if<CompactLinear>(&impl_); }

private:
    using Impl = std::variant<GaussianPoly, CompactLinear, Custom>;
    explicit RealLineFunction(Impl impl) : impl_(std::move(impl)) {}
    Impl impl_;
};

struct RealLineOptions {
    /// Truncate the line integral where the remaining |f| mass falls below
    /// this fraction of the total.
    double tail_fraction = 1e-12;
    /// Hard cap on the truncation half-width; reaching it with significant
    /// tail mass left means the input is not integrable.
    double x_max = 1e4;
    QuadratureOptions quad{};
};

/// Truncated adaptive integral of f over the real line.
double integrate_real_line(const std::function<double(double)>& f, const std::vector<double>& knots,
                           const RealLineOptions& opts = {});

/// Half-width X such that the |f| mass outside [-X, X] is negligible.
/// Throws when the mass does not converge within the cap.
double truncation_halfwidth(const RealLineFunction& f, const RealLineOptions& opts = {});

struct ToUnitOptions {
    RealLineOptions line{};
    int init_points = 2001;
    int max_points = 1 << 18;
    /// Target L1 error of the piecewise-linear representation.
    double target_l1_err = 1e-7;
};

/// Pullback along x -> 1/(1 + e^{-x}): returns the sampled function
/// t -> f(ln(t/(1-t))) / (t(1-t)) on (0,1), on a grid clustered near the
/// endpoints (uniform in x), refined until the interpolation error estimate
/// is below target_l1_err. Integrals over the line equal integrals of the
/// result over [0,1].
FunctionSpec to_unit_interval(const RealLineFunction& f, const ToUnitOptions& opts = {});

/// x -> g(1/(1 + e^{-x})): smooth, bounded, and constant 0 outside a compact
/// x-range because g vanishes near 0 and 1.
std::function<double(double)> phase_pushforward(const SmoothPhase& g);

/// f(x_1,...,x_N) = product of per-axis factors.
struct SeparableField {
    std::vector<RealLineFunction> factors;
};

/// Values on a tensor grid (row-major over the axes), zero outside.
struct GriddedField {
    std::vector<std::vector<double>> axes;
    std::vector<double> values;
};

/// F(x_axis) = integral of f over all other coordinates: factor extraction
/// for separable fields, tensor trapezoid quadrature for gridded ones
/// (gridded supports N <= 3).
RealLineFunction marginalize(const SeparableField& f, int axis, const RealLineOptions& opts = {});
RealLineFunction marginalize(const GriddedField& f, int axis);

struct OrthogonalizeReport {
    Eigen::MatrixXcd inner_products; // <phi_j, phi_k> after orthogonalization
    double max_offdiag = 0.0;
    std::vector<SolveReport> level_reports; // innermost solves, highest level first
};

/// Cor.-3 sequence on [0,1]: g_n = 0, then for j = n-1 .. 1 annihilate the
/// family {conj(f_j) phi_k : k > j} and set g_j to the negated solution, so
/// phi_j = f_j e^{i g_j} are pairwise orthogonal with |phi_j| = |f_j|.
std::pair<std::vector<SmoothPhase>, OrthogonalizeReport>
orthogonalize(const std::vector<ComplexFunction>& funcs, const SolveOptions& opts = {});

struct ComplexRealLineFunction {
    RealLineFunction re;
    std::optional<RealLineFunction> im;
};

/// Same sequence for functions on the real line; the returned phases live on
/// (0,1) and act on the line through phase_pushforward.
std::pair<std::vector<SmoothPhase>, OrthogonalizeReport>
orthogonalize_real_line(const std::vector<ComplexRealLineFunction>& funcs,
                        const SolveOptions& opts = {}, const RealLineOptions& ropts = {});

} // namespace annihilator
