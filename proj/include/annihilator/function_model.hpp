#pragma once

#include <array>
#include <functional>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace annihilator {

/// One evaluable real-valued integrable function on [0,1]. Closed-form kinds
/// (polynomial, trigonometric) have no interior structure; sampled functions
/// are piecewise linear with knots at the sample abscissae. The `custom`
/// kind wraps an arbitrary evaluator with an explicit knot list; it is used
/// internally (orthogonalization integrands, oracle fixtures) and cannot be
/// parsed from or serialized to problem files.
class FunctionSpec {
public:
    struct Polynomial {
        std::vector<double> coeffs; // ascending degree
    };
    struct Trigonometric {
        double constant = 0.0;
        std::vector<std::pair<double, double>> pairs; // (a_k, b_k): a_k cos(2 pi k x) + b_k sin(2 pi k x)
    };
    struct Sampled {
        std::vector<double> xs; // strictly increasing, xs.front() == 0, xs.back() == 1
        std::vector<double> ys;
    };
    struct Custom {
        std::function<double(double)> eval;
        std::vector<double> knots;
        std::string label;
    };

    static FunctionSpec polynomial(std::vector<double> coeffs);
    static FunctionSpec trigonometric(double constant, std::vector<std::pair<double, double>> pairs);
    static FunctionSpec sampled(std::vector<double> xs, std::vector<double> ys);
    static FunctionSpec custom(std::function<double(double)> eval, std::vector<double> knots,
                               std::string label = "custom");

    /// f(x); throws std::domain_error for x outside [0,1].
    double operator()(double x) const;

    /// Interior structural breakpoints (panel-alignment points).
    const std::vector<double>& knots() const { return knots_; }

    const Polynomial* as_polynomial() const { return std::get_if<Polynomial>(&impl_); }
    const Trigonometric* as_trigonometric() const { return std::get_if<Trigonometric>(&impl_); }
    const Sampled* as_sampled() const { return std::get_if<Sampled>(&impl_); }
    const Custom* as_custom() const { return std::get_if<Custom>(&impl_); }

private:
    using Impl = std::variant<Polynomial, Trigonometric, Sampled, Custom>;
    FunctionSpec(Impl impl, std::vector<double> knots)
        : impl_(std::move(impl)), knots_(std::move(knots)) {}
    Impl impl_;
    std::vector<double> knots_;
};

double eval_function(const FunctionSpec& spec, double x);

/// n evaluable functions on a common closed subinterval of [0,1].
struct FunctionSet {
    std::vector<FunctionSpec> entries;
    std::array<double, 2> domain{0.0, 1.0};

    int size() const { return static_cast<int>(entries.size()); }
    FunctionSet restricted(std::array<double, 2> sub) const { return {entries, sub}; }
};

struct QuadratureOptions; // quadrature.hpp

/// Gram matrix of the set on [a,b]: entry (j,k) = integral of f_j f_k.
/// Symmetric by construction (only the lower triangle is integrated).
Eigen::MatrixXd gram_matrix(const FunctionSet& fset, std::array<double, 2> interval,
                            const QuadratureOptions& quad);

struct RankResult {
    int rank = 0;
    /// Unit-norm eigenvector for the smallest eigenvalue when rank-deficient.
    std::vector<double> kernel;
};

/// Rank = number of eigenvalues above rel_tol times the largest eigenvalue.
RankResult numerical_rank(const Eigen::MatrixXd& M, double rel_tol);

/// L and R of the dependence scan: L is the largest point x0 such that the
/// family is (numerically) linearly dependent on [a, x0], R the smallest
/// such that it is dependent on [x0, b]. L < R selects Case 1 of the solve;
/// otherwise the kernels certify dependence on [a,L] and [R,b].
struct DependenceBounds {
    double L = 0.0;
    double R = 1.0;
    std::vector<double> left_kernel;
    std::vector<double> right_kernel;
};

DependenceBounds dependence_bounds(const FunctionSet& fset, int scan_points, double rel_tol,
                                   const QuadratureOptions& quad);

/// Integral of |f_j| over the set's domain, one entry per function.
std::vector<double> l1_norms(const FunctionSet& fset, const QuadratureOptions& quad);

} // namespace annihilator
