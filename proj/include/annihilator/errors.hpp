#pragma once

#include <complex>
#include <stdexcept>
#include <string>
#include <utility>

namespace annihilator {

/// Adaptive quadrature could not reach the requested tolerance; carries the
/// best available estimate and its error bound.
class accuracy_error : public std::runtime_error {
public:
    accuracy_error(const std::string& what, std::complex<double> best, double bound)
        : std::runtime_error(what), best_(best), bound_(bound) {}

    std::complex<double> best_estimate() const noexcept { return best_; }
    double error_bound() const noexcept { return bound_; }

private:
    std::complex<double> best_;
    double bound_;
};

/// A nonlinear solve exhausted all of its strategies. Carries the residual
/// norm of the best candidate found.
class solver_error : public std::runtime_error {
public:
    solver_error(const std::string& what, double best_residual)
        : std::runtime_error(what), best_residual_(best_residual) {}

    double best_residual() const noexcept { return best_residual_; }

private:
    double best_residual_;
};

/// Every bump-basis placement attempt produced a singular DQ0(0). The input
/// family is (numerically) dependent on one side of the split point.
class basis_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Newton correction failed to converge for the current mollification width.
class corrector_error : public std::runtime_error {
public:
    corrector_error(const std::string& what, double best_norm)
        : std::runtime_error(what), best_norm_(best_norm) {}

    double best_q_norm() const noexcept { return best_norm_; }

private:
    double best_norm_;
};

/// Problem-file validation failure; names the JSON pointer of the bad field.
class schema_error : public std::runtime_error {
public:
    schema_error(std::string pointer, const std::string& message)
        : std::runtime_error(pointer + ": " + message), pointer_(std::move(pointer)) {}

    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

} // namespace annihilator
