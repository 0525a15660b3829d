#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "annihilator/errors.hpp"
#include "annihilator/quadrature.hpp"

using namespace annihilator;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("integrate_product without phase") {
    const FunctionSpec one = FunctionSpec::polynomial({1.0});
    const std::complex<double> I = integrate_product(one, {0.0, 1.0});
    CHECK(std::abs(I - std::complex<double>(1.0, 0.0)) < 1e-12);
}

TEST_CASE("integrate_product against a two-level step phase") {
    // g = pi on [0, 1/2), 0 on [1/2, 1]: the halves cancel.
    StepPhase step;
    step.knots = {0.0, 0.5, 1.0};
    step.levels = {kPi, 0.0};
    step.p = 0.5;
    const FunctionSpec one = FunctionSpec::polynomial({1.0});
    const std::complex<double> I = integrate_product(one, step, {0.0, 1.0});
    CHECK(std::abs(I) < 1e-12);
}

TEST_CASE("integrate_product against the analytic phase 2 pi x") {
    const PhaseView view{[](double x) { return 2.0 * kPi * x; }, {}};
    const FunctionSpec one = FunctionSpec::polynomial({1.0});
    const std::complex<double> I = integrate_product(one, &view, {0.0, 1.0});
    CHECK(std::abs(I) < 1e-12);
}

TEST_CASE("residual_vector trivial cases") {
    FunctionSet odd;
    odd.entries.push_back(FunctionSpec::polynomial({-0.5, 1.0})); // x - 1/2
    const auto r1 = residual_vector(odd);
    CHECK(std::abs(r1[0]) < 1e-12);

    FunctionSet pair;
    pair.entries.push_back(FunctionSpec::polynomial({1.0}));
    pair.entries.push_back(FunctionSpec::polynomial({0.0, 1.0}));
    const auto r2 = residual_vector(pair);
    CHECK(std::abs(r2[0] - 1.0) < 1e-12);
    CHECK(std::abs(r2[1] - 0.5) < 1e-12);
}

TEST_CASE("residual linearity") {
    QuadratureOptions quad;
    const FunctionSpec f1 = FunctionSpec::trigonometric(0.3, {{1.0, -0.5}});
    const FunctionSpec f2 = FunctionSpec::polynomial({0.1, -1.0, 2.0});
    const double alpha = 1.7, beta = -0.4;

    std::vector<double> combo_knots; // both closed-form: no knots
    const FunctionSpec combo = FunctionSpec::custom(
        [f1, f2, alpha, beta](double x) { return alpha * f1(x) + beta * f2(x); }, combo_knots);

    const PhaseView view{[](double x) { return std::sin(2.0 * kPi * x); }, {}};
    const std::complex<double> lhs = integrate_product(combo, &view, {0.0, 1.0}, quad);
    const std::complex<double> rhs = alpha * integrate_product(f1, &view, {0.0, 1.0}, quad) +
                                     beta * integrate_product(f2, &view, {0.0, 1.0}, quad);
    CHECK(std::abs(lhs - rhs) < 3.0 * quad.abs_tol);
}

TEST_CASE("unimodular multiplier bounds the integral by the L1 norm") {
    QuadratureOptions quad;
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 8; ++trial) {
        const FunctionSpec f =
            FunctionSpec::polynomial({unif(rng), unif(rng), unif(rng), unif(rng)});
        const double freq = 2.0 * kPi * (1 + trial);
        const PhaseView view{[freq](double x) { return std::cos(freq * x); }, {}};
        const std::complex<double> I = integrate_product(f, &view, {0.0, 1.0}, quad);
        const double l1 = integrate_abs(f, {0.0, 1.0}, quad);
        CHECK(std::abs(I) <= l1 + quad.abs_tol);
    }
}

TEST_CASE("panel alignment: extra knots do not change the result") {
    QuadratureOptions quad;
    const FunctionSpec f = FunctionSpec::sampled({0.0, 0.3, 0.7, 1.0}, {0.0, 1.0, -1.0, 0.0});
    const PhaseView plain{[](double x) { return 3.0 * x * x; }, {}};
    const PhaseView noisy{[](double x) { return 3.0 * x * x; },
                          {0.1, 0.2, 0.35, 0.41, 0.5, 0.55, 0.63, 0.8, 0.9, 0.95}};
    const std::complex<double> a = integrate_product(f, &plain, {0.0, 1.0}, quad);
    const std::complex<double> b = integrate_product(f, &noisy, {0.0, 1.0}, quad);
    CHECK(std::abs(a - b) < 3.0 * quad.abs_tol);
}

TEST_CASE("accuracy error carries the best estimate") {
    QuadratureOptions quad;
    quad.max_panel_depth = 4;
    // Non-integrable spike: refinement cannot meet the tolerance.
    const FunctionSpec bad = FunctionSpec::custom(
        [](double x) { return 1.0 / std::abs(x - 0.5 + 1e-300); }, {});
    CHECK_THROWS_AS(integrate_product(bad, {0.0, 1.0}, quad), accuracy_error);
    try {
        integrate_product(bad, {0.0, 1.0}, quad);
    } catch (const accuracy_error& e) {
        CHECK(e.error_bound() > quad.abs_tol);
        CHECK(std::abs(e.best_estimate()) > 0.0);
    }
}

TEST_CASE("empty interval is rejected") {
    const FunctionSpec one = FunctionSpec::polynomial({1.0});
    CHECK_THROWS_AS(integrate_product(one, {0.5, 0.5}), std::invalid_argument);
}
