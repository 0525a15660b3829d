#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "annihilator/corrector.hpp"
#include "annihilator/errors.hpp"
#include "annihilator/hr_partition.hpp"
#include "oracles.hpp"

using namespace annihilator;

namespace {

constexpr double kPi = std::numbers::pi;

StepPhase four_level_example() {
    return build_g0({{0.0, 0.5}, {0.25}}, {{0.5, 1.0}, {0.75}});
}

FunctionSet one_fset() {
    FunctionSet fs;
    fs.entries.push_back(FunctionSpec::polynomial({1.0}));
    return fs;
}

FunctionSet pair_fset() {
    FunctionSet fs;
    fs.entries.push_back(FunctionSpec::polynomial({1.0}));
    fs.entries.push_back(FunctionSpec::polynomial({0.0, 1.0}));
    return fs;
}

} // namespace

TEST_CASE("Q_from_F ordering") {
    CHECK(Q_from_F({{0.0, 0.0}}) == std::vector<double>{0.0, 0.0});
    CHECK(Q_from_F({{0.0, 1.0}}) == std::vector<double>{1.0, 0.0}); // F = i -> (1, 0)
    CHECK(Q_from_F({{2.0, 0.0}}) == std::vector<double>{0.0, 2.0});
}

TEST_CASE("build_bump_basis for the n=1 example") {
    const FunctionSet fs = one_fset();
    const StepPhase g0 = four_level_example();
    const CorrectionBasis basis = build_bump_basis(fs, g0, 0.05, 1);
    REQUIRE(basis.bumps.size() == 2);
    CHECK(basis.n_left == 1);
    CHECK(basis.p == 0.5);
    // Left bump inside (0, 1/2) clear of knots, right bump inside (1/2, 1).
    CHECK(basis.bumps[0].center - basis.bumps[0].half_width >= 0.05 - 1e-12);
    CHECK(basis.bumps[0].center + basis.bumps[0].half_width <= 0.5 + 1e-12);
    CHECK(basis.bumps[1].center - basis.bumps[1].half_width >= 0.5 - 1e-12);

    // A_11 = integral f h1 e^{i g0} is nonzero: constant integrand sign.
    const Eigen::MatrixXd J = jacobian(fs, make_view(g0), basis, basis.u);
    CHECK(std::abs(J(0, 0)) > 1e-4);
    CHECK(std::abs(J(1, 1)) > 1e-4);
}

TEST_CASE("build_bump_basis fails for dependent functions") {
    FunctionSet dup;
    dup.entries.push_back(FunctionSpec::polynomial({1.0}));
    dup.entries.push_back(FunctionSpec::polynomial({2.0}));
    const StepPhase g0 = four_level_example();
    CHECK_THROWS_AS(build_bump_basis(dup, g0, 0.02, 1), basis_error);
}

TEST_CASE("DQ0(0) is block diagonal over the exact step phase") {
    const FunctionSet fs = pair_fset();
    PartitionSolveOptions popts;
    const Partition left = solve_partition(fs.restricted({0.0, 0.5}), popts);
    const Partition right = solve_partition(fs.restricted({0.5, 1.0}), popts);
    const StepPhase g0 = build_g0(left, right);
    const CorrectionBasis basis = build_bump_basis(fs, g0, g0.min_knot_gap() / 4.0, 3);

    QuadratureOptions quad;
    const Eigen::MatrixXd J = jacobian(fs, make_view(g0), basis, basis.u, quad);
    const int n = fs.size();
    for (int j = 0; j < n; ++j) {
        for (int k = 0; k < n; ++k) {
            CHECK(std::abs(J(n + j, k)) < 10.0 * quad.abs_tol);     // Re block, left bumps
            CHECK(std::abs(J(j, n + k)) < 10.0 * quad.abs_tol);     // Im block, right bumps
        }
    }
    // The A block is made of real integrals f_j h_k e^{i g0} with the
    // multiplier +-1; check one entry directly.
    const Bump& h0 = basis.bumps[0];
    const double a00 = integrate_real(
        [&](double x) {
            return fs.entries[0](x) * h0.value(x) *
                   std::cos(g0.value(x)); // e^{i g0} = cos on the left side
        },
        {}, {h0.center - h0.half_width, h0.center + h0.half_width}, quad);
    CHECK(J(0, 0) == doctest::Approx(a00).epsilon(1e-8));
}

TEST_CASE("F_vector at u = 0 equals the residual vector") {
    const FunctionSet fs = one_fset();
    const StepPhase g0 = four_level_example();
    const SmoothPhase ge = mollify(g0, 0.02);
    const CorrectionBasis basis = build_bump_basis(fs, g0, 0.04, 1);

    const auto F = F_vector(fs, make_view(ge), basis, std::vector<double>(2, 0.0));
    const auto r = residual_vector(fs, ge);
    CHECK(std::abs(F[0] - r[0]) < 1e-12);
}

TEST_CASE("F_vector ignores zero-amplitude bumps") {
    const FunctionSet fs = one_fset();
    const StepPhase g0 = four_level_example();
    CorrectionBasis basis = build_bump_basis(fs, g0, 0.04, 1);
    for (Bump& b : basis.bumps) b.amplitude = 0.0;
    const auto F1 = F_vector(fs, make_view(g0), basis, {0.0, 0.0});
    const auto F2 = F_vector(fs, make_view(g0), basis, {1.7, -2.3});
    CHECK(std::abs(F1[0] - F2[0]) < 1e-12);
}

TEST_CASE("Q0(0) vanishes over the exact step phase") {
    const FunctionSet fs = one_fset();
    const StepPhase g0 = four_level_example();
    const CorrectionBasis basis = build_bump_basis(fs, g0, 0.04, 1);
    const auto q = Q_vector(fs, make_view(g0), basis, {0.0, 0.0});
    for (double v : q) CHECK(std::abs(v) < 1e-10);
}

TEST_CASE("jacobian matches the finite-difference oracle") {
    const FunctionSet fs = pair_fset();
    const StepPhase g0 = build_g0({{0.0, 0.5}, {0.25}}, {{0.5, 1.0}, {0.75}});
    const SmoothPhase ge = mollify(g0, 0.02);
    const CorrectionBasis basis = build_bump_basis(fs, g0, 0.04, 5);
    const PhaseView view = make_view(ge);

    QuadratureOptions quad;
    auto Q = [&](const std::vector<double>& u) { return Q_vector(fs, view, basis, u, quad); };

    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> unif(-0.5, 0.5);
    std::vector<std::vector<double>> points{{0.0, 0.0, 0.0, 0.0}};
    for (int t = 0; t < 3; ++t) {
        std::vector<double> u(4);
        for (double& v : u) v = unif(rng);
        points.push_back(u);
    }
    for (const auto& u : points) {
        const Eigen::MatrixXd J = jacobian(fs, view, basis, u, quad);
        const auto fd = oracle::fd_jacobian(Q, u, 1e-5);
        for (int i = 0; i < J.rows(); ++i)
            for (int k = 0; k < J.cols(); ++k)
                CHECK(std::abs(J(i, k) - fd[i][k]) <
                      1e-5 * std::max(1.0, std::abs(fd[i][k])));
    }
}

TEST_CASE("jacobian of the zero function set is zero") {
    FunctionSet zero;
    zero.entries.push_back(FunctionSpec::polynomial({0.0}));
    const StepPhase g0 = four_level_example();
    const CorrectionBasis basis = build_bump_basis(one_fset(), g0, 0.04, 1);
    const Eigen::MatrixXd J = jacobian(zero, make_view(g0), basis, basis.u);
    CHECK(J.norm() < 1e-12);
}

TEST_CASE("newton_correct drives the n=1 example to zero") {
    const FunctionSet fs = one_fset();
    const StepPhase g0 = four_level_example();
    const SmoothPhase ge = mollify(g0, 0.02);
    const CorrectionBasis basis = build_bump_basis(fs, g0, 0.04, 1);

    const NewtonResult nr = newton_correct(fs, ge, basis, 1e-9, 50);
    CHECK(nr.converged);
    CHECK(nr.q_norms.back() < 1e-9);

    // Independent verification by a fine-grid Riemann sum.
    SmoothPhase corrected = ge;
    CorrectionBasis withu = basis;
    withu.u = nr.u;
    corrected.corrections.push_back(withu);
    const auto riemann = oracle::riemann_residual(fs, corrected, 1000000);
    CHECK(std::abs(riemann[0]) < 1e-5);
}

TEST_CASE("newton_correct is a no-op when the phase is already exact") {
    // A residual already below tolerance finishes in zero iterations.
    FunctionSet fs;
    fs.entries.push_back(FunctionSpec::polynomial({-0.5, 1.0})); // x - 1/2, residual 0 at g = 0
    const SmoothPhase zero = SmoothPhase::zero({0.0, 1.0});
    CorrectionBasis basis;
    basis.bumps = {Bump{0.2, 0.05, 1.0}, Bump{0.7, 0.05, 1.0}};
    basis.u = {0.0, 0.0};
    basis.eps0 = 0.1;
    basis.p = 0.5;
    basis.n_left = 1;
    const NewtonResult nr = newton_correct(fs, zero, basis, 1e-9, 50);
    CHECK(nr.converged);
    CHECK(nr.iterations == 0);
    for (double v : nr.u) CHECK(v == 0.0);
}

TEST_CASE("||Q_eps(0)|| decreases as eps shrinks") {
    const FunctionSet fs = one_fset();
    const StepPhase g0 = four_level_example();
    const CorrectionBasis basis = build_bump_basis(fs, g0, 0.085, 1);
    double prev = 1e300;
    for (double eps : {0.04, 0.02, 0.01}) {
        const auto q = Q_vector(fs, make_view(mollify(g0, eps)), basis, {0.0, 0.0});
        const double norm = std::hypot(q[0], q[1]);
        CHECK(norm < prev);
        prev = norm;
    }
}

TEST_CASE("decoupling: Q_eps(u) - Q0(u) does not depend on u") {
    const FunctionSet fs = pair_fset();
    const StepPhase g0 = build_g0({{0.0, 0.5}, {0.25}}, {{0.5, 1.0}, {0.75}});
    const double eps0 = 0.05;
    const CorrectionBasis basis = build_bump_basis(fs, g0, eps0, 7);
    const SmoothPhase ge = mollify(g0, 0.02); // eps < eps0

    QuadratureOptions quad;
    const PhaseView vstep = make_view(g0);
    const PhaseView vsmooth = make_view(ge);

    std::mt19937_64 rng(29);
    std::uniform_real_distribution<double> unif(-0.8, 0.8);
    std::vector<double> baseline;
    for (int trial = 0; trial < 5; ++trial) {
        std::vector<double> u(4);
        for (double& v : u) v = unif(rng);
        const auto qe = Q_vector(fs, vsmooth, basis, u, quad);
        const auto q0 = Q_vector(fs, vstep, basis, u, quad);
        std::vector<double> diff(qe.size());
        for (std::size_t i = 0; i < qe.size(); ++i) diff[i] = qe[i] - q0[i];
        if (trial == 0) {
            baseline = diff;
        } else {
            double dist = 0.0;
            for (std::size_t i = 0; i < diff.size(); ++i)
                dist += (diff[i] - baseline[i]) * (diff[i] - baseline[i]);
            CHECK(std::sqrt(dist) < 3.0 * quad.abs_tol);
        }
    }
}
