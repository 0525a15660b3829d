#include <doctest.h>

#include <cmath>
#include <random>

#include "annihilator/errors.hpp"
#include "annihilator/hr_partition.hpp"

using namespace annihilator;

namespace {

FunctionSet make_set(std::vector<FunctionSpec> specs) {
    FunctionSet s;
    s.entries = std::move(specs);
    return s;
}

const FunctionSpec kOne = FunctionSpec::polynomial({1.0});
const FunctionSpec kX = FunctionSpec::polynomial({0.0, 1.0});

} // namespace

TEST_CASE("hr_residual closed forms") {
    const FunctionSet one = make_set({kOne});
    CHECK(std::abs(hr_residual(one, {{0.0, 1.0}, {0.5}})[0]) < 1e-12);
    CHECK(hr_residual(one, {{0.0, 1.0}, {1.0 / 3.0}})[0] ==
          doctest::Approx(1.0 / 3.0).epsilon(1e-10));

    const FunctionSet pair = make_set({kOne, kX});
    const auto r = hr_residual(pair, {{0.0, 1.0}, {0.25, 0.75}});
    CHECK(std::abs(r[0]) < 1e-12);
    CHECK(std::abs(r[1]) < 1e-12);
}

TEST_CASE("hr_residual rejects a mismatched interval") {
    const FunctionSet one = make_set({kOne});
    CHECK_THROWS_AS(hr_residual(one, {{0.0, 0.5}, {0.25}}), std::invalid_argument);
}

TEST_CASE("solve_partition golden cases") {
    const Partition p1 = solve_partition(make_set({kOne}));
    REQUIRE(p1.breakpoints.size() == 1);
    CHECK(p1.breakpoints[0] == doctest::Approx(0.5).epsilon(1e-9));

    const Partition p2 = solve_partition(make_set({kOne, kX}));
    REQUIRE(p2.breakpoints.size() == 2);
    CHECK(std::abs(p2.breakpoints[0] - 0.25) < 1e-8);
    CHECK(std::abs(p2.breakpoints[1] - 0.75) < 1e-8);
}

TEST_CASE("solve_partition collapses duplicate constraints") {
    const FunctionSet dup = make_set({kOne, FunctionSpec::polynomial({2.0})});
    const Partition p = solve_partition(dup);
    REQUIRE(p.breakpoints.size() == 1); // r = rank = 1
    CHECK(p.breakpoints[0] == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("solve_partition on the zero set returns the trivial partition") {
    const Partition p = solve_partition(make_set({FunctionSpec::polynomial({0.0})}));
    CHECK(p.breakpoints.empty());
}

TEST_CASE("brute_force_partition golden cases") {
    CHECK(brute_force_partition(make_set({kOne}), 1, 101).breakpoints[0] ==
          doctest::Approx(0.5).epsilon(1e-12));

    const Partition p2 = brute_force_partition(make_set({kOne, kX}), 2, 101);
    CHECK(p2.breakpoints[0] == doctest::Approx(0.25).epsilon(1e-12));
    CHECK(p2.breakpoints[1] == doctest::Approx(0.75).epsilon(1e-12));
}

TEST_CASE("brute_force_partition minimizes the closed-form residual of {x - 1/2}") {
    // For a single breakpoint beta the alternating residual is beta - beta^2
    // in closed form, so the grid minimizer is the first interior point.
    const FunctionSet f = make_set({FunctionSpec::polynomial({-0.5, 1.0})});
    const int grid_n = 101;
    double best = 1e300;
    double best_beta = 0.0;
    for (int i = 1; i <= grid_n - 2; ++i) {
        const double beta = static_cast<double>(i) / (grid_n - 1);
        const double res = std::abs(beta - beta * beta);
        if (res < best) {
            best = res;
            best_beta = beta;
        }
    }
    const Partition p = brute_force_partition(f, 1, grid_n);
    REQUIRE(p.breakpoints.size() == 1);
    CHECK(p.breakpoints[0] == doctest::Approx(best_beta).epsilon(1e-12));
}

TEST_CASE("brute_force_partition guards its enumeration budget") {
    const FunctionSet f = make_set({kOne});
    CHECK_THROWS_AS(brute_force_partition(f, 5, 101), std::invalid_argument);
    CHECK_THROWS_AS(brute_force_partition(f, 1, 2), std::invalid_argument);
}

TEST_CASE("hr_residual is Lipschitz in the breakpoints") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        const FunctionSet fs = make_set({FunctionSpec::polynomial({unif(rng), unif(rng), unif(rng)}),
                                         FunctionSpec::trigonometric(unif(rng), {{unif(rng), unif(rng)}})});
        double fmax = 0.0;
        for (int i = 0; i <= 100; ++i)
            for (const auto& f : fs.entries) fmax = std::max(fmax, std::abs(f(i / 100.0)));

        const std::vector<double> base{0.3, 0.6};
        const auto r0 = hr_residual(fs, {{0.0, 1.0}, base});
        const double delta = 1e-4;
        for (std::size_t m = 0; m < base.size(); ++m) {
            std::vector<double> bumped = base;
            bumped[m] += delta;
            const auto r1 = hr_residual(fs, {{0.0, 1.0}, bumped});
            for (std::size_t j = 0; j < r0.size(); ++j)
                CHECK(std::abs(r1[j] - r0[j]) <= 2.0 * delta * fmax + 1e-9);
        }
    }
}

TEST_CASE("prepending a vanishing breakpoint flips the residual sign") {
    const FunctionSet fs = make_set({FunctionSpec::polynomial({0.3, -1.0, 0.7})});
    const std::vector<double> base{0.4, 0.7};
    const auto r0 = hr_residual(fs, {{0.0, 1.0}, base});
    for (double eta : {1e-3, 1e-4, 1e-5}) {
        std::vector<double> prepended{eta};
        prepended.insert(prepended.end(), base.begin(), base.end());
        const auto r1 = hr_residual(fs, {{0.0, 1.0}, prepended});
        CHECK(std::abs(r1[0] + r0[0]) < 3.0 * eta + 1e-9);
    }
}

TEST_CASE("solve_partition output is re-checked by local brute refinement") {
    std::mt19937_64 rng(9);
    std::uniform_real_distribution<double> unif(-1.0, 1.0);
    for (int trial = 0; trial < 3; ++trial) {
        FunctionSet fs = make_set({FunctionSpec::polynomial({unif(rng), unif(rng)}),
                                   FunctionSpec::trigonometric(0.0, {{unif(rng), unif(rng)}})});
        PartitionSolveOptions opts;
        opts.seed = trial;
        const Partition p = solve_partition(fs, opts);
        CHECK(p.breakpoints.size() <= 2); // r <= n

        const std::vector<double> l1 = l1_norms(fs, opts.quad);
        const double l1max = *std::max_element(l1.begin(), l1.end());
        double res = 0.0;
        for (double v : hr_residual(fs, p)) res = std::max(res, std::abs(v));
        CHECK(res < 1e-9 * l1max);

        // Local grid around the solution cannot do an order of magnitude
        // better (the solution is a genuine local minimizer).
        double best_near = res;
        for (std::size_t m = 0; m < p.breakpoints.size(); ++m) {
            for (double d : {-1e-4, 1e-4}) {
                Partition q = p;
                q.breakpoints[m] += d;
                double r = 0.0;
                for (double v : hr_residual(fs, q)) r = std::max(r, std::abs(v));
                best_near = std::min(best_near, r);
            }
        }
        CHECK(res <= best_near + 1e-12);
    }
}
