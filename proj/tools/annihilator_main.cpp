#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "annihilator/problem.hpp"

int main(int argc, char** argv) {
    CLI::App app{"annihilator: smooth simultaneous moment annihilation and phase orthogonalization"};
    app.require_subcommand(1);

    annihilator::RunOverrides overrides;
    std::uint64_t seed = 0;
    double tol = 0.0;
    app.add_flag("--quiet", overrides.quiet, "suppress progress output");
    auto* seed_opt = app.add_option("--seed", seed, "override the problem seed");
    auto* tol_opt = app.add_option("--tol", tol, "override the residual tolerance");

    std::string problem_path;
    std::string phase_path;

    CLI::App* solve = app.add_subcommand("solve", "solve an annihilating-phase problem");
    solve->add_option("problem", problem_path, "problem JSON file")->required();

    CLI::App* verify = app.add_subcommand("verify", "verify a phase against a problem");
    verify->add_option("problem", problem_path, "problem JSON file")->required();
    verify->add_option("phase", phase_path, "phase JSON file")->required();

    CLI::App* ortho = app.add_subcommand("orthogonalize", "phase-orthogonalize a function set");
    ortho->add_option("problem", problem_path, "problem JSON file")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 1;
    }

    overrides.has_seed = seed_opt->count() > 0;
    overrides.seed = seed;
    overrides.has_tol = tol_opt->count() > 0;
    overrides.tol = tol;
    overrides.phase_input = phase_path;
    if (solve->parsed()) overrides.expected_mode = "solve";
    if (verify->parsed()) overrides.expected_mode = "verify";
    if (ortho->parsed()) overrides.expected_mode = "orthogonalize";

    const int code = annihilator::run_problem(problem_path, overrides, std::cerr);
    if (!overrides.quiet && code == 0) std::cout << "ok\n";
    return code;
}
