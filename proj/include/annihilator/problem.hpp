#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "annihilator/driver.hpp"
#include "annihilator/extensions.hpp"

#include <nlohmann/json_fwd.hpp>

namespace annihilator {

/// Parsed and validated problem file (schema version 1).
struct ProblemFile {
    enum class Mode { solve, orthogonalize, verify };
    enum class Domain { unit_interval, real_line, real_n };

    int version = 1;
    Mode mode = Mode::solve;
    Domain domain = Domain::unit_interval;
    int dimensions = 1; // real_n only

    // unit_interval functions (complex entries split into re/im)
    std::vector<ComplexFunction> unit_functions;
    // real_line / real_n functions
    std::vector<ComplexRealLineFunction> line_functions;
    std::vector<SeparableField> separable_functions; // real_n, separable kind

    SolveOptions options{};
    ToUnitOptions to_unit{};

    std::string report_path = "report.json";
    std::string phase_path = "phase.json";
    std::string samples_path = "samples.csv";
    int samples_n = 1000;
};

/// Parses and validates a problem file. Throws schema_error (naming the JSON
/// pointer) on violations and std::runtime_error when the file cannot be
/// read.
ProblemFile parse_problem(const std::string& path);
ProblemFile parse_problem_json(const nlohmann::json& j);

nlohmann::json problem_to_json(const ProblemFile& problem);

/// Samples CSV with the exact header "x,g,re_exp,im_exp" at n uniform points.
std::string solution_samples_csv(const SmoothPhase& phase, int n);

struct RunOverrides {
    bool has_seed = false;
    std::uint64_t seed = 0;
    bool has_tol = false;
    double tol = 0.0;
    bool quiet = false;
    std::string phase_input;   // verify mode: path of the phase JSON
    std::string expected_mode; // subcommand name; must match the file's mode
};

/// Executes the problem and writes the report/phase/samples artifacts.
/// Returns the process exit code: 0 success, 1 usage/schema error,
/// 2 solver failure.
int run_problem(const std::string& problem_path, const RunOverrides& overrides, std::ostream& err);

} // namespace annihilator
