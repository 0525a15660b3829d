#include "annihilator/problem.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "annihilator/errors.hpp"

#include <nlohmann/json.hpp>

namespace annihilator {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& pointer, const std::string& message) {
    throw schema_error(pointer, message);
}

const json& require(const json& j, const char* key, const std::string& pointer) {
    if (!j.is_object() || !j.contains(key)) fail(pointer + "/" + key, "required field missing");
    return j.at(key);
}

std::vector<double> number_list(const json& j, const std::string& pointer) {
    if (!j.is_array() || j.empty()) fail(pointer, "expected a non-empty array of numbers");
    std::vector<double> out;
    for (const auto& v : j) {
        if (!v.is_number()) fail(pointer, "expected numbers");
        out.push_back(v.get<double>());
    }
    return out;
}

FunctionSpec parse_unit_spec(const json& j, const std::string& pointer) {
    const std::string kind = require(j, "kind", pointer).get<std::string>();
    try {
        if (kind == "polynomial")
            return FunctionSpec::polynomial(number_list(require(j, "coeffs", pointer), pointer + "/coeffs"));
        if (kind == "trigonometric") {
            std::vector<std::pair<double, double>> pairs;
            if (j.contains("pairs")) {
                for (const auto& p : j.at("pairs")) {
                    if (!p.is_array() || p.size() != 2) fail(pointer + "/pairs", "expected [a_k, b_k] pairs");
                    pairs.emplace_back(p[0].get<double>(), p[1].get<double>());
                }
            }
            return FunctionSpec::trigonometric(j.value("constant", 0.0), std::move(pairs));
        }
        if (kind == "sampled")
            return FunctionSpec::sampled(number_list(require(j, "xs", pointer), pointer + "/xs"),
                                         number_list(require(j, "ys", pointer), pointer + "/ys"));
    } catch (const std::invalid_argument& e) {
        fail(pointer, e.what());
    }
    fail(pointer + "/kind", "unknown kind '" + kind + "' for the unit interval");
}

RealLineFunction parse_line_spec(const json& j, const std::string& pointer) {
    const std::string kind = require(j, "kind", pointer).get<std::string>();
    try {
        if (kind == "gaussian_poly")
            return RealLineFunction::gaussian_poly(
                number_list(require(j, "coeffs", pointer), pointer + "/coeffs"), j.value("mu", 0.0),
                j.value("sigma", 1.0));
        if (kind == "compact_linear")
            return RealLineFunction::compact_linear(
                number_list(require(j, "xs", pointer), pointer + "/xs"),
                number_list(require(j, "ys", pointer), pointer + "/ys"));
    } catch (const std::invalid_argument& e) {
        fail(pointer, e.what());
    }
    fail(pointer + "/kind", "unknown kind '" + kind + "' for the real line");
}

json unit_spec_to_json(const FunctionSpec& f) {
    if (const auto* p = f.as_polynomial()) return {{"kind", "polynomial"}, {"coeffs", p->coeffs}};
    if (const auto* t = f.as_trigonometric()) {
        json pairs = json::array();
        for (const auto& [a, b] : t->pairs) pairs.push_back({a, b});
        return {{"kind", "trigonometric"}, {"constant", t->constant}, {"pairs", pairs}};
    }
    if (const auto* s = f.as_sampled()) return {{"kind", "sampled"}, {"xs", s->xs}, {"ys", s->ys}};
    throw std::invalid_argument("cannot serialize a custom function");
}

json line_spec_to_json(const RealLineFunction& f) {
    if (const auto* g = f.as_gaussian_poly())
        return {{"kind", "gaussian_poly"}, {"coeffs", g->coeffs}, {"mu", g->mu}, {"sigma", g->sigma}};
    if (const auto* c = f.as_compact_linear())
        return {{"kind", "compact_linear"}, {"xs", c->xs}, {"ys", c->ys}};
    throw std::invalid_argument("cannot serialize a custom function");
}

} // namespace

ProblemFile parse_problem_json(const json& j) {
    ProblemFile p;
    if (!j.is_object()) fail("", "problem file must be a JSON object");
    if (!j.contains("version")) fail("/version", "required field missing");
    p.version = j.at("version").get<int>();
    if (p.version != 1) fail("/version", "unsupported version (expected 1)");

    const std::string mode = require(j, "mode", "").get<std::string>();
    if (mode == "solve")
        p.mode = ProblemFile::Mode::solve;
    else if (mode == "orthogonalize")
        p.mode = ProblemFile::Mode::orthogonalize;
    else if (mode == "verify")
        p.mode = ProblemFile::Mode::verify;
    else
        fail("/mode", "expected one of solve|orthogonalize|verify");

    const json& dom = require(j, "domain", "");
    if (dom.is_string() && dom == "unit_interval") {
        p.domain = ProblemFile::Domain::unit_interval;
    } else if (dom.is_string() && dom == "real_line") {
        p.domain = ProblemFile::Domain::real_line;
    } else if (dom.is_object() && dom.contains("real_n")) {
        p.domain = ProblemFile::Domain::real_n;
        p.dimensions = dom.at("real_n").get<int>();
        if (p.dimensions < 1 || p.dimensions > 3) fail("/domain/real_n", "supported dimensions: 1..3");
    } else {
        fail("/domain", "expected unit_interval, real_line or {\"real_n\": N}");
    }

    const json& funcs = require(j, "functions", "");
    if (!funcs.is_array() || funcs.empty()) fail("/functions", "expected a non-empty array");
    for (std::size_t i = 0; i < funcs.size(); ++i) {
        const std::string pointer = "/functions/" + std::to_string(i);
        const json& fj = funcs[i];
        const bool is_complex = fj.is_object() && fj.contains("re");
        switch (p.domain) {
        case ProblemFile::Domain::unit_interval: {
            ComplexFunction cf{parse_unit_spec(is_complex ? fj.at("re") : fj,
                                               is_complex ? pointer + "/re" : pointer),
                               std::nullopt};
            if (is_complex && fj.contains("im") && !fj.at("im").is_null())
                cf.im = parse_unit_spec(fj.at("im"), pointer + "/im");
            p.unit_functions.push_back(std::move(cf));
            break;
        }
        case ProblemFile::Domain::real_line: {
            ComplexRealLineFunction cf{parse_line_spec(is_complex ? fj.at("re") : fj,
                                                       is_complex ? pointer + "/re" : pointer),
                                       std::nullopt};
            if (is_complex && fj.contains("im") && !fj.at("im").is_null())
                cf.im = parse_line_spec(fj.at("im"), pointer + "/im");
            p.line_functions.push_back(std::move(cf));
            break;
        }
        case ProblemFile::Domain::real_n: {
            if (!fj.is_object() || fj.value("kind", "") != "separable")
                fail(pointer, "real_n functions must have kind 'separable'");
            const json& factors = require(fj, "factors", pointer);
            if (!factors.is_array() || static_cast<int>(factors.size()) != p.dimensions)
                fail(pointer + "/factors", "expected one factor per dimension");
            SeparableField field;
            for (std::size_t d = 0; d < factors.size(); ++d)
                field.factors.push_back(
                    parse_line_spec(factors[d], pointer + "/factors/" + std::to_string(d)));
            p.separable_functions.push_back(std::move(field));
            break;
        }
        }
    }

    if (j.contains("options")) {
        const json& o = j.at("options");
        if (!o.is_object()) fail("/options", "expected an object");
        p.options.residual_tol = o.value("residual_tol", p.options.residual_tol);
        p.options.scan_points = o.value("scan_points", p.options.scan_points);
        p.options.rank_tol = o.value("rank_tol", p.options.rank_tol);
        p.options.max_eps_halvings = o.value("max_eps_halvings", p.options.max_eps_halvings);
        p.options.seed = o.value("seed", p.options.seed);
        p.options.allow_trivial = o.value("allow_trivial", p.options.allow_trivial);
        p.options.quad.abs_tol = o.value("quad_abs_tol", p.options.quad.abs_tol);
        if (p.options.residual_tol <= 0.0) fail("/options/residual_tol", "must be positive");
        if (p.options.scan_points < 3) fail("/options/scan_points", "must be >= 3");
    }

    if (j.contains("output")) {
        const json& o = j.at("output");
        if (!o.is_object()) fail("/output", "expected an object");
        p.report_path = o.value("report_path", p.report_path);
        p.phase_path = o.value("phase_path", p.phase_path);
        p.samples_path = o.value("samples_path", p.samples_path);
        p.samples_n = o.value("samples_n", p.samples_n);
        if (p.samples_n < 2) fail("/output/samples_n", "must be >= 2");
    }
    return p;
}

ProblemFile parse_problem(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open problem file: " + path);
    json j;
    try {
        in >> j;
    } catch (const json::exception& e) {
        fail("", std::string("invalid JSON: ") + e.what());
    }
    return parse_problem_json(j);
}

nlohmann::json problem_to_json(const ProblemFile& p) {
    json j;
    j["version"] = p.version;
    j["mode"] = p.mode == ProblemFile::Mode::solve          ? "solve"
                : p.mode == ProblemFile::Mode::orthogonalize ? "orthogonalize"
                                                             : "verify";
    switch (p.domain) {
    case ProblemFile::Domain::unit_interval: j["domain"] = "unit_interval"; break;
    case ProblemFile::Domain::real_line: j["domain"] = "real_line"; break;
    case ProblemFile::Domain::real_n: j["domain"] = {{"real_n", p.dimensions}}; break;
    }
    j["functions"] = json::array();
    for (const ComplexFunction& f : p.unit_functions) {
        if (f.im)
            j["functions"].push_back({{"re", unit_spec_to_json(f.re)}, {"im", unit_spec_to_json(*f.im)}});
        else
            j["functions"].push_back(unit_spec_to_json(f.re));
    }
    for (const ComplexRealLineFunction& f : p.line_functions) {
        if (f.im)
            j["functions"].push_back({{"re", line_spec_to_json(f.re)}, {"im", line_spec_to_json(*f.im)}});
        else
            j["functions"].push_back(line_spec_to_json(f.re));
    }
    for (const SeparableField& f : p.separable_functions) {
        json factors = json::array();
        for (const RealLineFunction& g : f.factors) factors.push_back(line_spec_to_json(g));
        j["functions"].push_back({{"kind", "separable"}, {"factors", factors}});
    }
    j["options"] = {{"residual_tol", p.options.residual_tol},
                    {"scan_points", p.options.scan_points},
                    {"rank_tol", p.options.rank_tol},
                    {"max_eps_halvings", p.options.max_eps_halvings},
                    {"seed", p.options.seed},
                    {"allow_trivial", p.options.allow_trivial},
                    {"quad_abs_tol", p.options.quad.abs_tol}};
    j["output"] = {{"report_path", p.report_path},
                   {"phase_path", p.phase_path},
                   {"samples_path", p.samples_path},
                   {"samples_n", p.samples_n}};
    return j;
}

std::string solution_samples_csv(const SmoothPhase& phase, int n) {
    if (n < 2) throw std::invalid_argument("solution_samples_csv: need at least 2 samples");
    const auto dom = phase.domain();
    std::string out = "x,g,re_exp,im_exp\n";
    char line[160];
    for (int i = 0; i < n; ++i) {
        const double x = dom[0] + (dom[1] - dom[0]) * i / (n - 1);
        const double g = phase.eval(x, 0);
        std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", x, g, std::cos(g), std::sin(g));
        out += line;
    }
    return out;
}

namespace {

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

FunctionSet build_function_set(const ProblemFile& p) {
    switch (p.domain) {
    case ProblemFile::Domain::unit_interval:
        return realify(p.unit_functions);
    case ProblemFile::Domain::real_line: {
        std::vector<ComplexFunction> unit;
        for (const ComplexRealLineFunction& f : p.line_functions) {
            ComplexFunction cf{to_unit_interval(f.re, p.to_unit), std::nullopt};
            if (f.im) cf.im = to_unit_interval(*f.im, p.to_unit);
            unit.push_back(std::move(cf));
        }
        return realify(unit);
    }
    case ProblemFile::Domain::real_n: {
        std::vector<ComplexFunction> unit;
        for (const SeparableField& f : p.separable_functions) {
            const RealLineFunction marginal = marginalize(f, 0, p.to_unit.line);
            unit.push_back(ComplexFunction{to_unit_interval(marginal, p.to_unit), std::nullopt});
        }
        return realify(unit);
    }
    }
    throw std::logic_error("unreachable");
}

int run_solve(const ProblemFile& p, std::ostream& err) {
    const FunctionSet fset = build_function_set(p);
    try {
        auto [phase, report] = solve_annihilating_phase(fset, p.options);
        write_file(p.report_path, report_to_json(report).dump(2) + "\n");
        write_file(p.phase_path, phase_to_json(phase).dump(2) + "\n");
        write_file(p.samples_path, solution_samples_csv(phase, p.samples_n));
        return 0;
    } catch (const solver_error& e) {
        err << "solver failure: " << e.what() << "\n";
        json j{{"passed", false}, {"error", e.what()}, {"best_residual", e.best_residual()}};
        write_file(p.report_path, j.dump(2) + "\n");
        return 2;
    }
}

int run_orthogonalize(const ProblemFile& p, std::ostream& err) {
    try {
        std::vector<SmoothPhase> phases;
        OrthogonalizeReport rep;
        if (p.domain == ProblemFile::Domain::unit_interval) {
            std::tie(phases, rep) = orthogonalize(p.unit_functions, p.options);
        } else if (p.domain == ProblemFile::Domain::real_line) {
            std::tie(phases, rep) = orthogonalize_real_line(p.line_functions, p.options, p.to_unit.line);
        } else {
            err << "orthogonalize mode supports unit_interval and real_line domains\n";
            return 1;
        }

        json jp;
        jp["phases"] = json::array();
        for (const SmoothPhase& g : phases) jp["phases"].push_back(phase_to_json(g));
        write_file(p.phase_path, jp.dump(2) + "\n");

        json jr;
        jr["max_offdiag"] = rep.max_offdiag;
        jr["inner_products"] = json::array();
        for (int j = 0; j < rep.inner_products.rows(); ++j)
            for (int k = j + 1; k < rep.inner_products.cols(); ++k)
                jr["inner_products"].push_back({{"j", j},
                                                {"k", k},
                                                {"re", rep.inner_products(j, k).real()},
                                                {"im", rep.inner_products(j, k).imag()}});
        jr["passed"] = rep.max_offdiag < p.options.residual_tol;
        write_file(p.report_path, jr.dump(2) + "\n");

        // One samples file per phase: suffix _0.._{n-1} before the extension.
        const auto dot = p.samples_path.rfind('.');
        for (std::size_t i = 0; i < phases.size(); ++i) {
            std::string path = p.samples_path;
            const std::string tag = "_" + std::to_string(i);
            if (dot == std::string::npos)
                path += tag;
            else
                path.insert(dot, tag);
            write_file(path, solution_samples_csv(phases[i], p.samples_n));
        }
        return rep.max_offdiag < p.options.residual_tol ? 0 : 2;
    } catch (const solver_error& e) {
        err << "solver failure: " << e.what() << "\n";
        json j{{"passed", false}, {"error", e.what()}};
        write_file(p.report_path, j.dump(2) + "\n");
        return 2;
    }
}

int run_verify(const ProblemFile& p, const std::string& phase_path, std::ostream& err) {
    if (phase_path.empty()) {
        err << "verify mode requires a phase JSON path\n";
        return 1;
    }
    std::ifstream in(phase_path);
    if (!in) {
        err << "cannot open phase file: " << phase_path << "\n";
        return 1;
    }
    SmoothPhase phase;
    try {
        json j;
        in >> j;
        phase = phase_from_json(j);
    } catch (const std::exception& e) {
        err << "invalid phase file: " << e.what() << "\n";
        return 1;
    }
    const FunctionSet fset = build_function_set(p);
    const SolveReport report = verify(fset, phase, p.options);
    write_file(p.report_path, report_to_json(report).dump(2) + "\n");
    if (!report.passed) {
        err << "verification failed:\n";
        for (const std::string& f : report.failures) err << "  - " << f << "\n";
    }
    return report.passed ? 0 : 2;
}

} // namespace

int run_problem(const std::string& problem_path, const RunOverrides& overrides, std::ostream& err) {
    ProblemFile p;
    try {
        p = parse_problem(problem_path);
    } catch (const schema_error& e) {
        err << "schema error at " << (e.pointer().empty() ? "/" : e.pointer()) << ": " << e.what()
            << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << e.what() << "\n";
        return 1;
    }
    if (!overrides.expected_mode.empty()) {
        const std::string mode = p.mode == ProblemFile::Mode::solve          ? "solve"
                                 : p.mode == ProblemFile::Mode::orthogonalize ? "orthogonalize"
                                                                              : "verify";
        if (mode != overrides.expected_mode) {
            err << "mode mismatch: file says '" << mode << "', command is '" << overrides.expected_mode
                << "'\n";
            return 1;
        }
    }
    if (overrides.has_seed) p.options.seed = overrides.seed;
    if (overrides.has_tol) p.options.residual_tol = overrides.tol;

    try {
        switch (p.mode) {
        case ProblemFile::Mode::solve: return run_solve(p, err);
        case ProblemFile::Mode::orthogonalize: return run_orthogonalize(p, err);
        case ProblemFile::Mode::verify: return run_verify(p, overrides.phase_input, err);
        }
    } catch (const schema_error& e) {
        err << "schema error at " << e.pointer() << ": " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        err << "invalid problem: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 1;
}

} // namespace annihilator
