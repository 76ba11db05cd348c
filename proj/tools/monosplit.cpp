// monosplit command-line driver.
//
//   monosplit run --method rfbs --problem lasso --gamma auto --trace out.csv
//   monosplit bench --methods fbs,fbfs,frbs,rfbs,srfb --problems all --out report.csv
//   monosplit validate --problem composite-1
//
// Exit codes: 0 success, 1 non-convergence (or failed checks), 2 usage, 3 I/O.

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "monosplit/bench/csv.hpp"
#include "monosplit/bench/matrix.hpp"
#include "monosplit/bench/problem_spec.hpp"
#include "monosplit/bench/registry.hpp"
#include "monosplit/bench/validate.hpp"

namespace {

using namespace monosplit;
using namespace monosplit::bench;
using nlohmann::json;

constexpr int kExitOk = 0;
constexpr int kExitNotConverged = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;

struct Settings {
    std::string method = "rfbs";
    std::vector<std::string> methods{"fbs", "fbfs", "frbs", "rfbs", "srfb"};
    std::string problem;
    std::vector<std::string> problems{"all"};
    /// Problems given inline in a config file; take precedence over names.
    std::vector<ProblemSpec> inline_problems;
    std::string gamma = "auto";
    double tol = 1e-8;
    std::size_t max_iter = 100000;
    std::string stop_rule = "natural_residual";
    bool unsafe = false;
    double epsilon = 0.01;
    double zeta = 0.25;
    double xi = 1.0;
    unsigned threads = 0;
    std::string trace;
    std::string out;
    std::string table;
    std::string trace_dir;
};

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read config '" + path + "'");
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw UsageError("config '" + path + "': " + e.what());
    }
}

/// Applies a config document on top of the parsed flags.
void apply_config(const json& j, Settings& s) {
    static const std::set<std::string> known{"method", "methods", "problem", "problems", "gamma", "tol", "max_iter",
                                             "stop_rule", "unsafe_gamma", "epsilon", "zeta", "xi", "threads",
                                             "trace", "out", "table", "trace_dir"};
    if (!j.is_object()) throw UsageError("config: expected a JSON object");
    for (const auto& [key, value] : j.items())
        if (!known.count(key)) throw UsageError("config: unknown key '" + key + "'");
    try {
        if (j.contains("method")) s.method = j.at("method").get<std::string>();
        if (j.contains("methods")) s.methods = j.at("methods").get<std::vector<std::string>>();
        if (j.contains("problem")) {
            const auto& p = j.at("problem");
            if (p.is_string()) s.problem = p.get<std::string>();
            else s.inline_problems = {problem_from_json(p)};
        }
        if (j.contains("problems")) {
            s.problems.clear();
            s.inline_problems.clear();
            for (const auto& p : j.at("problems")) {
                if (p.is_string()) s.problems.push_back(p.get<std::string>());
                else s.inline_problems.push_back(problem_from_json(p));
            }
        }
        if (j.contains("gamma")) {
            const auto& g = j.at("gamma");
            s.gamma = g.is_number() ? format_number(g.get<double>()) : g.get<std::string>();
        }
        if (j.contains("tol")) s.tol = j.at("tol").get<double>();
        if (j.contains("max_iter")) s.max_iter = j.at("max_iter").get<std::size_t>();
        if (j.contains("stop_rule")) s.stop_rule = j.at("stop_rule").get<std::string>();
        if (j.contains("unsafe_gamma")) s.unsafe = j.at("unsafe_gamma").get<bool>();
        if (j.contains("epsilon")) s.epsilon = j.at("epsilon").get<double>();
        if (j.contains("zeta")) s.zeta = j.at("zeta").get<double>();
        if (j.contains("xi")) s.xi = j.at("xi").get<double>();
        if (j.contains("threads")) s.threads = j.at("threads").get<unsigned>();
        if (j.contains("trace")) s.trace = j.at("trace").get<std::string>();
        if (j.contains("out")) s.out = j.at("out").get<std::string>();
        if (j.contains("table")) s.table = j.at("table").get<std::string>();
        if (j.contains("trace_dir")) s.trace_dir = j.at("trace_dir").get<std::string>();
    } catch (const json::exception& e) {
        throw UsageError(std::string("config: ") + e.what());
    }
}

CellOptions cell_options(const Settings& s) {
    CellOptions o;
    if (s.gamma != "auto") {
        std::size_t used = 0;
        double g = 0.0;
        try {
            g = std::stod(s.gamma, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used != s.gamma.size()) throw UsageError("--gamma expects 'auto' or a number, got '" + s.gamma + "'");
        o.gamma = g;
    }
    auto rule = parse_stop_rule(s.stop_rule);
    if (!rule) throw UsageError("unknown stop rule '" + s.stop_rule + "'");
    if (!(s.tol > 0.0)) throw UsageError("--tol must be positive");
    if (s.max_iter == 0) throw UsageError("--max-iter must be positive");
    o.unsafe = s.unsafe;
    o.tol = s.tol;
    o.max_iter = s.max_iter;
    o.stop_rule = *rule;
    o.epsilon = s.epsilon;
    o.zeta = s.zeta;
    o.xi = s.xi;
    return o;
}

int cmd_run(const Settings& s) {
    ProblemSpec spec;
    if (!s.inline_problems.empty()) spec = s.inline_problems.front();
    else if (!s.problem.empty()) spec = select_problems({s.problem}).front();
    else throw UsageError("run: --problem is required");
    const Method m = select_methods({s.method}).front();
    const CellResult r = run_cell(m, spec, cell_options(s));
    if (r.status == CellStatus::skipped) {
        std::cerr << "monosplit: " << r.method << " is not applicable to " << r.problem << ": " << r.note << "\n";
        return kExitUsage;
    }
    if (!s.trace.empty()) emit_trace_csv(r.records, s.trace);
    std::cout << r.method << " on " << r.problem << ": " << to_string(r.status) << ", "
              << (r.converged ? "converged" : "not converged") << " after " << r.iterations
              << " iterations, residual " << format_number(r.final_residual) << ", gamma " << format_number(r.gamma)
              << ", forward calls " << r.forward_calls << "\n";
    if (r.error_to_known) std::cout << "distance to known solution: " << format_number(*r.error_to_known) << "\n";
    if (!r.note.empty()) std::cout << "note: " << r.note << "\n";
    return r.converged ? kExitOk : kExitNotConverged;
}

int cmd_bench(const Settings& s) {
    const auto methods = select_methods(s.methods);
    std::vector<ProblemSpec> problems = s.inline_problems;
    if (!s.problems.empty()) {
        auto named = select_problems(s.problems);
        problems.insert(problems.end(), named.begin(), named.end());
    }
    if (problems.empty()) throw UsageError("bench: empty problem list");
    const BenchmarkReport report = run_matrix(methods, problems, cell_options(s), s.threads);
    const std::string table = report_table(report);
    std::cout << table;
    if (!s.out.empty()) write_file(s.out, report_csv(report));
    if (!s.table.empty()) write_file(s.table, table);
    if (!s.trace_dir.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(s.trace_dir, ec);
        if (ec) throw IoError("cannot create '" + s.trace_dir + "': " + ec.message());
        for (const auto& c : report.cells)
            if (c.status != CellStatus::skipped)
                emit_trace_csv(c.records, (std::filesystem::path(s.trace_dir) / (c.method + "_" + c.problem + ".csv")).string());
    }
    return kExitOk;
}

int cmd_validate(const Settings& s) {
    std::vector<ProblemSpec> problems = s.inline_problems;
    if (problems.empty()) problems = select_problems({s.problem.empty() ? std::string("all") : s.problem});
    bool all_ok = true;
    for (const auto& p : problems) {
        for (const auto& r : validate_problem(p)) {
            std::cout << (r.passed ? "PASS " : "FAIL ") << p.name << ": " << r.name << " (worst "
                      << format_number(r.worst_violation) << ", " << r.samples << " samples)\n";
            all_ok = all_ok && r.passed;
        }
    }
    return all_ok ? kExitOk : kExitNotConverged;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Monotone inclusion splitting solvers and benchmark harness"};
    app.require_subcommand(1);
    Settings s;
    std::string config;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--gamma", s.gamma, "Stepsize: 'auto' or a number");
        sub->add_option("--tol", s.tol, "Stopping tolerance");
        sub->add_option("--max-iter", s.max_iter, "Iteration budget");
        sub->add_option("--stop-rule", s.stop_rule, "natural_residual or step_norm");
        sub->add_flag("--unsafe-gamma,--unsafe", s.unsafe,
                      "Accept stepsizes outside the admissible range and run incompatible cells");
        sub->add_option("--epsilon", s.epsilon, "Slack of the cocoercive reflected regime");
        sub->add_option("--zeta", s.zeta, "Three-operator stepsize parameter in ]0, 1/2[");
        sub->add_option("--xi", s.xi, "Three-operator stepsize parameter > 0");
        sub->add_option("--config", config, "JSON config; its values override flags");
    };

    auto* run = app.add_subcommand("run", "Run one method on one problem");
    run->add_option("--method", s.method, "fbs, fbfs, frbs, rfbs or srfb");
    run->add_option("--problem", s.problem, "Registry problem name");
    run->add_option("--trace", s.trace, "Write the per-iteration trace CSV here");
    add_common(run);

    auto* bench = app.add_subcommand("bench", "Run a method x problem matrix");
    bench->add_option("--methods", s.methods, "Comma-separated methods or 'all'")->delimiter(',');
    bench->add_option("--problems", s.problems, "Comma-separated problems or 'all'")->delimiter(',');
    bench->add_option("--out", s.out, "Report CSV path");
    bench->add_option("--table", s.table, "Aligned text table path");
    bench->add_option("--trace-dir", s.trace_dir, "Directory for per-cell trace CSVs");
    bench->add_option("--threads", s.threads, "Worker threads (0 = hardware)");
    add_common(bench);

    auto* validate = app.add_subcommand("validate", "Run operator invariant checks");
    validate->add_option("--problem", s.problem, "Registry problem name (default: all)");
    validate->add_option("--config", config, "JSON config; its values override flags");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (!config.empty()) apply_config(read_json_file(config), s);
        if (run->parsed()) return cmd_run(s);
        if (bench->parsed()) return cmd_bench(s);
        return cmd_validate(s);
    } catch (const IoError& e) {
        std::cerr << "monosplit: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        std::cerr << "monosplit: " << e.what() << "\n";
        return kExitUsage;
    }
}
