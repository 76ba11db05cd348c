#pragma once

// Algorithm-versus-problem runs and the benchmark report.

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "monosplit/bench/csv.hpp"
#include "monosplit/bench/problem_spec.hpp"
#include "monosplit/bench/registry.hpp"
#include "monosplit/composite.hpp"
#include "monosplit/run.hpp"

namespace monosplit::bench {

/// Fraction of the stepsize supremum used by gamma = auto.
inline constexpr double kAutoGammaFraction = 0.9;

/// Thrown for malformed requests (unknown names, empty lists).
class UsageError : public Error {
public:
    using Error::Error;
};

enum class CellStatus { run, skipped, diverged };

inline std::string to_string(CellStatus s) {
    switch (s) {
        case CellStatus::run: return "run";
        case CellStatus::skipped: return "skipped";
        case CellStatus::diverged: return "diverged";
    }
    return "unknown";
}

struct CellOptions {
    /// Explicit stepsize; auto (0.9 x supremum) when absent.
    std::optional<double> gamma;
    /// Run incompatible cells and accept explicit gammas outside the admissible range.
    bool unsafe = false;
    double tol = 1e-8;
    std::size_t max_iter = 100000;
    StopRule stop_rule = StopRule::natural_residual;
    double epsilon = 0.01;
    double zeta = 0.25;
    double xi = 1.0;
};

struct CellResult {
    std::string method;
    std::string problem;
    CellStatus status = CellStatus::skipped;
    bool converged = false;
    std::size_t iterations = 0;
    double final_residual = 0.0;
    double wall_seconds = 0.0;
    double gamma = 0.0;
    std::uint64_t forward_calls = 0;
    /// ||final - known_solution|| when the problem ships a solution.
    std::optional<double> error_to_known;
    std::optional<std::uint64_t> seed;
    std::string note;
    std::vector<TraceRecord> records;
    std::vector<double> final_x;
};

struct BenchmarkReport {
    std::vector<CellResult> cells;
};

namespace detail {

template <class V>
ForwardOp<V> zero_forward_on(std::size_t dim) {
    return ForwardOp<V>([](const V& x) { return zeros_like(x); }, 0.0, kInfinity, dim, "zero");
}

inline std::vector<double> to_std(const DenseVector& v) { return {v.begin(), v.end()}; }
inline std::vector<double> to_std(const BlockVector& v) { return to_std(flatten(v)); }

/// Operators a method sees on a problem, or nullopt when the types do not fit.
///
///   fbs   needs a cocoercive forward operator; on three-op and composite the
///         forward part is not cocoercive, so these run only when unsafe.
///   srfb  on a two-operator problem runs with C = 0.
///   fbfs/frbs/rfbs on three-op use B + C as the single forward operator.
template <class V>
std::optional<OperatorSet<V>> method_operators(Method m, const ResolventOp<V>& a, const ForwardOp<V>& b,
                                               const std::optional<ForwardOp<V>>& c, bool unsafe, std::string& note) {
    const ForwardOp<V> joint = c ? sum_forward(b, *c) : b;
    switch (m) {
        case Method::fbs:
            if (!joint.cocoercive_beta()) {
                if (!unsafe) {
                    note = "forward operator not cocoercive";
                    return std::nullopt;
                }
                note = "unsafe: forward operator not cocoercive";
            }
            return OperatorSet<V>{a, std::nullopt, joint};
        case Method::srfb:
            return OperatorSet<V>{a, b, c ? *c : zero_forward_on<V>(b.domain_dim())};
        default:
            return OperatorSet<V>{a, joint, std::nullopt};
    }
}

template <class V>
RunConfig<V> make_config(const CellOptions& o, double gamma, std::optional<V> x_star) {
    RunConfig<V> cfg;
    cfg.gamma = gamma;
    cfg.max_iter = o.max_iter;
    cfg.tol = o.tol;
    cfg.stop_rule = o.stop_rule;
    cfg.x_star = std::move(x_star);
    cfg.allow_unsafe_gamma = o.unsafe;
    cfg.epsilon = o.epsilon;
    cfg.zeta = o.zeta;
    cfg.xi = o.xi;
    return cfg;
}

template <class V>
double choose_gamma(Method m, const OperatorSet<V>& ops, const CellOptions& o) {
    RunConfig<V> probe = make_config<V>(o, o.gamma.value_or(1.0), std::nullopt);
    if (o.gamma) {
        if (!o.unsafe && !stepsize_admitted(m, ops, probe))
            throw StepsizeError("gamma = " + format_number(*o.gamma) + " is outside the admissible range of " +
                                std::string(to_string(m)) + " (pass the unsafe flag to override)");
        return *o.gamma;
    }
    if (auto bound = widest_stepsize(m, ops, probe)) return std::isinf(bound->sup) ? 1.0 : kAutoGammaFraction * bound->sup;
    // Unsafe run without a theoretical range: fall back to the reflected bound.
    const ForwardOp<V>& fwd = ops.B ? *ops.B : *ops.C;
    return fwd.lipschitz_mu() > 0.0 ? kAutoGammaFraction * stepsize_rfbs_lipschitz(fwd.lipschitz_mu()).sup : 1.0;
}

template <class V>
void run_generic(Method m, OperatorSet<V> ops, const V& x0, std::optional<V> x_star, const CellOptions& o,
                 CellResult& out) {
    if (ops.B) ops.B = ops.B->instrument();
    if (ops.C) ops.C = ops.C->instrument();
    out.gamma = choose_gamma(m, ops, o);
    const auto cfg = make_config<V>(o, out.gamma, x_star);
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](const ConvergenceTrace<V>& trace, CellStatus status) {
        out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.status = status;
        out.converged = trace.converged;
        out.iterations = trace.records.size();
        out.final_residual = trace.records.empty() ? method_residual(m, trace.final_x, ops, out.gamma)
                                                   : trace.records.back().natural_residual;
        out.forward_calls = (ops.B ? ops.B->calls() : 0) + (ops.C ? ops.C->calls() : 0);
        out.records = trace.records;
        out.final_x = to_std(trace.final_x);
        if (x_star) out.error_to_known = norm(trace.final_x - *x_star);
    };
    try {
        finish(run(m, ops, InitialPoint<V>{x0, std::nullopt}, cfg), CellStatus::run);
    } catch (const DivergenceError<ConvergenceTrace<V>>& e) {
        finish(e.trace(), CellStatus::diverged);
        out.note = out.note.empty() ? e.what() : out.note + "; " + e.what();
    }
}

inline void run_composite_pridu(const CompositeProblem& problem, const BlockVector& z0,
                                std::optional<BlockVector> x_star, const CellOptions& o, CellResult& out) {
    CompositeProblem p = problem;
    p.B = p.B.instrument();
    if (o.gamma) {
        if (!o.unsafe && !composite_stepsize(p).admits(*o.gamma))
            throw StepsizeError("gamma = " + format_number(*o.gamma) + " is outside ]0, (sqrt2-1)/mu[");
        out.gamma = *o.gamma;
    } else {
        out.gamma = kAutoGammaFraction * default_composite_gamma(p);
    }
    const auto cfg = make_config<BlockVector>(o, out.gamma, x_star);
    const PrimalDualState s0 = PrimalDualState::from_blocks(z0, z0);
    const PrimalDualInit init{s0.x_cur, s0.v_cur, std::nullopt, std::nullopt};
    const auto t0 = std::chrono::steady_clock::now();
    auto finish = [&](const CompositeResult& r, CellStatus status) {
        out.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        out.status = status;
        out.converged = r.converged;
        out.iterations = r.primal.records.size();
        out.forward_calls = p.B.calls();
        out.records.clear();
        for (std::size_t k = 0; k < r.primal.records.size(); ++k) {
            TraceRecord rec = r.dual.records[k];
            rec.step_norm = std::hypot(r.primal.records[k].step_norm, r.dual.records[k].step_norm);
            out.records.push_back(rec);
        }
        out.final_residual = out.records.empty() ? 0.0 : out.records.back().natural_residual;
        std::vector<DenseVector> blocks{r.primal.final_x};
        for (const auto& b : r.dual.final_x.blocks()) blocks.push_back(b);
        const BlockVector z(std::move(blocks));
        out.final_x = to_std(z);
        if (x_star) out.error_to_known = norm(z - *x_star);
    };
    try {
        finish(solve_composite(p, init, cfg), CellStatus::run);
    } catch (const DivergenceError<CompositeResult>& e) {
        finish(e.trace(), CellStatus::diverged);
        out.note = e.what();
    }
}

} // namespace detail

/// Runs one method on one problem. Incompatible pairs come back skipped;
/// an explicit inadmissible gamma without the unsafe flag throws StepsizeError.
inline CellResult run_cell(Method m, const ProblemSpec& spec, const CellOptions& o) {
    CellResult out;
    out.method = std::string(to_string(m));
    out.problem = spec.name;
    out.seed = spec.seed;
    const ProblemInstance inst = instantiate(spec);
    const DenseVector x0 = initial_point(inst);
    std::optional<DenseVector> known;
    if (spec.known_solution) known = DenseVector(*spec.known_solution);

    if (inst.ops) {
        const auto& ops = *inst.ops;
        auto sel = detail::method_operators<DenseVector>(m, ops.A, *ops.B, ops.C, o.unsafe, out.note);
        if (!sel) return out;
        detail::run_generic(m, std::move(*sel), x0, known, o, out);
        return out;
    }

    const CompositeProblem& cp = *inst.composite;
    const auto dims = cp.product_dims();
    const BlockVector z0 = unflatten(x0, dims);
    std::optional<BlockVector> z_star;
    if (known) z_star = unflatten(*known, dims);
    if (m == Method::rfbs) {
        detail::run_composite_pridu(cp, z0, z_star, o, out);
        out.note = out.note.empty() ? "primal-dual iteration" : out.note;
        return out;
    }
    const auto prod = product_operator_set(cp);
    auto sel = detail::method_operators<BlockVector>(m, prod.A, *prod.B, std::nullopt, o.unsafe, out.note);
    if (!sel) return out;
    detail::run_generic(m, std::move(*sel), z0, z_star, o, out);
    return out;
}

/// Resolves "all" and comma lists to registry entries; unknown names throw UsageError.
inline std::vector<ProblemSpec> select_problems(const std::vector<std::string>& names) {
    if (names.empty()) throw UsageError("empty problem list");
    std::vector<ProblemSpec> out;
    for (const auto& n : names) {
        if (n == "all") {
            for (auto& s : registry()) out.push_back(std::move(s));
            continue;
        }
        auto s = find_problem(n);
        if (!s) throw UsageError("unknown problem '" + n + "'");
        out.push_back(std::move(*s));
    }
    return out;
}

inline std::vector<Method> select_methods(const std::vector<std::string>& names) {
    if (names.empty()) throw UsageError("empty method list");
    std::vector<Method> out;
    for (const auto& n : names) {
        if (n == "all") {
            out.insert(out.end(), std::begin(kAllMethods), std::end(kAllMethods));
            continue;
        }
        auto m = parse_method(n);
        if (!m) throw UsageError("unknown method '" + n + "'");
        out.push_back(*m);
    }
    return out;
}

/// Every (method, problem) cell exactly once, in problem-major order. Cells
/// run on a worker pool; results land in their slot, so the report does not
/// depend on completion order.
inline BenchmarkReport run_matrix(const std::vector<Method>& methods, const std::vector<ProblemSpec>& problems,
                                  const CellOptions& o, unsigned threads = 0) {
    if (methods.empty()) throw UsageError("empty method list");
    if (problems.empty()) throw UsageError("empty problem list");

    struct Job {
        Method m;
        const ProblemSpec* spec;
    };
    std::vector<Job> jobs;
    for (const auto& p : problems)
        for (Method m : methods) jobs.push_back({m, &p});

    BenchmarkReport report;
    report.cells.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            try {
                report.cells[k] = run_cell(jobs[k].m, *jobs[k].spec, o);
            } catch (const Error& e) {
                CellResult skipped;
                skipped.method = std::string(to_string(jobs[k].m));
                skipped.problem = jobs[k].spec->name;
                skipped.seed = jobs[k].spec->seed;
                skipped.note = e.what();
                report.cells[k] = std::move(skipped);
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, jobs.size()));
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();
    return report;
}

inline constexpr const char* kReportHeader =
    "method,problem,status,converged,iterations,final_residual,gamma,forward_calls,error_to_known,seed,note";

namespace detail {

inline std::string csv_escape(const std::string& s) {
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string out = "\"";
    for (char c : s) {
        if (c == '"') out += '"';
        out += c;
    }
    return out + "\"";
}

} // namespace detail

/// Machine-readable report. Wall time is left out so that the file is
/// reproducible; it appears in the text table.
inline std::string report_csv(const BenchmarkReport& r) {
    std::ostringstream os;
    os << kReportHeader << '\n';
    for (const auto& c : r.cells) {
        os << c.method << ',' << c.problem << ',' << to_string(c.status) << ',' << (c.converged ? "true" : "false")
           << ',' << c.iterations << ',' << (c.status == CellStatus::skipped ? "" : format_number(c.final_residual))
           << ',' << (c.status == CellStatus::skipped ? "" : format_number(c.gamma)) << ',' << c.forward_calls << ','
           << format_optional(c.error_to_known) << ',' << (c.seed ? std::to_string(*c.seed) : std::string()) << ','
           << detail::csv_escape(c.note) << '\n';
    }
    return os.str();
}

/// Aligned human-readable table.
inline std::string report_table(const BenchmarkReport& r) {
    const std::vector<std::string> head{"method", "problem", "status", "conv", "iters", "residual",
                                        "gamma",  "calls",   "error",  "time_s"};
    std::vector<std::vector<std::string>> rows{head};
    for (const auto& c : r.cells) {
        std::ostringstream res, gam, err, tim;
        res << std::scientific << std::setprecision(3) << c.final_residual;
        gam << std::setprecision(6) << c.gamma;
        if (c.error_to_known) err << std::scientific << std::setprecision(2) << *c.error_to_known;
        tim << std::fixed << std::setprecision(4) << c.wall_seconds;
        const bool skipped = c.status == CellStatus::skipped;
        rows.push_back({c.method, c.problem, to_string(c.status), c.converged ? "yes" : "no",
                        std::to_string(c.iterations), skipped ? "-" : res.str(), skipped ? "-" : gam.str(),
                        std::to_string(c.forward_calls), err.str().empty() ? "-" : err.str(),
                        skipped ? "-" : tim.str()});
    }
    std::vector<std::size_t> width(head.size(), 0);
    for (const auto& row : rows)
        for (std::size_t i = 0; i < row.size(); ++i) width[i] = std::max(width[i], row[i].size());
    std::ostringstream os;
    for (const auto& row : rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            os << std::left << std::setw(static_cast<int>(width[i])) << row[i];
            os << (i + 1 < row.size() ? "  " : "\n");
        }
    }
    return os.str();
}

/// Writes the CSV report to csv_path and, if given, the aligned table to table_path.
inline void emit_report(const BenchmarkReport& r, const std::string& csv_path,
                        const std::optional<std::string>& table_path = std::nullopt) {
    write_file(csv_path, report_csv(r));
    if (table_path) write_file(*table_path, report_table(r));
}

} // namespace monosplit::bench
