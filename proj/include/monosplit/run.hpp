#pragma once

// Driver loop shared by all schemes: stepsize validation, stopping rules,
// divergence detection and per-iteration diagnostics.

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "monosplit/errors.hpp"
#include "monosplit/linalg.hpp"
#include "monosplit/operators.hpp"
#include "monosplit/splitting.hpp"
#include "monosplit/stepsize.hpp"

namespace monosplit {

enum class Method { fbs, fbfs, frbs, rfbs, srfb };

inline constexpr Method kAllMethods[] = {Method::fbs, Method::fbfs, Method::frbs, Method::rfbs, Method::srfb};

inline std::string_view to_string(Method m) {
    switch (m) {
        case Method::fbs: return "fbs";
        case Method::fbfs: return "fbfs";
        case Method::frbs: return "frbs";
        case Method::rfbs: return "rfbs";
        case Method::srfb: return "srfb";
    }
    return "unknown";
}

inline std::optional<Method> parse_method(std::string_view name) {
    for (Method m : kAllMethods)
        if (to_string(m) == name) return m;
    return std::nullopt;
}

enum class StopRule { natural_residual, step_norm };

inline std::string_view to_string(StopRule r) {
    return r == StopRule::natural_residual ? "natural_residual" : "step_norm";
}

inline std::optional<StopRule> parse_stop_rule(std::string_view name) {
    if (name == "natural_residual") return StopRule::natural_residual;
    if (name == "step_norm") return StopRule::step_norm;
    return std::nullopt;
}

/// Operators of 0 in A x + B x + C x. FBS uses C; FBFS, FRBS and RFBS use B;
/// SRFB uses both.
template <class V>
struct OperatorSet {
    ResolventOp<V> A;
    std::optional<ForwardOp<V>> B;
    std::optional<ForwardOp<V>> C;
};

template <class V>
struct InitialPoint {
    V x0;
    /// Defaults to x0, so that y_0 = x_0.
    std::optional<V> x_prev;
};

template <class V>
struct RunConfig {
    double gamma = 0.0;
    std::size_t max_iter = 100000;
    double tol = 1e-8;
    StopRule stop_rule = StopRule::natural_residual;
    /// Known solution; enables the Lyapunov columns of the trace.
    std::optional<V> x_star;
    /// Skip stepsize validation (divergence demonstrations).
    bool allow_unsafe_gamma = false;
    /// Slack of the cocoercive RFBS regime.
    double epsilon = 0.01;
    /// SRFB stepsize system parameters.
    double zeta = 0.25;
    double xi = 1.0;
};

struct TraceRecord {
    std::size_t iter = 0;
    double step_norm = 0.0;
    double natural_residual = 0.0;
    std::optional<double> lyapunov_E;
    std::optional<double> lyapunov_alpha;
    std::optional<double> lyapunov_cocoercive;
};

template <class V>
struct ConvergenceTrace {
    Method method = Method::rfbs;
    double gamma = 0.0;
    std::vector<TraceRecord> records;
    V final_x;
    bool converged = false;
};

namespace detail {

template <class V>
const ForwardOp<V>& require_op(const std::optional<ForwardOp<V>>& op, Method m, const char* which) {
    if (!op)
        throw InvalidProblemError(std::string(to_string(m)) + " requires operator " + which);
    return *op;
}

/// SRFB bounds when B = 0: the mu-terms of the stepsize system drop out.
inline StepsizeBound srfb_bound_without_lipschitz_part(double beta, double zeta, double xi) {
    const double b2 = 4.0 * beta * zeta / (1.0 + xi);
    const double b4 = (1.0 - 2.0 * zeta) * beta * xi / 2.0;
    return {std::min(b2, b4), false, StepsizeRegime::srfb};
}

inline StepsizeBound unbounded(StepsizeRegime r) { return {kInfinity, false, r}; }

} // namespace detail

/// All stepsize ranges in which the method is known to converge for the given
/// operators. Empty when the operators lack the required structure (e.g. FBS
/// with a non-cocoercive operator).
template <class V>
std::vector<StepsizeBound> admissible_stepsizes(Method m, const OperatorSet<V>& ops, const RunConfig<V>& cfg) {
    std::vector<StepsizeBound> out;
    switch (m) {
        case Method::fbs: {
            const auto& c = detail::require_op(ops.C, m, "C");
            if (c.cocoercive_beta()) {
                const double beta = *c.cocoercive_beta();
                out.push_back(std::isinf(beta) ? detail::unbounded(StepsizeRegime::fbs) : stepsize_fbs(beta));
            }
            break;
        }
        case Method::fbfs: {
            const double mu = detail::require_op(ops.B, m, "B").lipschitz_mu();
            out.push_back(mu > 0.0 ? stepsize_fbfs(mu) : detail::unbounded(StepsizeRegime::fbfs));
            break;
        }
        case Method::frbs: {
            const double mu = detail::require_op(ops.B, m, "B").lipschitz_mu();
            out.push_back(mu > 0.0 ? stepsize_frbs(mu) : detail::unbounded(StepsizeRegime::frbs));
            break;
        }
        case Method::rfbs: {
            const auto& b = detail::require_op(ops.B, m, "B");
            if (b.lipschitz_mu() > 0.0) {
                out.push_back(stepsize_rfbs_lipschitz(b.lipschitz_mu()));
            } else {
                out.push_back(detail::unbounded(StepsizeRegime::rfbs_lipschitz));
            }
            if (b.cocoercive_beta() && std::isfinite(*b.cocoercive_beta()))
                out.push_back(stepsize_rfbs_cocoercive(*b.cocoercive_beta(), cfg.epsilon));
            break;
        }
        case Method::srfb: {
            const auto& b = detail::require_op(ops.B, m, "B");
            const auto& c = detail::require_op(ops.C, m, "C");
            if (c.cocoercive_beta()) {
                const double beta = *c.cocoercive_beta();
                out.push_back(b.lipschitz_mu() > 0.0 ? stepsize_srfb(b.lipschitz_mu(), beta, cfg.zeta, cfg.xi)
                                                     : detail::srfb_bound_without_lipschitz_part(beta, cfg.zeta, cfg.xi));
            }
            break;
        }
    }
    return out;
}

/// The admissible range with the largest supremum, if any.
template <class V>
std::optional<StepsizeBound> widest_stepsize(Method m, const OperatorSet<V>& ops, const RunConfig<V>& cfg) {
    std::optional<StepsizeBound> best;
    for (const auto& b : admissible_stepsizes(m, ops, cfg))
        if (!best || b.sup > best->sup) best = b;
    return best;
}

template <class V>
bool stepsize_admitted(Method m, const OperatorSet<V>& ops, const RunConfig<V>& cfg) {
    for (const auto& b : admissible_stepsizes(m, ops, cfg))
        if (b.admits(cfg.gamma)) return true;
    return false;
}

template <class V>
IterateState<V> initial_state(Method m, const OperatorSet<V>& ops, const InitialPoint<V>& init) {
    IterateState<V> s(init.x0, init.x_prev.value_or(init.x0));
    if (m == Method::frbs) s.aux = detail::require_op(ops.B, m, "B").apply(s.x_prev);
    return s;
}

template <class V>
IterateState<V> step(Method m, const IterateState<V>& s, const OperatorSet<V>& ops, double gamma) {
    switch (m) {
        case Method::fbs: return step_fbs(s, ops.A, *ops.C, gamma);
        case Method::fbfs: return step_fbfs(s, ops.A, *ops.B, gamma);
        case Method::frbs: return step_frbs(s, ops.A, *ops.B, gamma);
        case Method::rfbs: return step_rfbs(s, ops.A, *ops.B, gamma);
        case Method::srfb: return step_srfb(s, ops.A, *ops.B, *ops.C, gamma);
    }
    return s;
}

/// Natural residual of the inclusion the method targets.
template <class V>
double method_residual(Method m, const V& x, const OperatorSet<V>& ops, double gamma) {
    const ForwardOp<V>* b = ops.B ? &*ops.B : nullptr;
    const ForwardOp<V>* c = ops.C ? &*ops.C : nullptr;
    switch (m) {
        case Method::fbs: return natural_residual<V>(x, ops.A, nullptr, c, gamma);
        case Method::srfb: return natural_residual<V>(x, ops.A, b, c, gamma);
        default: return natural_residual<V>(x, ops.A, b, nullptr, gamma);
    }
}

/// Iterates the method until the stop metric drops below cfg.tol or
/// cfg.max_iter steps have been taken. Record n describes x_n (n >= 1).
///
/// Throws StepsizeError for an inadmissible gamma (unless
/// cfg.allow_unsafe_gamma) and DivergenceError carrying the trace so far when
/// an iterate or its residual stops being finite.
template <class V>
ConvergenceTrace<V> run(Method m, const OperatorSet<V>& ops, const InitialPoint<V>& init, const RunConfig<V>& cfg) {
    if (!(cfg.gamma > 0.0)) throw StepsizeError("run: gamma must be positive");
    if (!(cfg.tol > 0.0)) throw InvalidConstantError("run: tol must be positive");
    if (cfg.max_iter == 0) throw InvalidConstantError("run: max_iter must be positive");
    if (!cfg.allow_unsafe_gamma && !stepsize_admitted(m, ops, cfg))
        throw StepsizeError("run: gamma = " + std::to_string(cfg.gamma) + " is outside the admissible range of " +
                            std::string(to_string(m)));
    switch (m) {
        case Method::fbs: detail::require_op(ops.C, m, "C"); break;
        case Method::srfb:
            detail::require_op(ops.B, m, "B");
            detail::require_op(ops.C, m, "C");
            break;
        default: detail::require_op(ops.B, m, "B"); break;
    }

    const double gamma = cfg.gamma;
    ConvergenceTrace<V> trace{m, gamma, {}, init.x0, false};
    IterateState<V> s = initial_state(m, ops, init);

    for (std::size_t n = 1; n <= cfg.max_iter; ++n) {
        IterateState<V> next = step(m, s, ops, gamma);
        if (!is_finite(next.x_cur)) {
            trace.final_x = s.x_cur;
            throw DivergenceError<ConvergenceTrace<V>>(
                std::string(to_string(m)) + ": non-finite iterate at step " + std::to_string(n), std::move(trace));
        }

        TraceRecord rec;
        rec.iter = n;
        rec.step_norm = norm(next.x_cur - s.x_cur);
        rec.natural_residual = method_residual(m, next.x_cur, ops, gamma);

        if (cfg.x_star && (m == Method::rfbs || m == Method::srfb)) {
            const V y_prev = reflect(s.x_cur, s.x_prev);
            if (m == Method::rfbs) {
                rec.lyapunov_E = lyapunov_E(next.x_cur, s.x_cur, y_prev, *ops.B, gamma, *cfg.x_star);
                const auto& beta = ops.B->cocoercive_beta();
                if (beta && std::isfinite(*beta))
                    rec.lyapunov_cocoercive =
                        lyapunov_cocoercive(next.x_cur, s.x_cur, y_prev, *ops.B, gamma, cfg.epsilon, *cfg.x_star);
            } else {
                rec.lyapunov_alpha = lyapunov_alpha(next.x_cur, s.x_cur, y_prev, *ops.B, gamma, cfg.zeta, *cfg.x_star);
            }
        }

        const double metric = cfg.stop_rule == StopRule::natural_residual ? rec.natural_residual : rec.step_norm;
        if (!std::isfinite(rec.natural_residual) || !std::isfinite(rec.step_norm)) {
            trace.final_x = s.x_cur;
            throw DivergenceError<ConvergenceTrace<V>>(
                std::string(to_string(m)) + ": residual overflow at step " + std::to_string(n), std::move(trace));
        }
        trace.records.push_back(rec);
        s = std::move(next);
        if (metric < cfg.tol) {
            trace.converged = true;
            break;
        }
    }
    trace.final_x = s.x_cur;
    return trace;
}

} // namespace monosplit
