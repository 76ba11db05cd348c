#pragma once

// One-step maps of the five splitting schemes, the natural residual, and the
// Lyapunov quantities from the convergence arguments of the reflected methods.
//
// Every scheme keeps the two-point memory (x_n, x_{n-1}); y_n = 2 x_n - x_{n-1}
// is recomputed from it when needed.

#include <optional>
#include <utility>

#include "monosplit/linalg.hpp"
#include "monosplit/operators.hpp"

namespace monosplit {

template <class V>
struct IterateState {
    V x_cur;
    V x_prev;
    /// FRBS keeps B x_{n-1} here; unused by the other schemes.
    std::optional<V> aux;

    explicit IterateState(V x0) : x_cur(x0), x_prev(std::move(x0)) {}
    IterateState(V x0, V x_minus1, std::optional<V> aux_value = std::nullopt)
        : x_cur(std::move(x0)), x_prev(std::move(x_minus1)), aux(std::move(aux_value)) {
        if (!same_shape(x_cur, x_prev)) throw ShapeError("IterateState: x_cur and x_prev differ in shape");
    }

private:
    static bool same_shape(const DenseVector& a, const DenseVector& b) { return a.dim() == b.dim(); }
    static bool same_shape(const BlockVector& a, const BlockVector& b) { return a.block_dims() == b.block_dims(); }
};

/// Forward-backward: x+ = J_{gA}(x - g C x).
template <class V>
IterateState<V> step_fbs(const IterateState<V>& s, const ResolventOp<V>& a, const ForwardOp<V>& c, double gamma) {
    V next = a.resolve(gamma, axpy(-gamma, c.apply(s.x_cur), s.x_cur));
    return IterateState<V>(std::move(next), s.x_cur);
}

/// Tseng forward-backward-forward. Two evaluations of B per step.
template <class V>
IterateState<V> step_fbfs(const IterateState<V>& s, const ResolventOp<V>& a, const ForwardOp<V>& b, double gamma) {
    const V y = axpy(-gamma, b.apply(s.x_cur), s.x_cur);
    const V z = a.resolve(gamma, y);
    const V r = axpy(-gamma, b.apply(z), z);
    V next = (s.x_cur + r) - y;
    return IterateState<V>(std::move(next), s.x_cur);
}

/// Forward-reflected-backward: x+ = J_{gA}(x_n - 2g B x_n + g B x_{n-1}).
/// One fresh evaluation of B per step; B x_{n-1} is carried in aux and
/// initialised from x_prev when absent.
template <class V>
IterateState<V> step_frbs(const IterateState<V>& s, const ResolventOp<V>& a, const ForwardOp<V>& b, double gamma) {
    const V b_prev = s.aux ? *s.aux : b.apply(s.x_prev);
    V b_cur = b.apply(s.x_cur);
    const V t = axpy(gamma, b_prev, axpy(-2.0 * gamma, b_cur, s.x_cur));
    V next = a.resolve(gamma, t);
    return IterateState<V>(std::move(next), s.x_cur, std::move(b_cur));
}

/// Reflected forward-backward: x+ = J_{gA}(x_n - g B(2 x_n - x_{n-1})).
template <class V>
IterateState<V> step_rfbs(const IterateState<V>& s, const ResolventOp<V>& a, const ForwardOp<V>& b, double gamma) {
    const V y = reflect(s.x_cur, s.x_prev);
    V next = a.resolve(gamma, axpy(-gamma, b.apply(y), s.x_cur));
    return IterateState<V>(std::move(next), s.x_cur);
}

/// Semi-reflected forward-backward: x+ = J_{gA}(x_n - g B y_n - g C x_n).
///
/// The update is evaluated as ((x_n - g B y_n) - g C x_n); with C = 0 this is
/// bit-identical to step_rfbs and with B = 0 bit-identical to step_fbs.
template <class V>
IterateState<V> step_srfb(const IterateState<V>& s, const ResolventOp<V>& a, const ForwardOp<V>& b,
                          const ForwardOp<V>& c, double gamma) {
    const V y = reflect(s.x_cur, s.x_prev);
    const V t = axpy(-gamma, c.apply(s.x_cur), axpy(-gamma, b.apply(y), s.x_cur));
    V next = a.resolve(gamma, t);
    return IterateState<V>(std::move(next), s.x_cur);
}

/// ||x - J_{gA}(x - g B x - g C x)||; B and C may each be absent.
/// Zero exactly at the zeros of A + B + C.
template <class V>
double natural_residual(const V& x, const ResolventOp<V>& a, const ForwardOp<V>* b, const ForwardOp<V>* c,
                        double gamma) {
    V t = x;
    if (b) t = axpy(-gamma, b->peek(x), t);
    if (c) t = axpy(-gamma, c->peek(x), t);
    return norm(x - a.resolve(gamma, t));
}

template <class V>
double natural_residual(const V& x, const ResolventOp<V>& a, const ForwardOp<V>& b, double gamma) {
    return natural_residual<V>(x, a, &b, nullptr, gamma);
}

template <class V>
double natural_residual(const V& x, const ResolventOp<V>& a, const ForwardOp<V>& b, const ForwardOp<V>& c,
                        double gamma) {
    return natural_residual<V>(x, a, &b, &c, gamma);
}

/// Lyapunov function of RFBS for a monotone mu-Lipschitz B:
///
///   E_n = ||x_n - x*||^2 + ||x_{n-1} - x_n||^2 + ||p_n + g B x*||^2
///         + mu g ||x_n - y_{n-1}||^2 - g^2 ||B y_{n-1} - B x*||^2
///
/// with p_n = x_{n-1} - g B y_{n-1} - x_n and x* a zero of A + B.
/// Nonincreasing and nonnegative for g < (sqrt2 - 1)/mu.
template <class V>
double lyapunov_E(const V& x_n, const V& x_prev, const V& y_prev, const ForwardOp<V>& b, double gamma,
                  const V& x_star) {
    const double mu = b.lipschitz_mu();
    const V b_star = b.peek(x_star);
    const V b_y = b.peek(y_prev);
    const V p = axpy(-gamma, b_y, x_prev) - x_n;
    return squared_norm(x_n - x_star) + squared_norm(x_prev - x_n) + squared_norm(axpy(gamma, b_star, p)) +
           mu * gamma * squared_norm(x_n - y_prev) - gamma * gamma * squared_norm(b_y - b_star);
}

/// Decreasing quantity of RFBS for a beta-cocoercive B, g <= beta (1 - eps)/2:
///
///   ||x_n - x*||^2 + ||p_n + g B x*||^2 + g^2 (1 + eps)/(1 - eps) ||B y_{n-1} - B x*||^2
template <class V>
double lyapunov_cocoercive(const V& x_n, const V& x_prev, const V& y_prev, const ForwardOp<V>& b, double gamma,
                           double epsilon, const V& x_star) {
    const V b_star = b.peek(x_star);
    const V b_y = b.peek(y_prev);
    const V p = axpy(-gamma, b_y, x_prev) - x_n;
    return squared_norm(x_n - x_star) + squared_norm(axpy(gamma, b_star, p)) +
           gamma * gamma * (1.0 + epsilon) / (1.0 - epsilon) * squared_norm(b_y - b_star);
}

/// Lyapunov function of SRFB:
///
///   alpha_n = ||x_n - x*||^2 + t_n + g mu ||x_n - y_{n-1}||^2
///   t_n     = 2 (1 - zeta) ||x_{n-1} - x_n||^2 + 2 g <B y_{n-1} - B x*, x_n - x_{n-1}>
///
/// with x* a zero of A + B + C.
template <class V>
double lyapunov_alpha(const V& x_n, const V& x_prev, const V& y_prev, const ForwardOp<V>& b, double gamma,
                      double zeta, const V& x_star) {
    const double mu = b.lipschitz_mu();
    const V diff = b.peek(y_prev) - b.peek(x_star);
    const V step = x_n - x_prev;
    const double t = 2.0 * (1.0 - zeta) * squared_norm(step) + 2.0 * gamma * inner(diff, step);
    return squared_norm(x_n - x_star) + t + gamma * mu * squared_norm(x_n - y_prev);
}

} // namespace monosplit
