#pragma once

// Primal-dual solver for composite inclusions
//
//   0 in A x + sum_i L_i^* (A_i [] B_i)(L_i x) + B x
//
// through the product-space reformulation 0 in bold-A z + bold-B z on
// K = H + G_1 + ... + G_m, where
//
//   bold-B (x, v_1..v_m) = (B x + sum_i L_i^* v_i, -L_1 x + B_1^{-1} v_1, ...)
//   bold-A (x, v_1..v_m) = A x  x  A_1^{-1} v_1  x ... x  A_m^{-1} v_m.
//
// The parallel sums A_i [] B_i are never formed; a primal-dual pair is
// certified by the natural residual of bold-A + bold-B.

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "monosplit/errors.hpp"
#include "monosplit/linalg.hpp"
#include "monosplit/operators.hpp"
#include "monosplit/run.hpp"
#include "monosplit/splitting.hpp"
#include "monosplit/stepsize.hpp"

namespace monosplit {

/// One dual block (A_i, B_i^{-1}, L_i) acting on G_i.
struct DualBlock {
    ResolventOp<DenseVector> A;
    ForwardOp<DenseVector> Binv;
    LinearMap L;
    /// Direct J_{g A_i^{-1}}; when absent it is derived from A through the Moreau identity.
    std::optional<ResolventOp<DenseVector>> inverse_resolvent;

    DenseVector resolve_inverse(double gamma, const DenseVector& v) const {
        return inverse_resolvent ? inverse_resolvent->resolve(gamma, v) : moreau_inverse_resolvent(A, gamma, v);
    }
};

struct CompositeProblem {
    ResolventOp<DenseVector> A;
    ForwardOp<DenseVector> B;
    std::vector<DualBlock> blocks;

    std::size_t primal_dim() const noexcept { return A.domain_dim(); }

    std::vector<std::size_t> dual_dims() const {
        std::vector<std::size_t> d;
        for (const auto& b : blocks) d.push_back(b.L.codomain_dim());
        return d;
    }

    /// (dim H, dim G_1, ..., dim G_m)
    std::vector<std::size_t> product_dims() const {
        std::vector<std::size_t> d{primal_dim()};
        for (auto g : dual_dims()) d.push_back(g);
        return d;
    }

    void validate() const {
        if (blocks.empty()) throw InvalidProblemError("composite problem needs at least one dual block");
        if (B.domain_dim() != primal_dim()) throw InvalidProblemError("B acts on the wrong space");
        bool any_coupling = false;
        for (std::size_t i = 0; i < blocks.size(); ++i) {
            const auto& blk = blocks[i];
            const std::string tag = "block " + std::to_string(i + 1);
            if (blk.L.domain_dim() != primal_dim()) throw InvalidProblemError(tag + ": L has wrong domain");
            if (blk.A.domain_dim() != blk.L.codomain_dim()) throw InvalidProblemError(tag + ": A_i acts on wrong space");
            if (blk.Binv.domain_dim() != blk.L.codomain_dim())
                throw InvalidProblemError(tag + ": B_i^{-1} acts on wrong space");
            if (!blk.L.matrix().is_zero()) any_coupling = true;
        }
        if (!any_coupling) throw InvalidProblemError("composite problem needs at least one nonzero L_i");
    }
};

struct PrimalDualState {
    DenseVector x_cur;
    DenseVector x_prev;
    std::vector<DenseVector> v_cur;
    std::vector<DenseVector> v_prev;

    BlockVector current() const { return pack(x_cur, v_cur); }
    BlockVector previous() const { return pack(x_prev, v_prev); }

    static PrimalDualState from_blocks(const BlockVector& cur, const BlockVector& prev) {
        PrimalDualState s{cur.block(0), prev.block(0), {}, {}};
        for (std::size_t i = 1; i < cur.num_blocks(); ++i) {
            s.v_cur.push_back(cur.block(i));
            s.v_prev.push_back(prev.block(i));
        }
        return s;
    }

private:
    static BlockVector pack(const DenseVector& x, const std::vector<DenseVector>& v) {
        std::vector<DenseVector> blocks{x};
        blocks.insert(blocks.end(), v.begin(), v.end());
        return BlockVector(std::move(blocks));
    }
};

inline constexpr double kCompositeNormTol = 1e-8;
inline constexpr std::size_t kCompositeNormIters = 10000;
/// Applied on top of the stepsize bound because the operator norms are estimates.
inline constexpr double kCompositeSafety = 0.99;

/// max(mu_0, ..., mu_m) + sqrt(sum_i ||L_i||^2), with ||L_i|| from power iteration.
inline double aggregate_mu(const CompositeProblem& p) {
    if (p.blocks.empty()) throw InvalidProblemError("aggregate_mu: no dual blocks");
    double mu_max = p.B.lipschitz_mu();
    double sum_sq = 0.0;
    for (const auto& blk : p.blocks) {
        mu_max = std::max(mu_max, blk.Binv.lipschitz_mu());
        const double ln = power_method_norm(blk.L, kCompositeNormIters, kCompositeNormTol);
        sum_sq += ln * ln;
    }
    if (sum_sq == 0.0) throw InvalidProblemError("aggregate_mu: all L_i vanish");
    return mu_max + std::sqrt(sum_sq);
}

/// ]0, (sqrt2 - 1)/mu[ with mu from aggregate_mu.
inline StepsizeBound composite_stepsize(const CompositeProblem& p) { return stepsize_rfbs_lipschitz(aggregate_mu(p)); }

/// Default stepsize: the safety factor times the supremum.
inline double default_composite_gamma(const CompositeProblem& p) { return kCompositeSafety * composite_stepsize(p).sup; }

namespace detail {

inline DenseVector primal_direction(const CompositeProblem& p, const DenseVector& x, const std::vector<DenseVector>& v,
                                    bool counted) {
    DenseVector s = counted ? p.B.apply(x) : p.B.peek(x);
    for (std::size_t i = 0; i < p.blocks.size(); ++i) s = s + p.blocks[i].L.adjoint(v[i]);
    return s;
}

inline DenseVector dual_direction(const DualBlock& blk, const DenseVector& x, const DenseVector& v, bool counted) {
    return (counted ? blk.Binv.apply(v) : blk.Binv.peek(v)) - blk.L.apply(x);
}

} // namespace detail

/// bold-B on the product space, declared aggregate_mu-Lipschitz.
inline ForwardOp<BlockVector> build_product_forward(const CompositeProblem& p) {
    p.validate();
    const double mu = aggregate_mu(p);
    std::size_t total = p.primal_dim();
    for (auto d : p.dual_dims()) total += d;
    return {[p](const BlockVector& z) {
                if (z.num_blocks() != p.blocks.size() + 1) throw ShapeError("product forward: block count mismatch");
                std::vector<DenseVector> v(z.blocks().begin() + 1, z.blocks().end());
                std::vector<DenseVector> out{detail::primal_direction(p, z.block(0), v, false)};
                for (std::size_t i = 0; i < p.blocks.size(); ++i)
                    out.push_back(detail::dual_direction(p.blocks[i], z.block(0), v[i], false));
                return BlockVector(std::move(out));
            },
            mu, std::nullopt, total, "product_B"};
}

/// Blockwise resolvent (J_{gA} x, J_{gA_1^{-1}} v_1, ..., J_{gA_m^{-1}} v_m).
inline ResolventOp<BlockVector> build_product_resolvent(const CompositeProblem& p) {
    p.validate();
    std::size_t total = p.primal_dim();
    for (auto d : p.dual_dims()) total += d;
    return {[p](double gamma, const BlockVector& z) {
                if (z.num_blocks() != p.blocks.size() + 1) throw ShapeError("product resolvent: block count mismatch");
                std::vector<DenseVector> out{p.A.resolve(gamma, z.block(0))};
                for (std::size_t i = 0; i < p.blocks.size(); ++i)
                    out.push_back(p.blocks[i].resolve_inverse(gamma, z.block(i + 1)));
                return BlockVector(std::move(out));
            },
            total, "product_A"};
}

/// The product-space pair as an operator set for the generic schemes.
inline OperatorSet<BlockVector> product_operator_set(const CompositeProblem& p) {
    return {build_product_resolvent(p), build_product_forward(p), std::nullopt};
}

/// One primal-dual step:
///
///   x+   = J_{gA}(x - g (B xr + sum_i L_i^* vr_i))
///   v_i+ = J_{gA_i^{-1}}(v_i - g (B_i^{-1} vr_i - L_i xr))
///
/// with reflected points xr = 2x - x_prev, vr_i = 2v_i - v_i,prev computed
/// once. One evaluation each of B, B_i^{-1}, L_i and L_i^* per step.
/// Assumes gamma is admissible; solve_composite checks it.
inline PrimalDualState step_pridu(const PrimalDualState& s, const CompositeProblem& p, double gamma) {
    const std::size_t m = p.blocks.size();
    if (s.v_cur.size() != m || s.v_prev.size() != m) throw ShapeError("step_pridu: dual block count mismatch");
    const DenseVector xr = reflect(s.x_cur, s.x_prev);
    std::vector<DenseVector> vr;
    vr.reserve(m);
    for (std::size_t i = 0; i < m; ++i) vr.push_back(reflect(s.v_cur[i], s.v_prev[i]));

    PrimalDualState next{p.A.resolve(gamma, axpy(-gamma, detail::primal_direction(p, xr, vr, true), s.x_cur)),
                         s.x_cur,
                         {},
                         s.v_cur};
    next.v_cur.reserve(m);
    for (std::size_t i = 0; i < m; ++i) {
        const auto& blk = p.blocks[i];
        next.v_cur.push_back(
            blk.resolve_inverse(gamma, axpy(-gamma, detail::dual_direction(blk, xr, vr[i], true), s.v_cur[i])));
    }
    return next;
}

struct PrimalDualInit {
    DenseVector x0;
    std::vector<DenseVector> v0;
    std::optional<DenseVector> x_prev;
    std::optional<std::vector<DenseVector>> v_prev;
};

struct CompositeResult {
    /// Step norms of the x-block; residual column is the product-space residual.
    ConvergenceTrace<DenseVector> primal;
    /// Step norms of the dual blocks; carries E_n of the product space when x_star is set.
    ConvergenceTrace<BlockVector> dual;
    double mu;
    bool converged;
};

/// Product-space natural residual of bold-A + bold-B at (x, v).
inline double product_residual(const CompositeProblem& p, const DenseVector& x, const std::vector<DenseVector>& v,
                               double gamma) {
    const auto ops = product_operator_set(p);
    std::vector<DenseVector> blocks{x};
    blocks.insert(blocks.end(), v.begin(), v.end());
    return natural_residual(BlockVector(std::move(blocks)), ops.A, *ops.B, gamma);
}

/// Certifies (x, v) as a primal-dual solution through the product-space
/// inclusion: true iff its natural residual is at most tol.
inline bool verify_inclusion(const CompositeProblem& p, const DenseVector& x_bar, const std::vector<DenseVector>& v_bar,
                             double tol, double gamma = 1.0) {
    return product_residual(p, x_bar, v_bar, gamma) <= tol;
}

/// Runs step_pridu until the product-space stop metric drops below cfg.tol.
/// cfg.x_star, if set, is a product-space solution used for E_n.
inline CompositeResult solve_composite(const CompositeProblem& p, const PrimalDualInit& init,
                                       const RunConfig<BlockVector>& cfg) {
    p.validate();
    if (!(cfg.tol > 0.0)) throw InvalidConstantError("solve_composite: tol must be positive");
    if (cfg.max_iter == 0) throw InvalidConstantError("solve_composite: max_iter must be positive");
    const double mu = aggregate_mu(p);
    const double gamma = cfg.gamma;
    if (!cfg.allow_unsafe_gamma && !stepsize_rfbs_lipschitz(mu).admits(gamma))
        throw StepsizeError("solve_composite: gamma outside ]0, (sqrt2-1)/mu[");
    if (!(gamma > 0.0)) throw StepsizeError("solve_composite: gamma must be positive");

    const auto ops = product_operator_set(p);
    PrimalDualState s{init.x0, init.x_prev.value_or(init.x0), init.v0, init.v_prev.value_or(init.v0)};
    if (s.v_cur.size() != p.blocks.size()) throw ShapeError("solve_composite: dual block count mismatch");

    CompositeResult result{{Method::rfbs, gamma, {}, s.x_cur, false},
                           {Method::rfbs, gamma, {}, BlockVector(s.v_cur), false},
                           mu,
                           false};

    auto finish = [&](const PrimalDualState& st, bool converged) {
        result.primal.final_x = st.x_cur;
        result.dual.final_x = BlockVector(st.v_cur);
        result.primal.converged = result.dual.converged = result.converged = converged;
    };

    for (std::size_t n = 1; n <= cfg.max_iter; ++n) {
        PrimalDualState next = step_pridu(s, p, gamma);
        const BlockVector z_next = next.current();
        if (!is_finite(z_next)) {
            finish(s, false);
            throw DivergenceError<CompositeResult>("pridu: non-finite iterate at step " + std::to_string(n), result);
        }
        const BlockVector z_cur = s.current();
        TraceRecord primal_rec, dual_rec;
        primal_rec.iter = dual_rec.iter = n;
        primal_rec.step_norm = norm(next.x_cur - s.x_cur);
        dual_rec.step_norm = norm(BlockVector(next.v_cur) - BlockVector(s.v_cur));
        primal_rec.natural_residual = dual_rec.natural_residual = natural_residual(z_next, ops.A, *ops.B, gamma);
        if (cfg.x_star)
            dual_rec.lyapunov_E = lyapunov_E(z_next, z_cur, reflect(z_cur, s.previous()), *ops.B, gamma, *cfg.x_star);
        result.primal.records.push_back(primal_rec);
        result.dual.records.push_back(dual_rec);
        s = std::move(next);

        const double metric = cfg.stop_rule == StopRule::natural_residual ? primal_rec.natural_residual
                                                                          : norm(z_next - z_cur);
        if (!std::isfinite(metric)) {
            finish(s, false);
            throw DivergenceError<CompositeResult>("pridu: residual overflow at step " + std::to_string(n), result);
        }
        if (metric < cfg.tol) {
            finish(s, true);
            return result;
        }
    }
    finish(s, false);
    return result;
}

} // namespace monosplit
