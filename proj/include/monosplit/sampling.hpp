#pragma once

// Sampling-based checks of operator hypotheses. These are debug assertions on
// random pairs, not proofs: monotonicity, Lipschitz continuity and
// cocoercivity are not decidable for a black-box map.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <random>
#include <string>
#include <vector>

#include "monosplit/linalg.hpp"
#include "monosplit/operators.hpp"

namespace monosplit {

struct CheckReport {
    std::string name;
    bool passed = true;
    /// Largest observed violation of the inequality (<= 0 when it holds with slack).
    double worst_violation = -kInfinity;
    std::size_t samples = 0;

    void record(double violation, double tol) {
        ++samples;
        worst_violation = std::max(worst_violation, violation);
        if (violation > tol) passed = false;
    }
};

inline DenseVector random_vector(std::size_t dim, std::mt19937_64& rng, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    DenseVector v(dim);
    for (std::size_t i = 0; i < dim; ++i) v[i] = dist(rng);
    return v;
}

inline DenseVector random_like(const DenseVector& shape, std::mt19937_64& rng, double scale = 1.0) {
    return random_vector(shape.dim(), rng, scale);
}

inline BlockVector random_like(const BlockVector& shape, std::mt19937_64& rng, double scale = 1.0) {
    std::vector<DenseVector> blocks;
    for (const auto& b : shape.blocks()) blocks.push_back(random_vector(b.dim(), rng, scale));
    return BlockVector(std::move(blocks));
}

/// ||Jx - Jy||^2 <= <x - y, Jx - Jy> + tol on random pairs.
template <class V>
CheckReport check_firmly_nonexpansive(const ResolventOp<V>& op, double gamma, const V& shape, std::mt19937_64& rng,
                                      std::size_t samples = 100, double scale = 5.0, double tol = 1e-10) {
    CheckReport r{"firmly_nonexpansive(" + op.label() + ")"};
    for (std::size_t k = 0; k < samples; ++k) {
        const V x = random_like(shape, rng, scale);
        const V y = random_like(shape, rng, scale);
        const V d = op.resolve(gamma, x) - op.resolve(gamma, y);
        r.record(squared_norm(d) - inner(x - y, d), tol);
    }
    return r;
}

/// With p = J x and u = (x - p) / gamma, the pair (p, u) lies in gra A, so
/// J(p + gamma u) must return p.
template <class V>
CheckReport check_resolvent_certificate(const ResolventOp<V>& op, double gamma, const V& shape, std::mt19937_64& rng,
                                        std::size_t samples = 100, double scale = 5.0, double tol = 1e-10) {
    CheckReport r{"resolvent_certificate(" + op.label() + ")"};
    for (std::size_t k = 0; k < samples; ++k) {
        const V x = random_like(shape, rng, scale);
        const V p = op.resolve(gamma, x);
        const V u = (1.0 / gamma) * (x - p);
        r.record(norm(op.resolve(gamma, axpy(gamma, u, p)) - p), tol);
    }
    return r;
}

/// <Bx - By, x - y> >= -tol.
template <class V>
CheckReport check_monotone(const ForwardOp<V>& op, const V& shape, std::mt19937_64& rng, std::size_t samples = 100,
                           double scale = 5.0, double tol = 1e-10) {
    CheckReport r{"monotone(" + op.label() + ")"};
    for (std::size_t k = 0; k < samples; ++k) {
        const V x = random_like(shape, rng, scale);
        const V y = random_like(shape, rng, scale);
        r.record(-inner(op.peek(x) - op.peek(y), x - y), tol);
    }
    return r;
}

/// ||Bx - By|| <= mu ||x - y|| (1 + rel_tol).
template <class V>
CheckReport check_lipschitz(const ForwardOp<V>& op, const V& shape, std::mt19937_64& rng, std::size_t samples = 100,
                            double scale = 5.0, double rel_tol = 1e-10) {
    CheckReport r{"lipschitz(" + op.label() + ")"};
    for (std::size_t k = 0; k < samples; ++k) {
        const V x = random_like(shape, rng, scale);
        const V y = random_like(shape, rng, scale);
        const double lhs = norm(op.peek(x) - op.peek(y));
        const double rhs = op.lipschitz_mu() * norm(x - y) * (1.0 + rel_tol);
        r.record(lhs - rhs, 0.0);
    }
    return r;
}

/// <x - y, Bx - By> >= beta ||Bx - By||^2 - tol. Passes vacuously without a declared beta.
template <class V>
CheckReport check_cocoercive(const ForwardOp<V>& op, const V& shape, std::mt19937_64& rng, std::size_t samples = 100,
                             double scale = 5.0, double tol = 1e-10) {
    CheckReport r{"cocoercive(" + op.label() + ")"};
    if (!op.cocoercive_beta()) return r;
    const double beta = *op.cocoercive_beta();
    for (std::size_t k = 0; k < samples; ++k) {
        const V x = random_like(shape, rng, scale);
        const V y = random_like(shape, rng, scale);
        const V d = op.peek(x) - op.peek(y);
        const double coupling = inner(x - y, d);
        const double bound = std::isinf(beta) ? (squared_norm(d) == 0.0 ? 0.0 : kInfinity) : beta * squared_norm(d);
        r.record(bound - coupling, tol);
    }
    return r;
}

/// <Lx, y> = <x, L^T y> to tol (relative to the magnitudes involved).
inline CheckReport check_adjoint(const LinearMap& l, std::mt19937_64& rng, std::size_t samples = 100,
                                 double tol = 1e-12) {
    CheckReport r{"adjoint(" + l.label() + ")"};
    for (std::size_t k = 0; k < samples; ++k) {
        const DenseVector x = random_vector(l.domain_dim(), rng);
        const DenseVector y = random_vector(l.codomain_dim(), rng);
        const double a = inner(l.apply(x), y);
        const double b = inner(x, l.adjoint(y));
        r.record(std::abs(a - b) / (1.0 + std::abs(a)), tol);
    }
    return r;
}

} // namespace monosplit
