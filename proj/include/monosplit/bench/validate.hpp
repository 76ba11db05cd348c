#pragma once

// Operator invariant suites run by `monosplit validate`.

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "monosplit/bench/csv.hpp"
#include "monosplit/bench/problem_spec.hpp"
#include "monosplit/composite.hpp"
#include "monosplit/sampling.hpp"

namespace monosplit::bench {

inline constexpr std::uint64_t kValidateSeed = 7;
inline constexpr double kValidateGammas[] = {0.1, 1.0, 10.0};

namespace detail {

template <class V>
void resolvent_suite(const ResolventOp<V>& a, const V& shape, std::mt19937_64& rng, std::vector<CheckReport>& out) {
    for (double g : kValidateGammas) {
        auto fne = check_firmly_nonexpansive(a, g, shape, rng);
        fne.name += " gamma=" + format_number(g);
        out.push_back(std::move(fne));
        auto cert = check_resolvent_certificate(a, g, shape, rng, 100, 5.0, 1e-9);
        cert.name += " gamma=" + format_number(g);
        out.push_back(std::move(cert));
    }
}

template <class V>
void forward_suite(const ForwardOp<V>& b, const V& shape, std::mt19937_64& rng, std::vector<CheckReport>& out) {
    out.push_back(check_monotone(b, shape, rng));
    out.push_back(check_lipschitz(b, shape, rng, 100, 5.0, 1e-6));
    out.push_back(check_cocoercive(b, shape, rng, 100, 5.0, 1e-9));
}

inline CheckReport scalar_check(std::string name, double violation, double tol) {
    CheckReport r{std::move(name)};
    r.record(violation, tol);
    return r;
}

} // namespace detail

/// Sampling checks of every operator in the problem plus, when a known
/// solution ships, its natural residual.
inline std::vector<CheckReport> validate_problem(const ProblemSpec& spec, std::uint64_t seed = kValidateSeed) {
    const ProblemInstance inst = instantiate(spec);
    std::mt19937_64 rng(seed);
    std::vector<CheckReport> out;
    const DenseVector shape(spec.dim);

    if (inst.ops) {
        const auto& ops = *inst.ops;
        detail::resolvent_suite(ops.A, shape, rng, out);
        detail::forward_suite(*ops.B, shape, rng, out);
        if (ops.C) detail::forward_suite(*ops.C, shape, rng, out);
        if (spec.known_solution) {
            const DenseVector xs(*spec.known_solution);
            const double res = ops.C ? natural_residual(xs, ops.A, *ops.B, *ops.C, 1.0)
                                     : natural_residual(xs, ops.A, *ops.B, 1.0);
            out.push_back(detail::scalar_check("known_solution residual", res, 1e-8));
        }
        return out;
    }

    const CompositeProblem& p = *inst.composite;
    detail::resolvent_suite(p.A, shape, rng, out);
    detail::forward_suite(p.B, shape, rng, out);
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
        const auto& blk = p.blocks[i];
        const DenseVector dual_shape(blk.L.codomain_dim());
        detail::resolvent_suite(blk.A, dual_shape, rng, out);
        detail::forward_suite(blk.Binv, dual_shape, rng, out);
        out.push_back(check_adjoint(blk.L, rng));
        for (double g : kValidateGammas) {
            auto r = check_firmly_nonexpansive(inverse_resolvent(blk.A), g, dual_shape, rng);
            r.name = "firmly_nonexpansive(inverse block " + std::to_string(i + 1) + ") gamma=" + format_number(g);
            out.push_back(std::move(r));
        }
    }

    const auto prod = product_operator_set(p);
    const BlockVector pshape = unflatten(DenseVector(initial_point(inst).dim()), p.product_dims());
    detail::resolvent_suite(prod.A, pshape, rng, out);
    out.push_back(check_monotone(*prod.B, pshape, rng));
    out.push_back(check_lipschitz(*prod.B, pshape, rng, 100, 5.0, 1e-6));

    // With B = 0 and B_i^{-1} = 0 the product operator is skew: <Bz, z> = 0.
    {
        CompositeProblem skew = p;
        skew.B = ForwardOp<DenseVector>([](const DenseVector& x) { return zeros_like(x); }, 0.0, kInfinity,
                                        p.primal_dim(), "zero");
        for (auto& blk : skew.blocks) {
            const std::size_t d = blk.L.codomain_dim();
            blk.Binv = ForwardOp<DenseVector>([](const DenseVector& v) { return zeros_like(v); }, 0.0, kInfinity, d,
                                              "zero");
        }
        const auto sb = build_product_forward(skew);
        CheckReport r{"skew cancellation(product)"};
        for (int k = 0; k < 100; ++k) {
            const BlockVector z = random_like(pshape, rng, 5.0);
            r.record(std::abs(inner(sb.peek(z), z)) / (1.0 + squared_norm(z)), 1e-12);
        }
        out.push_back(std::move(r));
    }

    if (spec.known_solution) {
        const BlockVector zs = unflatten(DenseVector(*spec.known_solution), p.product_dims());
        std::vector<DenseVector> v(zs.blocks().begin() + 1, zs.blocks().end());
        out.push_back(detail::scalar_check("known_solution residual", product_residual(p, zs.block(0), v, 1.0), 1e-8));
    }
    return out;
}

} // namespace monosplit::bench
