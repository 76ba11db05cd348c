// Acceptance checks. Prints one PASS/FAIL line per criterion; exit status is
// the number of failures.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "monosplit/bench/matrix.hpp"
#include "monosplit/bench/registry.hpp"
#include "monosplit/composite.hpp"
#include "monosplit/monosplit.hpp"
#include "monosplit/sampling.hpp"
#include "oracles.hpp"

using namespace monosplit;
using namespace monosplit::bench;

namespace {

const double kSqrt2m1 = std::sqrt(2.0) - 1.0;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            detail << " [failed: " << what << "]";
        }
    }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

template <class V>
RunConfig<V> fixed_steps(double gamma, std::size_t n) {
    RunConfig<V> cfg;
    cfg.gamma = gamma;
    cfg.tol = 1e-300;
    cfg.max_iter = n;
    return cfg;
}

OperatorSet<DenseVector> two_op(const ProblemSpec& spec) { return *instantiate(spec).ops; }

// 1 ---------------------------------------------------------------------------
Outcome lyapunov_descent() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto spec = skew_box_spec();
    const auto ops = two_op(spec);
    auto cfg = fixed_steps<DenseVector>(0.9 * kSqrt2m1, 1000);
    cfg.x_star = DenseVector(*spec.known_solution);
    const auto t = run(Method::rfbs, ops, InitialPoint<DenseVector>{DenseVector(*spec.x0), std::nullopt}, cfg);
    o.require(t.records.size() == 1000, "1000 iterations");
    double worst_rise = -kInfinity, lowest = kInfinity;
    for (std::size_t k = 0; k < t.records.size(); ++k) {
        const double e = *t.records[k].lyapunov_E;
        lowest = std::min(lowest, e);
        if (k > 0) worst_rise = std::max(worst_rise, e - *t.records[k - 1].lyapunov_E);
    }
    const double secs = seconds_since(t0);
    o.require(worst_rise <= 1e-10, "E nonincreasing");
    o.require(lowest >= -1e-10, "E nonnegative");
    o.require(secs < 1.0, "runtime < 1 s");
    o.detail << "max E_{n+1}-E_n = " << worst_rise << ", min E_n = " << lowest << ", " << secs << " s";
    return o;
}

// 2 ---------------------------------------------------------------------------
Outcome cocoercive_descent() {
    Outcome o;
    const auto t0 = Clock::now();
    const auto spec = lasso_spec();
    const auto ops = two_op(spec);
    const double beta = *ops.B->cocoercive_beta();
    const double eps = 0.1;
    const double gamma = beta * (1.0 - eps) / 2.0;
    const DenseVector x0(*spec.x0);

    // independent oracle: plain forward-backward run far past the target accuracy
    const OperatorSet<DenseVector> fbs_ops{ops.A, std::nullopt, ops.B};
    RunConfig<DenseVector> oracle_cfg;
    oracle_cfg.gamma = beta;
    oracle_cfg.tol = 1e-14;
    oracle_cfg.max_iter = 1000000;
    const auto oracle_run = run(Method::fbs, fbs_ops, InitialPoint<DenseVector>{x0, std::nullopt}, oracle_cfg);
    o.require(oracle_run.converged, "oracle converged");
    const DenseVector x_star = oracle_run.final_x;

    auto descent_cfg = fixed_steps<DenseVector>(gamma, 2000);
    descent_cfg.epsilon = eps;
    descent_cfg.x_star = x_star;
    const auto d = run(Method::rfbs, ops, InitialPoint<DenseVector>{x0, std::nullopt}, descent_cfg);
    double worst_rise = -kInfinity;
    for (std::size_t k = 1; k < d.records.size(); ++k)
        worst_rise = std::max(worst_rise, *d.records[k].lyapunov_cocoercive - *d.records[k - 1].lyapunov_cocoercive);

    RunConfig<DenseVector> cfg;
    cfg.gamma = gamma;
    cfg.epsilon = eps;
    cfg.tol = 1e-8;
    cfg.max_iter = 50000;
    const auto r = run(Method::rfbs, ops, InitialPoint<DenseVector>{x0, std::nullopt}, cfg);
    const double err = norm(r.final_x - x_star);
    const double secs = seconds_since(t0);
    o.require(d.records.size() == 2000, "2000 iterations");
    o.require(worst_rise <= 1e-10, "decreasing quantity nonincreasing");
    o.require(r.converged && r.records.back().natural_residual <= 1e-8, "residual <= 1e-8 within 50000");
    o.require(err <= 1e-6, "matches FBS oracle");
    o.require(secs < 5.0, "runtime < 5 s");
    o.detail << "gamma = " << gamma << ", max rise = " << worst_rise << ", iterations = " << r.records.size()
             << ", residual = " << r.records.back().natural_residual << ", |x - x_fbs| = " << err << ", " << secs
             << " s";
    return o;
}

// 3 ---------------------------------------------------------------------------
Outcome srfb_descent() {
    Outcome o;
    const auto spec = three_op_spec();
    const auto ops = two_op(spec);
    const double zeta = 0.25, xi = 1.0;
    const auto bound = stepsize_srfb(ops.B->lipschitz_mu(), *ops.C->cocoercive_beta(), zeta, xi);
    auto cfg = fixed_steps<DenseVector>(0.9 * bound.sup, 1000);
    cfg.zeta = zeta;
    cfg.xi = xi;
    o.require(spec.known_solution.has_value(), "verified zero available");
    const DenseVector x_star(*spec.known_solution);
    o.require(natural_residual(x_star, ops.A, *ops.B, *ops.C, 1.0) <= 1e-12, "zero verified");
    cfg.x_star = x_star;
    const auto t = run(Method::srfb, ops, InitialPoint<DenseVector>{DenseVector(*spec.x0), std::nullopt}, cfg);
    // the driver may stop early once the residual is exactly 0, so step by hand
    IterateState<DenseVector> s(DenseVector(*spec.x0));
    std::vector<double> alpha;
    for (int n = 0; n < 1000; ++n) {
        const DenseVector y_prev = reflect(s.x_cur, s.x_prev);
        const auto next = step_srfb(s, ops.A, *ops.B, *ops.C, cfg.gamma);
        alpha.push_back(lyapunov_alpha(next.x_cur, s.x_cur, y_prev, *ops.B, cfg.gamma, zeta, x_star));
        s = next;
    }
    double worst_rise = -kInfinity;
    for (std::size_t k = 1; k < alpha.size(); ++k) worst_rise = std::max(worst_rise, alpha[k] - alpha[k - 1]);
    bool same = !t.records.empty();
    for (std::size_t k = 0; k < t.records.size(); ++k) same = same && *t.records[k].lyapunov_alpha == alpha[k];
    const double err = norm(t.final_x - x_star);
    o.require(same, "driver alpha matches hand-stepped alpha");
    o.require(worst_rise <= 1e-10, "alpha nonincreasing over 1000 steps");
    o.require(err <= 1e-6 && norm(s.x_cur - x_star) <= 1e-6, "converges to the zero");
    o.detail << "gamma = " << cfg.gamma << " (sup " << bound.sup << "), driver stopped after " << t.records.size()
             << ", max rise over 1000 = " << worst_rise << ", |x - x*| = " << err;
    return o;
}

// 4 ---------------------------------------------------------------------------
template <class V>
bool same_trace(const ConvergenceTrace<V>& a, const ConvergenceTrace<V>& b) {
    if (a.records.size() != b.records.size() || !(a.final_x == b.final_x)) return false;
    for (std::size_t k = 0; k < a.records.size(); ++k)
        if (a.records[k].step_norm != b.records[k].step_norm ||
            a.records[k].natural_residual != b.records[k].natural_residual)
            return false;
    return true;
}

template <class V>
ForwardOp<V> zero_op(std::size_t dim) {
    return ForwardOp<V>([](const V& x) { return zeros_like(x); }, 0.0, kInfinity, dim, "zero");
}

Outcome reductions() {
    Outcome o;
    int compared = 0;
    const std::size_t steps = 500;
    for (const auto& spec : registry()) {
        const auto inst = instantiate(spec);
        if (inst.ops) {
            const auto& ops = *inst.ops;
            const DenseVector x0 = initial_point(inst);
            const InitialPoint<DenseVector> init{x0, std::nullopt};
            const auto z = zero_op<DenseVector>(spec.dim);

            // C = 0: srfb against rfbs with the same B
            const double g1 = 0.9 * stepsize_rfbs_lipschitz(ops.B->lipschitz_mu()).sup;
            const auto r = run(Method::rfbs, OperatorSet<DenseVector>{ops.A, ops.B, std::nullopt}, init,
                               fixed_steps<DenseVector>(g1, steps));
            auto cfg = fixed_steps<DenseVector>(g1, steps);
            cfg.allow_unsafe_gamma = true;
            const auto s = run(Method::srfb, OperatorSet<DenseVector>{ops.A, ops.B, z}, init, cfg);
            o.require(same_trace(r, s), spec.name + ": srfb(C=0) == rfbs");
            ++compared;

            // B = 0: srfb against fbs with a cocoercive operator
            const ForwardOp<DenseVector>* coco = ops.C ? &*ops.C : (ops.B->cocoercive_beta() ? &*ops.B : nullptr);
            if (coco) {
                const double g2 = 0.9 * monosplit::detail::srfb_bound_without_lipschitz_part(*coco->cocoercive_beta(), 0.25, 1.0).sup;
                const auto f = run(Method::fbs, OperatorSet<DenseVector>{ops.A, std::nullopt, *coco}, init,
                                   fixed_steps<DenseVector>(g2, steps));
                const auto s2 = run(Method::srfb, OperatorSet<DenseVector>{ops.A, z, *coco}, init,
                                    fixed_steps<DenseVector>(g2, steps));
                o.require(same_trace(f, s2), spec.name + ": srfb(B=0) == fbs");
                ++compared;
            }
        } else {
            const auto& cp = *inst.composite;
            const auto prod = product_operator_set(cp);
            const BlockVector z0 = unflatten(initial_point(inst), cp.product_dims());
            const InitialPoint<BlockVector> init{z0, std::nullopt};
            const double g = default_composite_gamma(cp);
            const auto r = run(Method::rfbs, prod, init, fixed_steps<BlockVector>(g, steps));
            auto cfg = fixed_steps<BlockVector>(g, steps);
            cfg.allow_unsafe_gamma = true;
            const auto s = run(Method::srfb,
                               OperatorSet<BlockVector>{prod.A, prod.B, zero_op<BlockVector>(z0.total_dim())}, init,
                               cfg);
            o.require(same_trace(r, s), spec.name + ": srfb(C=0) == rfbs on the product space");
            ++compared;
        }
    }
    o.detail << compared << " trace pairs of " << steps << " steps compared bit for bit";
    return o;
}

// 5 ---------------------------------------------------------------------------
Outcome product_equivalence() {
    Outcome o;
    const auto spec = composite_spec();
    const CompositeProblem p = *instantiate(spec).composite;
    const auto prod = product_operator_set(p);
    const double gamma = default_composite_gamma(p);
    std::mt19937_64 rng(55);
    const BlockVector shape = unflatten(DenseVector(spec.x0->size()), p.product_dims());
    const BlockVector z0 = random_like(shape, rng), zm1 = random_like(shape, rng);
    PrimalDualState s = PrimalDualState::from_blocks(z0, zm1);
    IterateState<BlockVector> z(z0, zm1);
    double worst = 0.0;
    for (int n = 0; n < 200; ++n) {
        s = step_pridu(s, p, gamma);
        z = step_rfbs(z, prod.A, *prod.B, gamma);
        worst = std::max(worst, max_abs_diff(s.current(), z.x_cur));
    }
    RunConfig<BlockVector> cfg;
    cfg.gamma = gamma;
    cfg.tol = 1e-12;
    cfg.max_iter = 100000;
    const PrimalDualState start = PrimalDualState::from_blocks(shape, shape);
    const auto r = solve_composite(p, PrimalDualInit{start.x_cur, start.v_cur, std::nullopt, std::nullopt}, cfg);
    const std::vector<DenseVector> v(r.dual.final_x.blocks().begin(), r.dual.final_x.blocks().end());
    const bool certified = verify_inclusion(p, r.primal.final_x, v, 1e-7);
    std::vector<DenseVector> blocks{r.primal.final_x};
    blocks.insert(blocks.end(), v.begin(), v.end());
    const double err = norm(flatten(BlockVector(blocks)) - DenseVector(*spec.known_solution));
    o.require(worst <= 1e-10, "pridu == product rfbs");
    o.require(r.converged, "solver converged");
    o.require(certified, "verify_inclusion at 1e-7");
    o.detail << "max coordinate gap over 200 steps = " << worst << ", limit residual = "
             << product_residual(p, r.primal.final_x, v, 1.0) << ", |z - z*| = " << err;
    return o;
}

// 6 ---------------------------------------------------------------------------
Outcome stepsizes() {
    Outcome o;
    int checked = 0;
    auto expect = [&](const StepsizeBound& b, double sup, bool inclusive, const std::string& what) {
        ++checked;
        o.require(std::abs(b.sup - sup) <= 1e-12 && b.inclusive == inclusive, what);
        o.require(b.admits(sup) == inclusive, what + " endpoint");
        o.require(b.admits(sup * (1.0 - 1e-9)), what + " interior");
    };
    const double r2 = std::sqrt(2.0);
    expect(stepsize_fbfs(1.0), 1.0, false, "fbfs(1)");
    expect(stepsize_fbfs(2.0), 0.5, false, "fbfs(2)");
    expect(stepsize_fbfs(0.5), 2.0, false, "fbfs(0.5)");
    expect(stepsize_frbs(1.0), 0.5, false, "frbs(1)");
    expect(stepsize_frbs(0.5), 1.0, false, "frbs(0.5)");
    expect(stepsize_frbs(10.0), 0.05, false, "frbs(10)");
    expect(stepsize_rfbs_lipschitz(1.0), r2 - 1.0, false, "rfbs(1)");
    expect(stepsize_rfbs_lipschitz(r2 - 1.0), 1.0, false, "rfbs(sqrt2-1)");
    expect(stepsize_rfbs_lipschitz(2.0), (r2 - 1.0) / 2.0, false, "rfbs(2)");
    expect(stepsize_rfbs_cocoercive(1.0, 0.5), 0.25, true, "rfbs_coco(1,0.5)");
    expect(stepsize_rfbs_cocoercive(2.0, 0.01), 0.99, true, "rfbs_coco(2,0.01)");
    expect(stepsize_rfbs_cocoercive(1.0, 0.999), 0.0005, true, "rfbs_coco(1,0.999)");
    expect(stepsize_srfb(1.0, 1.0, 0.25, 1.0), 0.5 / (r2 + 1.0 + 2.0), false, "srfb(1,1,0.25,1)");
    expect(stepsize_srfb(2.0, 0.5, 0.4, 2.0), 0.2 / (2.0 * (r2 + 1.0) + 2.0), false, "srfb(2,0.5,0.4,2)");
    ++checked;
    o.require(std::abs(stepsize_srfb(1.0, kInfinity, 1e-12, 1.0).sup - (r2 - 1.0)) <= 1e-11, "srfb beta=inf limit");
    o.detail << checked << " bounds checked";
    return o;
}

// 7 ---------------------------------------------------------------------------
std::vector<double> as_std(const DenseVector& v) { return {v.begin(), v.end()}; }

Outcome prox_oracles() {
    Outcome o;
    std::mt19937_64 rng(77);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> pos(0.05, 3.0);
    double worst_l1 = 0.0, worst_box = 0.0, worst_quad = 0.0, worst_moreau = 0.0;
    for (int k = 0; k < 100; ++k) {
        const std::size_t n = 1 + k % 4;
        const DenseVector x = random_vector(n, rng, 4.0);
        const double gamma = pos(rng);

        const double lambda = pos(rng);
        const DenseVector l1 = prox_l1(gamma, lambda, x);
        worst_l1 = std::max(worst_l1, oracle::max_diff(as_std(l1), oracle::prox_l1(gamma, lambda, as_std(x))));

        DenseVector lo(n), hi(n);
        for (std::size_t i = 0; i < n; ++i) {
            const double a = 2.0 * u(rng), b = 2.0 * u(rng);
            lo[i] = std::min(a, b);
            hi[i] = std::max(a, b);
        }
        const DenseVector box = proj_box(lo, hi, x);
        worst_box = std::max(worst_box, oracle::max_diff(as_std(box), oracle::proj_box(as_std(lo), as_std(hi), as_std(x))));

        Matrix r(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) r(i, j) = u(rng);
        const Matrix q = gram(r);
        const DenseVector c = random_vector(n, rng);
        const DenseVector quad = prox_quadratic(q, c, gamma, x);
        worst_quad = std::max(worst_quad,
                              oracle::max_diff(as_std(quad), oracle::prox_quadratic(q.to_rows(), as_std(c), gamma, as_std(x))));

        for (const auto& op : {l1_resolvent(lambda, n), box_resolvent(lo, hi), quadratic_resolvent(q, c)}) {
            const DenseVector back = op.resolve(gamma, x) + gamma * moreau_inverse_resolvent(op, 1.0 / gamma, (1.0 / gamma) * x);
            worst_moreau = std::max(worst_moreau, max_abs_diff(back, x));
        }
    }
    o.require(worst_l1 <= 1e-6, "prox_l1 oracle");
    o.require(worst_box <= 1e-6, "proj_box oracle");
    o.require(worst_quad <= 1e-6, "prox_quadratic oracle");
    o.require(worst_moreau <= 1e-12, "Moreau reconstruction");
    o.detail << "max gaps: l1 " << worst_l1 << ", box " << worst_box << ", quadratic " << worst_quad << ", Moreau "
             << worst_moreau;
    return o;
}

// 8 ---------------------------------------------------------------------------
Outcome counterexample() {
    Outcome o;
    const auto rot = affine_forward(Matrix{{0.0, 1.0}, {-1.0, 0.0}}, DenseVector(2), false, "rotation");
    const auto a = zero_resolvent(2);
    const DenseVector x0{1.0, 0.5};
    const double gamma = 0.9 * kSqrt2m1;

    auto cfg = fixed_steps<DenseVector>(gamma, 200);
    cfg.allow_unsafe_gamma = true;
    cfg.x_star = DenseVector(2);
    const auto f = run(Method::fbs, OperatorSet<DenseVector>{a, std::nullopt, rot}, InitialPoint<DenseVector>{x0, std::nullopt},
                       cfg);
    // replay the iterates for the norm ratio
    IterateState<DenseVector> s(x0);
    double worst_ratio = 0.0;
    bool increasing = true;
    for (std::size_t k = 0; k < f.records.size(); ++k) {
        const auto next = step_fbs(s, a, rot, gamma);
        const double ratio = norm(next.x_cur) / norm(s.x_cur);
        worst_ratio = std::max(worst_ratio, std::abs(ratio / std::sqrt(1.0 + gamma * gamma) - 1.0));
        if (k > 0 && !(f.records[k].natural_residual > f.records[k - 1].natural_residual)) increasing = false;
        s = next;
    }
    o.require(f.records.size() == 200 && !f.converged, "fbs does not converge");
    o.require(increasing, "fbs residual strictly increasing");
    o.require(worst_ratio <= 1e-9, "norm grows by sqrt(1+gamma^2)");

    RunConfig<DenseVector> rcfg;
    rcfg.gamma = gamma;
    rcfg.tol = 1e-8;
    rcfg.max_iter = 100000;
    const auto r = run(Method::rfbs, OperatorSet<DenseVector>{a, rot, std::nullopt}, InitialPoint<DenseVector>{x0, std::nullopt},
                       rcfg);
    o.require(r.converged && r.records.back().natural_residual < 1e-8, "rfbs converges below 1e-8");
    o.detail << "fbs residual " << f.records.front().natural_residual << " -> " << f.records.back().natural_residual
             << ", ratio error " << worst_ratio << "; rfbs residual " << r.records.back().natural_residual << " after "
             << r.records.size() << " steps";
    return o;
}

// 9 ---------------------------------------------------------------------------
Outcome call_counts() {
    Outcome o;
    const auto spec = skew_box_spec();
    const auto base = two_op(spec);
    const std::size_t n = 137;
    const InitialPoint<DenseVector> init{DenseVector(*spec.x0), std::nullopt};
    auto count = [&](Method m, double gamma) {
        OperatorSet<DenseVector> ops{base.A, base.B->instrument(), std::nullopt};
        const auto t = run(m, ops, init, fixed_steps<DenseVector>(gamma, n));
        o.require(t.records.size() == n, std::string(to_string(m)) + " ran N steps");
        return ops.B->calls();
    };
    const auto fbfs = count(Method::fbfs, 0.5);
    const auto frbs = count(Method::frbs, 0.25);
    const auto rfbs = count(Method::rfbs, 0.3);
    o.require(fbfs == 2 * n, "fbfs 2N");
    o.require(frbs == n + 1, "frbs N+1");
    o.require(rfbs == n, "rfbs N");
    o.detail << "N = " << n << ": fbfs " << fbfs << ", frbs " << frbs << ", rfbs " << rfbs;
    return o;
}

} // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"Lyapunov descent of RFBS on skew-box", lyapunov_descent},
        {"cocoercive-regime descent and FBS agreement on lasso", cocoercive_descent},
        {"SRFB descent and convergence on three-op", srfb_descent},
        {"reduction identities of SRFB", reductions},
        {"primal-dual vs product-space RFBS on composite-1", product_equivalence},
        {"stepsize validators", stepsizes},
        {"prox oracles and Moreau identity", prox_oracles},
        {"FBS expands on a rotation, RFBS converges", counterexample},
        {"forward-call economy", call_counts},
    };
    int failures = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome r;
        try {
            r = criteria[i].second();
        } catch (const std::exception& e) {
            r.pass = false;
            r.detail << "exception: " << e.what();
        }
        if (!r.pass) ++failures;
        std::printf("%s %zu: %s | %s\n", r.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                    r.detail.str().c_str());
    }
    return failures;
}
