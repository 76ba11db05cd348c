#pragma once

// The operator catalog. A maximally monotone operator A is represented only by
// its resolvent map (gamma, x) -> J_{gamma A} x; single-valued monotone
// operators carry their declared Lipschitz modulus and, when they have one,
// their cocoercivity constant.

#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <utility>

#include "monosplit/errors.hpp"
#include "monosplit/linalg.hpp"

namespace monosplit {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Resolvent of a maximally monotone operator on the vector space V.
template <class V>
class ResolventOp {
public:
    using Map = std::function<V(double gamma, const V& x)>;

    ResolventOp(Map resolve, std::size_t domain_dim, std::string label)
        : resolve_(std::move(resolve)), domain_dim_(domain_dim), label_(std::move(label)) {
        if (domain_dim_ == 0) throw InvalidOperatorError("ResolventOp: domain dimension must be positive");
    }

    /// J_{gamma A} x
    V resolve(double gamma, const V& x) const {
        if (!(gamma > 0.0)) throw InvalidConstantError("resolve: gamma must be positive");
        return resolve_(gamma, x);
    }

    std::size_t domain_dim() const noexcept { return domain_dim_; }
    const std::string& label() const noexcept { return label_; }

private:
    Map resolve_;
    std::size_t domain_dim_;
    std::string label_;
};

using CallCounter = std::atomic<std::uint64_t>;

/// Single-valued monotone operator with declared constants.
///
/// Calls through apply() are counted when a counter is attached (see
/// instrument()); peek() evaluates the same map without counting and is what
/// residual and Lyapunov diagnostics use.
template <class V>
class ForwardOp {
public:
    using Map = std::function<V(const V& x)>;

    ForwardOp(Map apply, double lipschitz_mu, std::optional<double> cocoercive_beta, std::size_t domain_dim,
              std::string label)
        : apply_(std::move(apply)),
          lipschitz_mu_(lipschitz_mu),
          cocoercive_beta_(cocoercive_beta),
          domain_dim_(domain_dim),
          label_(std::move(label)) {
        if (!(lipschitz_mu_ >= 0.0) || !std::isfinite(lipschitz_mu_))
            throw InvalidConstantError("ForwardOp: Lipschitz constant must be finite and nonnegative");
        if (cocoercive_beta_ && !(*cocoercive_beta_ > 0.0))
            throw InvalidConstantError("ForwardOp: cocoercivity constant must be positive");
        if (domain_dim_ == 0) throw InvalidOperatorError("ForwardOp: domain dimension must be positive");
    }

    V apply(const V& x) const {
        if (counter_) counter_->fetch_add(1, std::memory_order_relaxed);
        return apply_(x);
    }
    V operator()(const V& x) const { return apply(x); }
    V peek(const V& x) const { return apply_(x); }

    double lipschitz_mu() const noexcept { return lipschitz_mu_; }
    const std::optional<double>& cocoercive_beta() const noexcept { return cocoercive_beta_; }
    std::size_t domain_dim() const noexcept { return domain_dim_; }
    const std::string& label() const noexcept { return label_; }

    /// Number of counted apply() calls so far; 0 when not instrumented.
    std::uint64_t calls() const noexcept { return counter_ ? counter_->load() : 0; }

    /// A copy of this operator that counts its apply() calls on a fresh counter.
    ForwardOp instrument() const {
        ForwardOp copy = *this;
        copy.counter_ = std::make_shared<CallCounter>(0);
        return copy;
    }

private:
    Map apply_;
    double lipschitz_mu_;
    std::optional<double> cocoercive_beta_;
    std::size_t domain_dim_;
    std::string label_;
    std::shared_ptr<CallCounter> counter_;
};

/// Bounded linear map H -> G with its adjoint (the transpose).
class LinearMap {
public:
    explicit LinearMap(Matrix matrix, std::string label = "L") : matrix_(std::move(matrix)), label_(std::move(label)) {}

    DenseVector apply(const DenseVector& x) const { return matrix_.apply(x); }
    DenseVector adjoint(const DenseVector& y) const { return matrix_.apply_transpose(y); }

    std::size_t domain_dim() const noexcept { return matrix_.cols(); }
    std::size_t codomain_dim() const noexcept { return matrix_.rows(); }
    const Matrix& matrix() const noexcept { return matrix_; }
    const std::string& label() const noexcept { return label_; }

private:
    Matrix matrix_;
    std::string label_;
};

// ---------------------------------------------------------------------------
// Proximity operators and projections

inline DenseVector prox_zero(double gamma, const DenseVector& x) {
    if (!(gamma > 0.0)) throw InvalidConstantError("prox_zero: gamma must be positive");
    return x;
}

/// Soft thresholding: prox of gamma * lambda * ||.||_1.
inline DenseVector prox_l1(double gamma, double lambda, const DenseVector& x) {
    if (!(gamma > 0.0) || !(lambda > 0.0)) throw InvalidConstantError("prox_l1: gamma and lambda must be positive");
    const double t = gamma * lambda;
    DenseVector out(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) {
        const double mag = std::max(std::abs(x[i]) - t, 0.0);
        out[i] = std::copysign(mag, x[i]);
        if (mag == 0.0) out[i] = 0.0;
    }
    return out;
}

inline void validate_box(const DenseVector& lo, const DenseVector& hi) {
    detail::require_same_dim(lo, hi, "box");
    for (std::size_t i = 0; i < lo.dim(); ++i)
        if (!(lo[i] <= hi[i]))
            throw InvalidSetError("box: lower bound exceeds upper bound in coordinate " + std::to_string(i));
}

/// Projection onto [lo, hi]; the resolvent of the box normal cone for every gamma.
inline DenseVector proj_box(const DenseVector& lo, const DenseVector& hi, const DenseVector& x) {
    validate_box(lo, hi);
    detail::require_same_dim(lo, x, "proj_box");
    DenseVector out(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) out[i] = std::clamp(x[i], lo[i], hi[i]);
    return out;
}

/// Prox of f(y) = 1/2 <y, Q y> + <c, y>.
///
/// Q is diagonalised once at construction; every resolve is then the solve
/// of (I + gamma Q) y = x - gamma c through the cached eigenbasis, for any
/// gamma, without mutating state.
class QuadraticProx {
public:
    QuadraticProx(const Matrix& q, DenseVector c) : c_(std::move(c)), n_(q.rows()) {
        if (q.rows() != q.cols()) throw InvalidOperatorError("prox_quadratic: Q must be square");
        if (c_.dim() != n_) throw ShapeError("prox_quadratic: c has wrong dimension");
        double scale = 0.0;
        Eigen::MatrixXd qm(n_, n_);
        for (std::size_t i = 0; i < n_; ++i)
            for (std::size_t j = 0; j < n_; ++j) {
                qm(i, j) = q(i, j);
                scale = std::max(scale, std::abs(q(i, j)));
            }
        if (!q.is_symmetric(1e-12 * std::max(1.0, scale)))
            throw InvalidOperatorError("prox_quadratic: Q must be symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(qm);
        if (eig.info() != Eigen::Success) throw InvalidOperatorError("prox_quadratic: eigendecomposition failed");
        if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(1.0, scale))
            throw InvalidOperatorError("prox_quadratic: Q must be positive semidefinite");
        eigenvalues_ = eig.eigenvalues().cwiseMax(0.0);
        eigenvectors_ = eig.eigenvectors();
    }

    DenseVector operator()(double gamma, const DenseVector& x) const {
        if (!(gamma > 0.0)) throw InvalidConstantError("prox_quadratic: gamma must be positive");
        if (x.dim() != n_) throw ShapeError("prox_quadratic: dimension mismatch");
        Eigen::VectorXd rhs(n_);
        for (std::size_t i = 0; i < n_; ++i) rhs(static_cast<Eigen::Index>(i)) = x[i] - gamma * c_[i];
        Eigen::VectorXd coeffs = eigenvectors_.transpose() * rhs;
        for (Eigen::Index k = 0; k < coeffs.size(); ++k) coeffs(k) /= 1.0 + gamma * eigenvalues_(k);
        const Eigen::VectorXd y = eigenvectors_ * coeffs;
        DenseVector out(n_);
        for (std::size_t i = 0; i < n_; ++i) out[i] = y(static_cast<Eigen::Index>(i));
        return out;
    }

    std::size_t dim() const noexcept { return n_; }

private:
    DenseVector c_;
    std::size_t n_;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
};

inline DenseVector prox_quadratic(const Matrix& q, const DenseVector& c, double gamma, const DenseVector& x) {
    return QuadraticProx(q, c)(gamma, x);
}

/// J_{gamma A^{-1}} x through the Moreau identity, given the resolvent of A:
/// x - gamma * J_{gamma^{-1} A}(x / gamma).
template <class V>
V moreau_inverse_resolvent(const ResolventOp<V>& inner_op, double gamma, const V& x) {
    if (!(gamma > 0.0)) throw InvalidConstantError("moreau_inverse_resolvent: gamma must be positive");
    const V scaled = (1.0 / gamma) * x;
    return axpy(-gamma, inner_op.resolve(1.0 / gamma, scaled), x);
}

// ---------------------------------------------------------------------------
// Catalog as ResolventOp values

inline ResolventOp<DenseVector> zero_resolvent(std::size_t dim) {
    return {[](double gamma, const DenseVector& x) { return prox_zero(gamma, x); }, dim, "zero"};
}

inline ResolventOp<DenseVector> l1_resolvent(double lambda, std::size_t dim) {
    if (!(lambda > 0.0)) throw InvalidConstantError("l1_resolvent: lambda must be positive");
    return {[lambda](double gamma, const DenseVector& x) { return prox_l1(gamma, lambda, x); }, dim,
            "l1(" + std::to_string(lambda) + ")"};
}

inline ResolventOp<DenseVector> box_resolvent(DenseVector lo, DenseVector hi) {
    validate_box(lo, hi);
    const std::size_t dim = lo.dim();
    return {[lo = std::move(lo), hi = std::move(hi)](double, const DenseVector& x) { return proj_box(lo, hi, x); },
            dim, "box"};
}

inline ResolventOp<DenseVector> quadratic_resolvent(const Matrix& q, DenseVector c) {
    auto prox = std::make_shared<const QuadraticProx>(q, std::move(c));
    const std::size_t dim = prox->dim();
    return {[prox](double gamma, const DenseVector& x) { return (*prox)(gamma, x); }, dim, "quadratic"};
}

/// Resolvent of A^{-1} built from the resolvent of A.
template <class V>
ResolventOp<V> inverse_resolvent(ResolventOp<V> inner_op) {
    const std::size_t dim = inner_op.domain_dim();
    std::string label = "inv(" + inner_op.label() + ")";
    return {[op = std::move(inner_op)](double gamma, const V& x) { return moreau_inverse_resolvent(op, gamma, x); },
            dim, std::move(label)};
}

// ---------------------------------------------------------------------------
// Operator norm

/// Largest singular value of L by power iteration on L^T L.
///
/// Starts from the normalised all-ones vector. If that start lies in the
/// kernel of L, the first standard basis vector with a nonzero image is used
/// instead. Stops once the estimate changes by at most tol relative, or after
/// iters sweeps. The zero matrix returns 0.
inline double power_method_norm(const LinearMap& l, std::size_t iters, double tol) {
    if (iters == 0) throw InvalidConstantError("power_method_norm: iters must be at least 1");
    if (!(tol > 0.0)) throw InvalidConstantError("power_method_norm: tol must be positive");
    const std::size_t n = l.domain_dim();
    if (l.matrix().is_zero()) return 0.0;

    DenseVector v(n, 1.0 / std::sqrt(static_cast<double>(n)));
    DenseVector u = l.apply(v);
    if (norm(u) == 0.0) {
        for (std::size_t j = 0; j < n; ++j) {
            DenseVector e(n);
            e[j] = 1.0;
            u = l.apply(e);
            if (norm(u) > 0.0) {
                v = e;
                break;
            }
        }
    }

    double estimate = norm(u);
    for (std::size_t k = 0; k < iters; ++k) {
        const DenseVector w = l.adjoint(u);
        const double wn = norm(w);
        if (wn == 0.0) break;
        v = (1.0 / wn) * w;
        u = l.apply(v);
        const double next = norm(u);
        const bool settled = std::abs(next - estimate) <= tol * next;
        estimate = std::max(estimate, next);
        if (settled) break;
    }
    return estimate;
}

inline constexpr std::size_t kNormIters = 10000;
inline constexpr double kNormTol = 1e-12;

// ---------------------------------------------------------------------------
// Forward operators

inline ForwardOp<DenseVector> zero_forward(std::size_t dim) {
    return {[](const DenseVector& x) { return zeros_like(x); }, 0.0, kInfinity, dim, "zero"};
}

/// x -> M x + offset. With cocoercive set, M must be symmetric PSD and the
/// operator is declared 1/||M||-cocoercive (Baillon-Haddad for the gradient of
/// the quadratic 1/2 <x, M x> + <offset, x>).
inline ForwardOp<DenseVector> affine_forward(Matrix m, DenseVector offset, bool cocoercive, std::string label = "affine") {
    if (m.rows() != m.cols()) throw InvalidOperatorError("affine_forward: matrix must be square");
    if (offset.dim() != m.rows()) throw ShapeError("affine_forward: offset has wrong dimension");
    const double mu = power_method_norm(LinearMap(m), kNormIters, kNormTol);
    std::optional<double> beta;
    if (cocoercive) {
        // Reuses the PSD/symmetry validation of the quadratic prox.
        QuadraticProx check(m, DenseVector(m.rows()));
        (void)check;
        beta = mu > 0.0 ? 1.0 / mu : kInfinity;
    }
    const std::size_t dim = m.cols();
    return {[m = std::move(m), offset = std::move(offset)](const DenseVector& x) { return m.apply(x) + offset; }, mu,
            beta, dim, std::move(label)};
}

/// (x, v) -> (L^T v, -L x) on the concatenation of x (dim L.cols) and v (dim L.rows).
inline ForwardOp<DenseVector> make_skew_pair(const LinearMap& l) {
    const double mu = power_method_norm(l, kNormIters, kNormTol);
    const std::size_t nx = l.domain_dim();
    const std::size_t nv = l.codomain_dim();
    return {[l, nx, nv](const DenseVector& z) {
                if (z.dim() != nx + nv) throw ShapeError("skew pair: dimension mismatch");
                DenseVector x(nx), v(nv);
                for (std::size_t i = 0; i < nx; ++i) x[i] = z[i];
                for (std::size_t i = 0; i < nv; ++i) v[i] = z[nx + i];
                const DenseVector top = l.adjoint(v);
                const DenseVector bottom = l.apply(x);
                DenseVector out(nx + nv);
                for (std::size_t i = 0; i < nx; ++i) out[i] = top[i];
                for (std::size_t i = 0; i < nv; ++i) out[nx + i] = -bottom[i];
                return out;
            },
            mu, std::nullopt, nx + nv, "skew(" + l.label() + ")"};
}

/// B + C with Lipschitz modulus mu_B + mu_C. The sum is not declared cocoercive.
template <class V>
ForwardOp<V> sum_forward(const ForwardOp<V>& b, const ForwardOp<V>& c) {
    if (b.domain_dim() != c.domain_dim()) throw ShapeError("sum_forward: domain mismatch");
    return {[b, c](const V& x) { return b.peek(x) + c.peek(x); }, b.lipschitz_mu() + c.lipschitz_mu(), std::nullopt,
            b.domain_dim(), b.label() + "+" + c.label()};
}

} // namespace monosplit
