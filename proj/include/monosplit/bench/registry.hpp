#pragma once

// Named benchmark problems.
//
//   lasso        minimize lambda ||x||_1 + 1/2 ||M x - b||^2, random M, b (fixed seed)
//   skew-box     box-constrained bilinear saddle point; A = N_box, B = rotation
//   three-op     A = N_box, B = skew coupling, C = gradient of a strongly convex quadratic
//   composite-1  primal-dual composite inclusion with two affine dual blocks

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "monosplit/bench/problem_spec.hpp"
#include "monosplit/errors.hpp"

namespace monosplit::bench {

inline constexpr std::uint64_t kLassoSeed = 20190605;

/// Lasso with an n-column Gaussian design of the given row count.
/// lambda = lambda_scale * ||M^T b||_inf; lambda_scale >= 1 makes 0 the solution.
inline ProblemSpec lasso_spec(std::size_t n = 20, std::size_t rows = 40, double lambda_scale = 0.1,
                              std::uint64_t seed = kLassoSeed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Matrix m(rows, n);
    for (std::size_t i = 0; i < rows; ++i)
        for (std::size_t j = 0; j < n; ++j) m(i, j) = gauss(rng) / std::sqrt(static_cast<double>(rows));
    DenseVector b(rows);
    for (std::size_t i = 0; i < rows; ++i) b[i] = gauss(rng);

    const Matrix g = gram(m);
    const DenseVector mtb = m.apply_transpose(b);
    double inf_norm = 0.0;
    for (double v : mtb) inf_norm = std::max(inf_norm, std::abs(v));

    ProblemSpec s;
    s.name = "lasso";
    s.kind = ProblemKind::two_op;
    s.dim = n;
    s.A = ResolventSpec{"l1", n, lambda_scale * inf_norm, {}, {}, {}, {}};
    std::vector<double> offset(n);
    for (std::size_t j = 0; j < n; ++j) offset[j] = -mtb[j];
    s.B = ForwardSpec{"affine", 0, g.to_rows(), offset, true};
    s.x0 = std::vector<double>(n, 0.0);
    s.seed = seed;
    return s;
}

/// Solves the box-constrained affine variational inequality
///   0 in N_[lo,hi](z) + M z + q
/// by enumerating the 3^n active sets (free / at lower / at upper) and
/// checking the sign conditions. Returns nullopt when no candidate passes.
inline std::optional<std::vector<double>> solve_box_affine_vi(const Matrix& m, const std::vector<double>& q,
                                                              const std::vector<double>& lo,
                                                              const std::vector<double>& hi, double tol = 1e-12) {
    const std::size_t n = m.rows();
    std::size_t combos = 1;
    for (std::size_t i = 0; i < n; ++i) combos *= 3;
    for (std::size_t code = 0; code < combos; ++code) {
        std::vector<int> state(n);
        std::size_t c = code;
        for (std::size_t i = 0; i < n; ++i) {
            state[i] = static_cast<int>(c % 3);
            c /= 3;
        }
        std::vector<double> z(n, 0.0);
        std::vector<std::size_t> free_idx;
        for (std::size_t i = 0; i < n; ++i) {
            if (state[i] == 0) free_idx.push_back(i);
            else z[i] = state[i] == 1 ? lo[i] : hi[i];
        }
        if (!free_idx.empty()) {
            const auto k = static_cast<Eigen::Index>(free_idx.size());
            Eigen::MatrixXd sub(k, k);
            Eigen::VectorXd rhs(k);
            for (Eigen::Index r = 0; r < k; ++r) {
                double acc = -q[free_idx[r]];
                for (std::size_t j = 0; j < n; ++j)
                    if (state[j] != 0) acc -= m(free_idx[r], j) * z[j];
                rhs(r) = acc;
                for (Eigen::Index col = 0; col < k; ++col) sub(r, col) = m(free_idx[r], free_idx[col]);
            }
            Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
            if (!lu.isInvertible()) continue;
            const Eigen::VectorXd sol = lu.solve(rhs);
            for (Eigen::Index r = 0; r < k; ++r) z[free_idx[r]] = sol(r);
        }
        bool ok = true;
        for (std::size_t i = 0; i < n && ok; ++i) {
            double g = q[i];
            for (std::size_t j = 0; j < n; ++j) g += m(i, j) * z[j];
            if (state[i] == 0) ok = z[i] >= lo[i] - tol && z[i] <= hi[i] + tol;
            else if (state[i] == 1) ok = g >= -tol;
            else ok = g <= tol;
        }
        if (ok) return z;
    }
    return std::nullopt;
}

/// Matrix of the skew map (x, v) -> (L^T v, -L x).
inline Matrix skew_matrix(const Matrix& l) {
    const std::size_t nx = l.cols(), nv = l.rows();
    Matrix s(nx + nv, nx + nv);
    for (std::size_t i = 0; i < nv; ++i)
        for (std::size_t j = 0; j < nx; ++j) {
            s(j, nx + i) = l(i, j);
            s(nx + i, j) = -l(i, j);
        }
    return s;
}

inline ProblemSpec skew_box_spec() {
    ProblemSpec s;
    s.name = "skew-box";
    s.kind = ProblemKind::two_op;
    s.dim = 2;
    s.A = ResolventSpec{"box", 0, 0.0, {-1.0, -1.0}, {1.0, 1.0}, {}, {}};
    s.B = ForwardSpec{"skew", 0, {{1.0}}, {}, false};
    s.x0 = std::vector<double>{0.8, -0.6};
    s.known_solution = std::vector<double>{0.0, 0.0};
    return s;
}

inline ProblemSpec three_op_spec() {
    const Matrix l{{1.0, 0.5}, {-0.3, 0.8}};
    const std::vector<double> q_diag{1.0, 2.0, 0.5, 1.5};
    const std::vector<double> anchor{1.6, -0.4, 0.3, 0.9};
    const std::size_t n = 4;

    Rows q(n, std::vector<double>(n, 0.0));
    std::vector<double> offset(n);
    for (std::size_t i = 0; i < n; ++i) {
        q[i][i] = q_diag[i];
        offset[i] = -q_diag[i] * anchor[i];
    }

    ProblemSpec s;
    s.name = "three-op";
    s.kind = ProblemKind::three_op;
    s.dim = n;
    s.A = ResolventSpec{"box", 0, 0.0, std::vector<double>(n, -1.0), std::vector<double>(n, 1.0), {}, {}};
    s.B = ForwardSpec{"skew", 0, l.to_rows(), {}, false};
    s.C = ForwardSpec{"affine", 0, q, offset, true};
    s.x0 = std::vector<double>(n, 0.0);

    // B + C is the affine map (S + Q) z - Q anchor.
    Matrix total = skew_matrix(l);
    for (std::size_t i = 0; i < n; ++i) total(i, i) += q_diag[i];
    s.known_solution = solve_box_affine_vi(total, offset, s.A.lo, s.A.hi);
    return s;
}

/// H = R^3, G_1 = R^2, G_2 = R. A = 0, B = P x - p, A_i = grad(1/2 <y, Q_i y> + <c_i, y>),
/// B_i^{-1} = R_i v. The solution solves the linear system
///   P x - p + L_1^T v_1 + L_2^T v_2 = 0
///   Q_i^{-1}(v_i - c_i) + R_i v_i - L_i x = 0.
inline ProblemSpec composite_spec() {
    const Rows p{{2.0, 0.5, 0.0}, {0.5, 1.5, 0.2}, {0.0, 0.2, 1.0}};
    const std::vector<double> p_rhs{1.0, -1.0, 0.5};
    const Rows l1{{1.0, 0.0, 1.0}, {0.0, 1.0, -1.0}};
    const Rows l2{{0.5, -1.0, 0.3}};
    const Rows q1{{1.0, 0.0}, {0.0, 2.0}};
    const std::vector<double> c1{0.5, -0.2};
    const Rows q2{{3.0}};
    const std::vector<double> c2{0.1};
    const Rows r1{{0.5, 0.0}, {0.0, 0.25}};
    const Rows r2{{1.0}};

    ProblemSpec s;
    s.name = "composite-1";
    s.kind = ProblemKind::composite;
    s.dim = 3;
    s.A = ResolventSpec{"zero", 3, 0.0, {}, {}, {}, {}};
    s.B = ForwardSpec{"affine", 0, p, {-p_rhs[0], -p_rhs[1], -p_rhs[2]}, true};
    s.blocks.push_back(DualBlockSpec{ResolventSpec{"quadratic", 0, 0.0, {}, {}, q1, c1},
                                     ForwardSpec{"affine", 0, r1, {0.0, 0.0}, true}, l1});
    s.blocks.push_back(DualBlockSpec{ResolventSpec{"quadratic", 0, 0.0, {}, {}, q2, c2},
                                     ForwardSpec{"affine", 0, r2, {0.0}, true}, l2});
    s.x0 = std::vector<double>(6, 0.0);

    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(6, 6);
    Eigen::VectorXd rhs(6);
    for (int i = 0; i < 3; ++i) {
        for (int j = 0; j < 3; ++j) k(i, j) = p[i][j];
        rhs(i) = p_rhs[i];
    }
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 3; ++j) {
            k(j, 3 + i) = l1[i][j];
            k(3 + i, j) = -l1[i][j];
        }
    for (int j = 0; j < 3; ++j) {
        k(j, 5) = l2[0][j];
        k(5, j) = -l2[0][j];
    }
    for (int i = 0; i < 2; ++i) {
        k(3 + i, 3 + i) = 1.0 / q1[i][i] + r1[i][i];
        rhs(3 + i) = c1[i] / q1[i][i];
    }
    k(5, 5) = 1.0 / q2[0][0] + r2[0][0];
    rhs(5) = c2[0] / q2[0][0];
    const Eigen::VectorXd sol = k.fullPivLu().solve(rhs);
    s.known_solution = std::vector<double>(sol.data(), sol.data() + sol.size());
    return s;
}

/// Deterministic list of the shipped problems.
inline std::vector<ProblemSpec> registry() { return {lasso_spec(), skew_box_spec(), three_op_spec(), composite_spec()}; }

inline std::optional<ProblemSpec> find_problem(std::string_view name) {
    for (auto& s : registry())
        if (s.name == name) return s;
    return std::nullopt;
}

} // namespace monosplit::bench
