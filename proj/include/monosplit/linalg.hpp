#pragma once

// Finite-dimensional real vectors: the space H (DenseVector) and the Hilbert
// direct sum K = H + G_1 + ... + G_m (BlockVector).
//
// Every reduction sums left to right over coordinates, and over blocks in
// declared order with a single accumulator, so that a BlockVector and its
// flattened DenseVector give bit-identical inner products and norms.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "monosplit/errors.hpp"

namespace monosplit {

class DenseVector {
public:
    explicit DenseVector(std::size_t dim, double fill = 0.0) : coords_(dim, fill) {
        require_nonempty();
    }
    DenseVector(std::initializer_list<double> coords) : coords_(coords) {
        require_nonempty();
    }
    explicit DenseVector(std::vector<double> coords) : coords_(std::move(coords)) {
        require_nonempty();
    }

    std::size_t dim() const noexcept { return coords_.size(); }

    double operator[](std::size_t i) const { return coords_[i]; }
    double& operator[](std::size_t i) { return coords_[i]; }

    std::span<const double> coords() const noexcept { return coords_; }
    std::span<double> coords() noexcept { return coords_; }

    auto begin() const noexcept { return coords_.begin(); }
    auto end() const noexcept { return coords_.end(); }

    /// Exact (bitwise up to signed zero) coordinate equality.
    friend bool operator==(const DenseVector&, const DenseVector&) = default;

private:
    void require_nonempty() const {
        if (coords_.empty()) throw ShapeError("DenseVector: dimension must be at least 1");
    }

    std::vector<double> coords_;
};

class BlockVector {
public:
    explicit BlockVector(std::vector<DenseVector> blocks) : blocks_(std::move(blocks)) {
        if (blocks_.empty()) throw ShapeError("BlockVector: needs at least one block");
    }

    std::size_t num_blocks() const noexcept { return blocks_.size(); }
    const DenseVector& block(std::size_t i) const { return blocks_[i]; }
    DenseVector& block(std::size_t i) { return blocks_[i]; }
    const std::vector<DenseVector>& blocks() const noexcept { return blocks_; }

    std::vector<std::size_t> block_dims() const {
        std::vector<std::size_t> dims;
        dims.reserve(blocks_.size());
        for (const auto& b : blocks_) dims.push_back(b.dim());
        return dims;
    }

    std::size_t total_dim() const noexcept {
        std::size_t n = 0;
        for (const auto& b : blocks_) n += b.dim();
        return n;
    }

    friend bool operator==(const BlockVector&, const BlockVector&) = default;

private:
    std::vector<DenseVector> blocks_;
};

namespace detail {

inline void require_same_dim(const DenseVector& a, const DenseVector& b, const char* op) {
    if (a.dim() != b.dim()) {
        throw ShapeError(std::string(op) + ": dimension mismatch (" + std::to_string(a.dim()) +
                         " vs " + std::to_string(b.dim()) + ")");
    }
}

inline void require_same_shape(const BlockVector& a, const BlockVector& b, const char* op) {
    if (a.num_blocks() != b.num_blocks()) {
        throw ShapeError(std::string(op) + ": block count mismatch");
    }
    for (std::size_t i = 0; i < a.num_blocks(); ++i) require_same_dim(a.block(i), b.block(i), op);
}

inline void accumulate_inner(const DenseVector& a, const DenseVector& b, double& acc) {
    for (std::size_t i = 0; i < a.dim(); ++i) acc += a[i] * b[i];
}

} // namespace detail

// ---------------------------------------------------------------------------
// DenseVector arithmetic

inline double inner(const DenseVector& a, const DenseVector& b) {
    detail::require_same_dim(a, b, "inner");
    double acc = 0.0;
    detail::accumulate_inner(a, b, acc);
    return acc;
}

inline double squared_norm(const DenseVector& a) { return inner(a, a); }
inline double norm(const DenseVector& a) { return std::sqrt(inner(a, a)); }

/// alpha * x + y
inline DenseVector axpy(double alpha, const DenseVector& x, const DenseVector& y) {
    detail::require_same_dim(x, y, "axpy");
    DenseVector out(x.dim());
    for (std::size_t i = 0; i < x.dim(); ++i) out[i] = alpha * x[i] + y[i];
    return out;
}

/// 2 * x_cur - x_prev
inline DenseVector reflect(const DenseVector& x_cur, const DenseVector& x_prev) {
    detail::require_same_dim(x_cur, x_prev, "reflect");
    DenseVector out(x_cur.dim());
    for (std::size_t i = 0; i < x_cur.dim(); ++i) out[i] = 2.0 * x_cur[i] - x_prev[i];
    return out;
}

inline DenseVector operator+(const DenseVector& a, const DenseVector& b) {
    detail::require_same_dim(a, b, "add");
    DenseVector out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] + b[i];
    return out;
}

inline DenseVector operator-(const DenseVector& a, const DenseVector& b) {
    detail::require_same_dim(a, b, "subtract");
    DenseVector out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = a[i] - b[i];
    return out;
}

inline DenseVector operator*(double alpha, const DenseVector& a) {
    DenseVector out(a.dim());
    for (std::size_t i = 0; i < a.dim(); ++i) out[i] = alpha * a[i];
    return out;
}

inline DenseVector zeros_like(const DenseVector& a) { return DenseVector(a.dim()); }

inline bool is_finite(const DenseVector& a) {
    return std::all_of(a.begin(), a.end(), [](double v) { return std::isfinite(v); });
}

inline double max_abs_diff(const DenseVector& a, const DenseVector& b) {
    detail::require_same_dim(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t i = 0; i < a.dim(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

// ---------------------------------------------------------------------------
// BlockVector arithmetic

inline double inner(const BlockVector& a, const BlockVector& b) {
    detail::require_same_shape(a, b, "inner");
    double acc = 0.0;
    for (std::size_t k = 0; k < a.num_blocks(); ++k) detail::accumulate_inner(a.block(k), b.block(k), acc);
    return acc;
}

inline double squared_norm(const BlockVector& a) { return inner(a, a); }
inline double norm(const BlockVector& a) { return std::sqrt(inner(a, a)); }

namespace detail {

template <class F>
BlockVector blockwise(const BlockVector& a, const BlockVector& b, const char* op, F&& f) {
    require_same_shape(a, b, op);
    std::vector<DenseVector> out;
    out.reserve(a.num_blocks());
    for (std::size_t k = 0; k < a.num_blocks(); ++k) out.push_back(f(a.block(k), b.block(k)));
    return BlockVector(std::move(out));
}

} // namespace detail

inline BlockVector axpy(double alpha, const BlockVector& x, const BlockVector& y) {
    return detail::blockwise(x, y, "axpy",
                             [alpha](const DenseVector& xb, const DenseVector& yb) { return axpy(alpha, xb, yb); });
}

inline BlockVector reflect(const BlockVector& x_cur, const BlockVector& x_prev) {
    return detail::blockwise(x_cur, x_prev, "reflect",
                             [](const DenseVector& c, const DenseVector& p) { return reflect(c, p); });
}

inline BlockVector operator+(const BlockVector& a, const BlockVector& b) {
    return detail::blockwise(a, b, "add", [](const DenseVector& x, const DenseVector& y) { return x + y; });
}

inline BlockVector operator-(const BlockVector& a, const BlockVector& b) {
    return detail::blockwise(a, b, "subtract", [](const DenseVector& x, const DenseVector& y) { return x - y; });
}

inline BlockVector operator*(double alpha, const BlockVector& a) {
    std::vector<DenseVector> out;
    out.reserve(a.num_blocks());
    for (const auto& b : a.blocks()) out.push_back(alpha * b);
    return BlockVector(std::move(out));
}

inline BlockVector zeros_like(const BlockVector& a) {
    std::vector<DenseVector> out;
    out.reserve(a.num_blocks());
    for (const auto& b : a.blocks()) out.push_back(zeros_like(b));
    return BlockVector(std::move(out));
}

inline bool is_finite(const BlockVector& a) {
    return std::all_of(a.blocks().begin(), a.blocks().end(), [](const DenseVector& b) { return is_finite(b); });
}

inline double max_abs_diff(const BlockVector& a, const BlockVector& b) {
    detail::require_same_shape(a, b, "max_abs_diff");
    double m = 0.0;
    for (std::size_t k = 0; k < a.num_blocks(); ++k) m = std::max(m, max_abs_diff(a.block(k), b.block(k)));
    return m;
}

inline DenseVector flatten(const BlockVector& a) {
    std::vector<double> flat;
    flat.reserve(a.total_dim());
    for (const auto& b : a.blocks()) flat.insert(flat.end(), b.begin(), b.end());
    return DenseVector(std::move(flat));
}

inline BlockVector unflatten(const DenseVector& flat, std::span<const std::size_t> dims) {
    std::size_t total = 0;
    for (auto d : dims) total += d;
    if (total != flat.dim()) throw ShapeError("unflatten: block dims do not sum to vector dimension");
    std::vector<DenseVector> blocks;
    std::size_t offset = 0;
    for (auto d : dims) {
        std::vector<double> c(flat.begin() + static_cast<std::ptrdiff_t>(offset),
                              flat.begin() + static_cast<std::ptrdiff_t>(offset + d));
        blocks.emplace_back(std::move(c));
        offset += d;
    }
    return BlockVector(std::move(blocks));
}

/// Vector types the splitting schemes can iterate on.
template <class V>
concept HilbertVector = std::copy_constructible<V> && requires(const V& a, double s) {
    { inner(a, a) } -> std::convertible_to<double>;
    { norm(a) } -> std::convertible_to<double>;
    { axpy(s, a, a) } -> std::convertible_to<V>;
    { reflect(a, a) } -> std::convertible_to<V>;
    { a - a } -> std::convertible_to<V>;
    { zeros_like(a) } -> std::convertible_to<V>;
    { is_finite(a) } -> std::convertible_to<bool>;
};

// ---------------------------------------------------------------------------
// Dense row-major matrix

class Matrix {
public:
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {
        if (rows == 0 || cols == 0) throw ShapeError("Matrix: dimensions must be positive");
    }

    Matrix(std::initializer_list<std::initializer_list<double>> rows)
        : Matrix(rows.size(), rows.size() ? rows.begin()->size() : 0) {
        std::size_t i = 0;
        for (const auto& r : rows) {
            if (r.size() != cols_) throw ShapeError("Matrix: ragged initializer");
            std::copy(r.begin(), r.end(), data_.begin() + static_cast<std::ptrdiff_t>(i * cols_));
            ++i;
        }
    }

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty() || rows.front().empty()) throw ShapeError("Matrix: empty row list");
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_) throw ShapeError("Matrix: ragged rows");
            for (std::size_t j = 0; j < m.cols_; ++j) m(i, j) = rows[i][j];
        }
        return m;
    }

    static Matrix identity(std::size_t n) {
        Matrix m(n, n);
        for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }

    double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }
    double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }

    std::vector<std::vector<double>> to_rows() const {
        std::vector<std::vector<double>> out(rows_, std::vector<double>(cols_));
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) out[i][j] = (*this)(i, j);
        return out;
    }

    /// M x
    DenseVector apply(const DenseVector& x) const {
        if (x.dim() != cols_) throw ShapeError("Matrix::apply: dimension mismatch");
        DenseVector out(rows_);
        for (std::size_t i = 0; i < rows_; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j < cols_; ++j) acc += (*this)(i, j) * x[j];
            out[i] = acc;
        }
        return out;
    }

    /// M^T y
    DenseVector apply_transpose(const DenseVector& y) const {
        if (y.dim() != rows_) throw ShapeError("Matrix::apply_transpose: dimension mismatch");
        DenseVector out(cols_);
        for (std::size_t j = 0; j < cols_; ++j) {
            double acc = 0.0;
            for (std::size_t i = 0; i < rows_; ++i) acc += (*this)(i, j) * y[i];
            out[j] = acc;
        }
        return out;
    }

    Matrix transpose() const {
        Matrix t(cols_, rows_);
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
        return t;
    }

    bool is_symmetric(double tol = 0.0) const {
        if (rows_ != cols_) return false;
        for (std::size_t i = 0; i < rows_; ++i)
            for (std::size_t j = i + 1; j < cols_; ++j)
                if (std::abs((*this)(i, j) - (*this)(j, i)) > tol) return false;
        return true;
    }

    bool is_zero() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return v == 0.0; });
    }

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_;
    std::size_t cols_;
    std::vector<double> data_;
};

/// A^T A for a matrix A, summed in the same sequential order as apply().
inline Matrix gram(const Matrix& a) {
    Matrix g(a.cols(), a.cols());
    for (std::size_t i = 0; i < a.cols(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < a.rows(); ++k) acc += a(k, i) * a(k, j);
            g(i, j) = acc;
        }
    return g;
}

} // namespace monosplit
