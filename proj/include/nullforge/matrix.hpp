#pragma once

#include "error.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

namespace nullforge {

/// Dense row-major matrix over one scalar domain. Storage indices are 0-based;
/// conversion to the 1-based (i,j) of transform functions happens in transform.hpp.
template <Scalar S>
class DenseMatrix {
public:
    using value_type = S;

    DenseMatrix(std::size_t rows, std::size_t cols) : DenseMatrix(rows, cols, std::vector<S>(rows * cols, S(0))) {}

    DenseMatrix(std::size_t rows, std::size_t cols, std::vector<S> entries)
        : rows_(rows), cols_(cols), entries_(std::move(entries)) {
        if (rows_ == 0 || cols_ == 0) throw DimensionError("matrix dimensions must be positive");
        if (entries_.size() != rows_ * cols_)
            throw DimensionError("entry count " + std::to_string(entries_.size()) + " != rows*cols " +
                                 std::to_string(rows_ * cols_));
        if constexpr (std::same_as<S, double>) {
            for (std::size_t k = 0; k < entries_.size(); ++k)
                if (!std::isfinite(entries_[k]))
                    throw DomainError("non-finite entry at index " + std::to_string(k));
        }
    }

    DenseMatrix(std::initializer_list<std::initializer_list<S>> rows) : DenseMatrix(flatten(rows)) {}

    static DenseMatrix identity(std::size_t n) {
        DenseMatrix m(n, n);
        for (std::size_t k = 0; k < n; ++k) m(k, k) = S(1);
        return m;
    }

    static DenseMatrix diagonal(std::span<const S> d) {
        DenseMatrix m(d.size(), d.size());
        for (std::size_t k = 0; k < d.size(); ++k) m(k, k) = d[k];
        return m;
    }

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }

    S& operator()(std::size_t r, std::size_t c) { return entries_[r * cols_ + c]; }
    const S& operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }

    std::span<const S> row(std::size_t r) const { return {entries_.data() + r * cols_, cols_}; }
    const std::vector<S>& entries() const noexcept { return entries_; }

    DenseMatrix transpose() const {
        DenseMatrix t(cols_, rows_);
        for (std::size_t r = 0; r < rows_; ++r)
            for (std::size_t c = 0; c < cols_; ++c) t(c, r) = (*this)(r, c);
        return t;
    }

    friend bool operator==(const DenseMatrix& a, const DenseMatrix& b) {
        return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.entries_ == b.entries_;
    }

private:
    struct Flat {
        std::size_t rows;
        std::size_t cols;
        std::vector<S> entries;
    };

    explicit DenseMatrix(Flat f) : DenseMatrix(f.rows, f.cols, std::move(f.entries)) {}

    static Flat flatten(std::initializer_list<std::initializer_list<S>> rows) {
        Flat f{rows.size(), rows.size() ? rows.begin()->size() : 0, {}};
        for (const auto& r : rows) {
            if (r.size() != f.cols) throw DimensionError("ragged initializer rows");
            f.entries.insert(f.entries.end(), r.begin(), r.end());
        }
        return f;
    }

    std::size_t rows_;
    std::size_t cols_;
    std::vector<S> entries_;
};

using RationalMatrix = DenseMatrix<Rational>;
using FloatMatrix = DenseMatrix<double>;

template <Scalar S>
DenseMatrix<S> operator*(const DenseMatrix<S>& a, const DenseMatrix<S>& b) {
    if (a.cols() != b.rows()) throw DimensionError("matrix product dimension mismatch");
    DenseMatrix<S> c(a.rows(), b.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t k = 0; k < a.cols(); ++k) {
            const S& aik = a(i, k);
            if (is_zero(aik)) continue;
            for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
        }
    return c;
}

template <Scalar S>
std::vector<S> operator*(const DenseMatrix<S>& a, std::span<const S> v) {
    if (a.cols() != v.size()) throw DimensionError("matrix-vector dimension mismatch");
    std::vector<S> out(a.rows(), S(0));
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j) out[i] += a(i, j) * v[j];
    return out;
}

template <Scalar S>
std::vector<S> operator*(const DenseMatrix<S>& a, const std::vector<S>& v) {
    return a * std::span<const S>(v);
}

/// Vertical concatenation of row vectors into a matrix.
template <Scalar S>
DenseMatrix<S> stack_rows(const std::vector<std::vector<S>>& vectors, std::size_t width) {
    std::vector<S> entries;
    entries.reserve(vectors.size() * width);
    for (const auto& v : vectors) {
        if (v.size() != width) throw DimensionError("vector length mismatch while stacking");
        entries.insert(entries.end(), v.begin(), v.end());
    }
    return DenseMatrix<S>(vectors.size(), width, std::move(entries));
}

/// Elementwise conversion of an exact matrix to floating point.
inline FloatMatrix to_float(const RationalMatrix& m) {
    std::vector<double> e;
    e.reserve(m.entries().size());
    for (const auto& x : m.entries()) e.push_back(to_double(x));
    return FloatMatrix(m.rows(), m.cols(), std::move(e));
}

inline double max_norm(const FloatMatrix& m) {
    double r = 0.0;
    for (double x : m.entries()) r = std::max(r, std::fabs(x));
    return r;
}

inline double max_norm(std::span<const double> v) {
    double r = 0.0;
    for (double x : v) r = std::max(r, std::fabs(x));
    return r;
}

inline double euclidean_norm(std::span<const double> v) {
    double scale = max_norm(v);
    if (scale == 0.0) return 0.0;
    double s = 0.0;
    for (double x : v) s += (x / scale) * (x / scale);
    return scale * std::sqrt(s);
}

inline double frobenius_norm(const FloatMatrix& m) { return euclidean_norm(m.entries()); }

} // namespace nullforge
