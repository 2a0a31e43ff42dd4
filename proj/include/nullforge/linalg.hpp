#pragma once

#include "matrix.hpp"
#include "svd.hpp"

#include <algorithm>
#include <cstddef>
#include <vector>

namespace nullforge {

/// Relative singular-value threshold used for numerical rank decisions.
inline constexpr double default_rank_tol = 1e-10;

/// Basis of a kernel. Exact bases follow the reduced-row-echelon gauge: one
/// vector per free column (that column set to 1, other free columns 0), listed
/// by descending free column. Float bases are orthonormal right-singular vectors.
template <Scalar S>
struct NullBasis {
    std::vector<std::vector<S>> vectors;
    std::size_t dimension{0};
    bool normalized{false};

    std::size_t size() const noexcept { return vectors.size(); }
    bool empty() const noexcept { return vectors.empty(); }
    Domain domain() const noexcept { return domain_of<S>(); }
};

namespace detail {

inline BigInt lcm(const BigInt& a, const BigInt& b) { return a / boost::multiprecision::gcd(a, b) * b; }

/// Rank by fraction-free (Bareiss) elimination on the integer matrix obtained
/// by clearing each row's denominators.
inline std::size_t bareiss_rank(const RationalMatrix& m) {
    const std::size_t rows = m.rows();
    const std::size_t cols = m.cols();
    std::vector<std::vector<BigInt>> w(rows, std::vector<BigInt>(cols));
    for (std::size_t r = 0; r < rows; ++r) {
        BigInt scale = 1;
        for (std::size_t c = 0; c < cols; ++c) scale = lcm(scale, boost::multiprecision::denominator(m(r, c)));
        for (std::size_t c = 0; c < cols; ++c)
            w[r][c] = boost::multiprecision::numerator(m(r, c)) * (scale / boost::multiprecision::denominator(m(r, c)));
    }
    std::size_t rank = 0;
    BigInt previous = 1;
    for (std::size_t col = 0; col < cols && rank < rows; ++col) {
        std::size_t pivot = rank;
        while (pivot < rows && w[pivot][col].is_zero()) ++pivot;
        if (pivot == rows) continue;
        std::swap(w[pivot], w[rank]);
        const BigInt& p = w[rank][col];
        for (std::size_t r = rank + 1; r < rows; ++r) {
            for (std::size_t c = col + 1; c < cols; ++c)
                w[r][c] = (w[r][c] * p - w[r][col] * w[rank][c]) / previous;
            w[r][col] = 0;
        }
        previous = p;
        ++rank;
    }
    return rank;
}

} // namespace detail

/// Reduced row echelon form over an exact field, with the pivot column of each
/// nonzero row.
struct Echelon {
    RationalMatrix reduced;
    std::vector<std::size_t> pivot_columns;
};

inline Echelon rref(RationalMatrix m) {
    std::vector<std::size_t> pivots;
    std::size_t row = 0;
    for (std::size_t col = 0; col < m.cols() && row < m.rows(); ++col) {
        std::size_t p = row;
        while (p < m.rows() && m(p, col).is_zero()) ++p;
        if (p == m.rows()) continue;
        if (p != row)
            for (std::size_t c = 0; c < m.cols(); ++c) std::swap(m(p, c), m(row, c));
        const Rational inv = Rational(1) / m(row, col);
        for (std::size_t c = col; c < m.cols(); ++c) m(row, c) *= inv;
        for (std::size_t r = 0; r < m.rows(); ++r) {
            if (r == row || m(r, col).is_zero()) continue;
            const Rational f = m(r, col);
            for (std::size_t c = col; c < m.cols(); ++c) m(r, c) -= f * m(row, c);
        }
        pivots.push_back(col);
        ++row;
    }
    return {std::move(m), std::move(pivots)};
}

/// Dimension of the row space. Exact matrices ignore `tol`; float matrices
/// count singular values above tol·σ_max.
template <Scalar S>
std::size_t rank(const DenseMatrix<S>& m, double tol = default_rank_tol) {
    if constexpr (std::same_as<S, Rational>) {
        (void)tol;
        return detail::bareiss_rank(m);
    } else {
        if (!(tol > 0.0)) throw DomainError("float rank tolerance must be positive");
        const auto svd = jacobi_svd(m);
        const double top = *std::max_element(svd.sigma.begin(), svd.sigma.end());
        if (top == 0.0) return 0;
        return static_cast<std::size_t>(
            std::count_if(svd.sigma.begin(), svd.sigma.end(), [&](double s) { return s > tol * top; }));
    }
}

template <Scalar S>
std::size_t nullity(const DenseMatrix<S>& m, double tol = default_rank_tol) {
    return m.cols() - rank(m, tol);
}

template <Scalar S>
NullBasis<S> null_basis(const DenseMatrix<S>& m, double tol = default_rank_tol) {
    NullBasis<S> basis;
    basis.dimension = m.cols();
    if constexpr (std::same_as<S, Rational>) {
        (void)tol;
        const Echelon e = rref(m);
        std::vector<bool> is_pivot(m.cols(), false);
        for (auto c : e.pivot_columns) is_pivot[c] = true;
        for (std::size_t f = m.cols(); f-- > 0;) {
            if (is_pivot[f]) continue;
            std::vector<Rational> v(m.cols(), Rational(0));
            v[f] = 1;
            for (std::size_t r = 0; r < e.pivot_columns.size(); ++r) v[e.pivot_columns[r]] = -e.reduced(r, f);
            basis.vectors.push_back(std::move(v));
        }
    } else {
        if (!(tol > 0.0)) throw DomainError("float rank tolerance must be positive");
        const auto svd = jacobi_svd(m);
        const double top = *std::max_element(svd.sigma.begin(), svd.sigma.end());
        for (std::size_t c = 0; c < m.cols(); ++c) {
            if (top != 0.0 && svd.sigma[c] > tol * top) continue;
            std::vector<double> v(m.cols());
            for (std::size_t r = 0; r < m.cols(); ++r) v[r] = svd.v(r, c);
            basis.vectors.push_back(std::move(v));
        }
        basis.normalized = true;
    }
    return basis;
}

template <Scalar S>
DenseMatrix<S> basis_matrix(const NullBasis<S>& b) {
    return stack_rows(b.vectors, b.dimension);
}

/// True when the basis vectors are linearly independent.
template <Scalar S>
bool independent(const NullBasis<S>& b, double tol = default_rank_tol) {
    if (b.empty()) return true;
    return rank(basis_matrix(b), tol) == b.size();
}

/// Two bases span the same subspace iff stacking them does not raise the rank.
template <Scalar S>
bool same_subspace(const NullBasis<S>& a, const NullBasis<S>& b, double tol = default_rank_tol) {
    if (a.dimension != b.dimension) return false;
    if (a.empty() || b.empty()) return a.empty() && b.empty();
    const std::size_t ra = rank(basis_matrix(a), tol);
    const std::size_t rb = rank(basis_matrix(b), tol);
    if (ra != rb) return false;
    NullBasis<S> both = a;
    both.vectors.insert(both.vectors.end(), b.vectors.begin(), b.vectors.end());
    return rank(basis_matrix(both), tol) == ra;
}

/// Wraps one vector as a one-element basis.
template <Scalar S>
NullBasis<S> span_of(std::vector<S> v) {
    NullBasis<S> b;
    b.dimension = v.size();
    b.vectors.push_back(std::move(v));
    return b;
}

} // namespace nullforge
