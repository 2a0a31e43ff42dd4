#pragma once

#include "gfdsl.hpp"
#include "linalg.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace nullforge {

/// divide: b_ij = a_ij / g(i,j).  multiply: b_ij = a_ij * g(i,j).
enum class Mode { divide, multiply };

inline std::string to_string(Mode m) { return m == Mode::divide ? "divide" : "multiply"; }

inline Mode mode_from_string(std::string_view s) {
    if (s == "divide") return Mode::divide;
    if (s == "multiply") return Mode::multiply;
    throw DomainError("mode must be 'divide' or 'multiply', got '" + std::string(s) + "'");
}

inline Mode inverse(Mode m) { return m == Mode::divide ? Mode::multiply : Mode::divide; }

/// Relative tolerance of the four-point identity in the float domain.
inline constexpr double default_separability_tol = 1e-8;

/// Elementwise index-dependent rescaling. Storage is 0-based; g sees (r+1, c+1).
/// Every grid point is evaluated, including those where a_ij = 0.
template <Scalar S>
DenseMatrix<S> apply_transform(const DenseMatrix<S>& a, const TransformFn& g, Mode mode) {
    DenseMatrix<S> b(a.rows(), a.cols());
    for (std::size_t r = 0; r < a.rows(); ++r)
        for (std::size_t c = 0; c < a.cols(); ++c) {
            const long i = static_cast<long>(r) + 1;
            const long j = static_cast<long>(c) + 1;
            if (mode == Mode::divide)
                b(r, c) = a(r, c) / g.divisor<S>(i, j);
            else
                b(r, c) = a(r, c) * g.at<S>(i, j);
        }
    return b;
}

/// Outcome of the grid-restricted separability test g(i,j) = g'(i) g''(j).
/// Factor gauge: g'(i) = g(i,1), g''(j) = g(1,j)/g(1,1).
template <Scalar S>
struct SeparabilityReport {
    bool separable{false};
    /// (i, j, x, y) with g(i,j) g(x,y) != g(x,j) g(i,y).
    std::optional<std::array<long, 4>> witness;
    /// Grid point the factors are normalized against.
    std::array<long, 2> anchor{1, 1};
    std::vector<S> row_factor;
    std::vector<S> col_factor;
    long rows{0};
    long cols{0};
};

namespace detail {

template <Scalar S>
bool products_agree(const S& lhs, const S& rhs, double tol) {
    if constexpr (std::same_as<S, Rational>) {
        (void)tol;
        return lhs == rhs;
    } else {
        return std::fabs(lhs - rhs) <= tol * std::max(std::fabs(lhs), std::fabs(rhs));
    }
}

} // namespace detail

/// Checks every grid point against an anchor: (1,1) when g(1,1) != 0, else the
/// first nonzero value in row-major order. Against a nonzero anchor this is the
/// full four-point identity, i.e. the value grid has rank at most one, so grids
/// containing zeros are decided too. Factors are g'(i) = g(i,y) and
/// g''(j) = g(x,j)/g(x,y) for the anchor (x,y).
template <Scalar S = double>
SeparabilityReport<S> is_separable(const TransformFn& g, long n, long m, double tol = default_separability_tol) {
    if (n < 1 || m < 1) throw DimensionError("separability grid must be at least 1x1");
    std::vector<S> grid;
    grid.reserve(static_cast<std::size_t>(n * m));
    for (long i = 1; i <= n; ++i)
        for (long j = 1; j <= m; ++j) grid.push_back(g.at<S>(i, j));
    auto val = [&](long i, long j) -> const S& { return grid[static_cast<std::size_t>((i - 1) * m + (j - 1))]; };
    SeparabilityReport<S> report;
    report.rows = n;
    report.cols = m;
    const auto pivot = std::find_if(grid.begin(), grid.end(), [](const S& x) { return !is_zero(x); });
    if (pivot == grid.end()) {
        report.separable = true;
        report.row_factor.assign(static_cast<std::size_t>(n), S(0));
        report.col_factor.assign(static_cast<std::size_t>(m), S(0));
        return report;
    }
    const long pos = pivot - grid.begin();
    const long x = pos / m + 1, y = pos % m + 1;
    report.anchor = {x, y};
    const S& anchor = val(x, y);
    for (long i = 1; i <= n; ++i)
        for (long j = 1; j <= m; ++j) {
            const S lhs = val(i, j) * anchor;
            const S rhs = val(x, j) * val(i, y);
            if (!detail::products_agree(lhs, rhs, tol)) {
                report.witness = std::array<long, 4>{i, j, x, y};
                return report;
            }
        }
    report.separable = true;
    for (long i = 1; i <= n; ++i) report.row_factor.push_back(val(i, y));
    for (long j = 1; j <= m; ++j) report.col_factor.push_back(S(val(x, j) / anchor));
    return report;
}

/// Kernel basis of the transformed matrix obtained by rescaling each
/// component with the column factor: v'_j = v_j g''(j) (divide) or v_j / g''(j) (multiply).
template <Scalar S>
NullBasis<S> predict_null_basis(const NullBasis<S>& a_basis, const TransformFn& g, long n, long m, Mode mode,
                                double tol = default_separability_tol) {
    if (static_cast<long>(a_basis.dimension) != m) throw DimensionError("basis dimension does not match grid columns");
    const auto sep = is_separable<S>(g, n, m, tol);
    if (!sep.separable) throw DomainError("transform is not separable on the " + std::to_string(n) + "x" + std::to_string(m) + " grid");
    for (long j = 1; j <= m; ++j)
        if (is_zero(sep.col_factor[static_cast<std::size_t>(j - 1)]))
            throw DomainError("column factor vanishes at j=" + std::to_string(j) + "; the transform does not preserve the kernel");
    NullBasis<S> out;
    out.dimension = a_basis.dimension;
    for (const auto& v : a_basis.vectors) {
        std::vector<S> w(v.size());
        for (std::size_t k = 0; k < v.size(); ++k)
            w[k] = mode == Mode::divide ? S(v[k] * sep.col_factor[k]) : S(v[k] / sep.col_factor[k]);
        out.vectors.push_back(std::move(w));
    }
    return out;
}

/// For separable g: eigenvalues survive iff g(k,k) = 1 on the diagonal.
template <Scalar S = double>
bool preserves_eigenvalues(const TransformFn& g, long n, double tol = default_separability_tol) {
    const auto sep = is_separable<S>(g, n, n, tol);
    if (!sep.separable) throw DomainError("eigenvalue test needs a separable transform");
    for (long k = 1; k <= n; ++k) {
        const S d = g.at<S>(k, k);
        if constexpr (std::same_as<S, Rational>) {
            if (d != 1) return false;
        } else {
            if (std::fabs(d - 1.0) > tol) return false;
        }
    }
    return true;
}

/// Diagonal P with P_ii = g(i,1).
template <Scalar S = double>
DenseMatrix<S> similarity_matrix(const TransformFn& g, long n, double tol = default_separability_tol) {
    if (!preserves_eigenvalues<S>(g, n, tol)) throw DomainError("transform does not satisfy g(k,k) = 1");
    std::vector<S> d;
    for (long i = 1; i <= n; ++i) d.push_back(g.divisor<S>(i, 1));
    return DenseMatrix<S>::diagonal(d);
}

enum class Orientation { p_inv_a_p, p_a_p_inv, neither };

inline std::string to_string(Orientation o) {
    switch (o) {
    case Orientation::p_inv_a_p: return "P^-1 A P";
    case Orientation::p_a_p_inv: return "P A P^-1";
    case Orientation::neither: return "neither";
    }
    return "?";
}

/// Conjugates A by the diagonal matrix P in the given orientation.
template <Scalar S>
DenseMatrix<S> conjugate(const DenseMatrix<S>& a, const DenseMatrix<S>& p, Orientation o) {
    if (!a.square() || a.rows() != p.rows() || !p.square()) throw DimensionError("conjugation needs matching square matrices");
    if (o == Orientation::neither) throw DomainError("no orientation to conjugate with");
    DenseMatrix<S> out(a.rows(), a.cols());
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            out(i, j) = o == Orientation::p_inv_a_p ? S(a(i, j) * p(j, j) / p(i, i)) : S(a(i, j) * p(i, i) / p(j, j));
    return out;
}

namespace detail {

template <Scalar S>
bool entrywise_equal(const DenseMatrix<S>& x, const DenseMatrix<S>& y, double tol) {
    if constexpr (std::same_as<S, Rational>) {
        (void)tol;
        return x == y;
    } else {
        const double scale = std::max({1.0, max_norm(x), max_norm(y)});
        for (std::size_t k = 0; k < x.entries().size(); ++k)
            if (std::fabs(x.entries()[k] - y.entries()[k]) > tol * scale) return false;
        return true;
    }
}

} // namespace detail

/// Which conjugation of A by P reproduces B, checked entrywise.
template <Scalar S>
Orientation similarity_orientation(const DenseMatrix<S>& a, const DenseMatrix<S>& b, const DenseMatrix<S>& p,
                                   double tol = 1e-10) {
    if (detail::entrywise_equal(conjugate(a, p, Orientation::p_inv_a_p), b, tol)) return Orientation::p_inv_a_p;
    if (detail::entrywise_equal(conjugate(a, p, Orientation::p_a_p_inv), b, tol)) return Orientation::p_a_p_inv;
    return Orientation::neither;
}

/// Similarity matrix together with the orientation that links A and
/// apply_transform(A, g, mode), determined on an all-ones probe matrix (every
/// entry nonzero, so the entrywise check is decisive). P is fixed only up to a
/// nonzero overall scalar; `scale` is g(1,1), dividing by it gives P_11 = 1.
template <Scalar S>
struct SimilarityReport {
    DenseMatrix<S> p;
    Orientation orientation;
    S scale;
};

template <Scalar S = double>
SimilarityReport<S> similarity_report(const TransformFn& g, long n, Mode mode, double tol = default_separability_tol) {
    DenseMatrix<S> p = similarity_matrix<S>(g, n, tol);
    DenseMatrix<S> probe(static_cast<std::size_t>(n), static_cast<std::size_t>(n), std::vector<S>(static_cast<std::size_t>(n * n), S(1)));
    const auto b = apply_transform(probe, g, mode);
    const Orientation o = similarity_orientation(probe, b, p, 1e-10);
    S scale = p(0, 0);
    return {std::move(p), o, scale};
}

struct Theorem1Report {
    std::size_t nullity_before{0};
    std::size_t nullity_after{0};
    bool preserved{false};
    bool separable{false};
};

template <Scalar S>
Theorem1Report verify_theorem1(const DenseMatrix<S>& a, const TransformFn& g, Mode mode, double rank_tol = default_rank_tol,
                               double sep_tol = default_separability_tol) {
    const auto b = apply_transform(a, g, mode);
    Theorem1Report r;
    r.nullity_before = nullity(a, rank_tol);
    r.nullity_after = nullity(b, rank_tol);
    r.preserved = r.nullity_before == r.nullity_after;
    r.separable = is_separable<S>(g, static_cast<long>(a.rows()), static_cast<long>(a.cols()), sep_tol).separable;
    return r;
}

} // namespace nullforge
