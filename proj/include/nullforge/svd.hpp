#pragma once

#include "matrix.hpp"
#include "spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

namespace nullforge {

/// Result of a one-sided Jacobi (Hestenes) SVD of an m×n matrix: one singular
/// value per column (n of them, unsorted, including the structural zeros of a
/// wide matrix) and the full n×n orthogonal matrix V whose columns are the
/// matching right-singular vectors.
struct ColumnSvd {
    std::vector<double> sigma;
    FloatMatrix v;
};

inline ColumnSvd jacobi_svd(const FloatMatrix& a) {
    const std::size_t m = a.rows();
    const std::size_t n = a.cols();
    // Column-major working copies so rotations touch contiguous memory.
    std::vector<std::vector<double>> u(n, std::vector<double>(m));
    for (std::size_t r = 0; r < m; ++r)
        for (std::size_t c = 0; c < n; ++c) u[c][r] = a(r, c);
    std::vector<std::vector<double>> v(n, std::vector<double>(n, 0.0));
    for (std::size_t c = 0; c < n; ++c) v[c][c] = 1.0;

    constexpr double eps = std::numeric_limits<double>::epsilon();
    constexpr int max_sweeps = 80;
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t p = 0; p + 1 < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                double alpha = 0.0, beta = 0.0, gamma = 0.0;
                for (std::size_t r = 0; r < m; ++r) {
                    alpha += u[p][r] * u[p][r];
                    beta += u[q][r] * u[q][r];
                    gamma += u[p][r] * u[q][r];
                }
                if (gamma == 0.0 || std::fabs(gamma) <= eps * std::sqrt(alpha * beta)) continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * gamma);
                const double t = std::copysign(1.0, zeta) / (std::fabs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = c * t;
                for (std::size_t r = 0; r < m; ++r) {
                    const double up = u[p][r];
                    const double uq = u[q][r];
                    u[p][r] = c * up - s * uq;
                    u[q][r] = s * up + c * uq;
                }
                for (std::size_t r = 0; r < n; ++r) {
                    const double vp = v[p][r];
                    const double vq = v[q][r];
                    v[p][r] = c * vp - s * vq;
                    v[q][r] = s * vp + c * vq;
                }
            }
        }
        if (!rotated) break;
    }

    ColumnSvd out{std::vector<double>(n), FloatMatrix(n, n)};
    for (std::size_t c = 0; c < n; ++c) {
        out.sigma[c] = euclidean_norm(u[c]);
        for (std::size_t r = 0; r < n; ++r) out.v(r, c) = v[c][r];
    }
    return out;
}

/// The min(rows, cols) singular values, ascending.
inline Spectrum singular_values(const FloatMatrix& m) {
    // Work on the tall orientation so exactly min(rows, cols) values come back.
    const ColumnSvd svd = m.rows() >= m.cols() ? jacobi_svd(m) : jacobi_svd(m.transpose());
    return Spectrum(svd.sigma, SpectrumKind::singular);
}

inline Spectrum singular_values(const RationalMatrix& m) { return singular_values(to_float(m)); }

} // namespace nullforge
