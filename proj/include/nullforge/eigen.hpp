#pragma once

#include "matrix.hpp"
#include "spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <vector>

namespace nullforge {

/// Eigenvalues of the symmetric tridiagonal matrix with the given diagonal and
/// off-diagonal, by implicit-shift QL iteration.
inline Spectrum eigen_symmetric_tridiagonal(std::vector<double> d, std::vector<double> offdiag) {
    const std::size_t n = d.size();
    if (n == 0) throw DimensionError("empty diagonal");
    if (offdiag.size() + 1 != n) throw DimensionError("off-diagonal must have length diag-1");
    for (double x : d)
        if (!std::isfinite(x)) throw DomainError("non-finite diagonal entry");
    for (double x : offdiag)
        if (!std::isfinite(x)) throw DomainError("non-finite off-diagonal entry");

    // e[i] couples i and i+1; the trailing slot is scratch.
    std::vector<double> e(std::move(offdiag));
    e.push_back(0.0);
    constexpr double eps = std::numeric_limits<double>::epsilon();
    const long nl = static_cast<long>(n);
    for (long l = 0; l < nl; ++l) {
        int iterations = 0;
        long m;
        do {
            for (m = l; m < nl - 1; ++m) {
                const double dd = std::fabs(d[m]) + std::fabs(d[m + 1]);
                if (std::fabs(e[m]) <= eps * dd) break;
            }
            if (m != l) {
                if (++iterations > 100) throw DomainError("tridiagonal QL iteration did not converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                long i;
                for (i = m - 1; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    return Spectrum(std::move(d), SpectrumKind::eigen);
}

struct Tridiagonal {
    std::vector<double> diag;
    std::vector<double> offdiag;
};

/// Householder reduction of a symmetric matrix to tridiagonal form (similar,
/// hence same eigenvalues).
inline Tridiagonal tridiagonalize(const FloatMatrix& sym) {
    if (!sym.square()) throw DimensionError("tridiagonalize needs a square matrix");
    const std::size_t n = sym.rows();
    FloatMatrix a = sym;
    for (std::size_t k = 0; k + 2 < n; ++k) {
        std::vector<double> v(n, 0.0);
        double norm = 0.0;
        for (std::size_t r = k + 1; r < n; ++r) norm = std::hypot(norm, a(r, k));
        if (norm == 0.0) continue;
        const double alpha = -std::copysign(norm, a(k + 1, k));
        for (std::size_t r = k + 1; r < n; ++r) v[r] = a(r, k);
        v[k + 1] -= alpha;
        double vv = 0.0;
        for (std::size_t r = k + 1; r < n; ++r) vv += v[r] * v[r];
        if (vv == 0.0) continue;
        // A <- H A H with H = I - 2 v v^T / (v^T v)
        for (std::size_t r = 0; r < n; ++r) {
            double dot = 0.0;
            for (std::size_t c = k + 1; c < n; ++c) dot += a(r, c) * v[c];
            const double f = 2.0 * dot / vv;
            for (std::size_t c = k + 1; c < n; ++c) a(r, c) -= f * v[c];
        }
        for (std::size_t c = 0; c < n; ++c) {
            double dot = 0.0;
            for (std::size_t r = k + 1; r < n; ++r) dot += v[r] * a(r, c);
            const double f = 2.0 * dot / vv;
            for (std::size_t r = k + 1; r < n; ++r) a(r, c) -= f * v[r];
        }
    }
    Tridiagonal t;
    for (std::size_t k = 0; k < n; ++k) t.diag.push_back(a(k, k));
    for (std::size_t k = 0; k + 1 < n; ++k) t.offdiag.push_back(0.5 * (a(k + 1, k) + a(k, k + 1)));
    return t;
}

/// Eigenvalues of a symmetric matrix via tridiagonalization and QL.
inline Spectrum eigen_symmetric(const FloatMatrix& sym) {
    auto t = tridiagonalize(sym);
    return eigen_symmetric_tridiagonal(std::move(t.diag), std::move(t.offdiag));
}

namespace detail {

/// 1-based (n+1)×(n+1) scratch grid; index 0 unused.
class Grid {
public:
    explicit Grid(std::size_t n) : n_(n), a_((n + 1) * (n + 1), 0.0) {}
    double& operator()(long i, long j) { return a_[static_cast<std::size_t>(i) * (n_ + 1) + static_cast<std::size_t>(j)]; }

private:
    std::size_t n_;
    std::vector<double> a_;
};

inline void balance(Grid& a, long n) {
    constexpr double radix = 2.0;
    constexpr double sqrdx = radix * radix;
    bool done = false;
    while (!done) {
        done = true;
        for (long i = 1; i <= n; ++i) {
            double r = 0.0, c = 0.0;
            for (long j = 1; j <= n; ++j)
                if (j != i) {
                    c += std::fabs(a(j, i));
                    r += std::fabs(a(i, j));
                }
            if (c == 0.0 || r == 0.0) continue;
            double g = r / radix;
            double f = 1.0;
            const double s = c + r;
            while (c < g) {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while (c > g) {
                f /= radix;
                c /= sqrdx;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                g = 1.0 / f;
                for (long j = 1; j <= n; ++j) a(i, j) *= g;
                for (long j = 1; j <= n; ++j) a(j, i) *= f;
            }
        }
    }
}

/// Orthogonal (Householder) reduction to upper Hessenberg form.
inline void hessenberg(Grid& a, long n) {
    for (long k = 1; k <= n - 2; ++k) {
        double norm = 0.0;
        for (long r = k + 1; r <= n; ++r) norm = std::hypot(norm, a(r, k));
        if (norm == 0.0) continue;
        std::vector<double> v(static_cast<std::size_t>(n + 1), 0.0);
        const double alpha = -std::copysign(norm, a(k + 1, k));
        for (long r = k + 1; r <= n; ++r) v[r] = a(r, k);
        v[k + 1] -= alpha;
        double vv = 0.0;
        for (long r = k + 1; r <= n; ++r) vv += v[r] * v[r];
        if (vv == 0.0) continue;
        for (long c = 1; c <= n; ++c) {
            double dot = 0.0;
            for (long r = k + 1; r <= n; ++r) dot += v[r] * a(r, c);
            const double f = 2.0 * dot / vv;
            for (long r = k + 1; r <= n; ++r) a(r, c) -= f * v[r];
        }
        for (long r = 1; r <= n; ++r) {
            double dot = 0.0;
            for (long c = k + 1; c <= n; ++c) dot += a(r, c) * v[c];
            const double f = 2.0 * dot / vv;
            for (long c = k + 1; c <= n; ++c) a(r, c) -= f * v[c];
        }
        for (long r = k + 2; r <= n; ++r) a(r, k) = 0.0;
    }
}

/// Francis double-shift QR on an upper Hessenberg matrix (EISPACK hqr layout).
inline void hessenberg_qr(Grid& a, long n, std::vector<double>& wr, std::vector<double>& wi) {
    constexpr double eps = std::numeric_limits<double>::epsilon();
    double anorm = 0.0;
    for (long i = 1; i <= n; ++i)
        for (long j = std::max(i - 1, 1L); j <= n; ++j) anorm += std::fabs(a(i, j));
    long nn = n;
    double t = 0.0;
    double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
    while (nn >= 1) {
        int its = 0;
        long l;
        do {
            for (l = nn; l >= 2; --l) {
                s = std::fabs(a(l - 1, l - 1)) + std::fabs(a(l, l));
                if (s == 0.0) s = anorm;
                if (std::fabs(a(l, l - 1)) <= eps * s) {
                    a(l, l - 1) = 0.0;
                    break;
                }
            }
            x = a(nn, nn);
            if (l == nn) {
                wr[nn] = x + t;
                wi[nn] = 0.0;
                --nn;
            } else {
                y = a(nn - 1, nn - 1);
                w = a(nn, nn - 1) * a(nn - 1, nn);
                if (l == nn - 1) {
                    p = 0.5 * (y - x);
                    q = p * p + w;
                    z = std::sqrt(std::fabs(q));
                    x += t;
                    if (q >= 0.0) {
                        z = p + std::copysign(z, p);
                        wr[nn - 1] = wr[nn] = x + z;
                        if (z != 0.0) wr[nn] = x - w / z;
                        wi[nn - 1] = wi[nn] = 0.0;
                    } else {
                        wr[nn - 1] = wr[nn] = x + p;
                        wi[nn] = z;
                        wi[nn - 1] = -z;
                    }
                    nn -= 2;
                } else {
                    if (its == 90) throw DomainError("Hessenberg QR iteration did not converge");
                    if (its > 0 && its % 10 == 0) {
                        // Exceptional shift.
                        t += x;
                        for (long i = 1; i <= nn; ++i) a(i, i) -= x;
                        s = std::fabs(a(nn, nn - 1)) + std::fabs(a(nn - 1, nn - 2));
                        y = x = 0.75 * s;
                        w = -0.4375 * s * s;
                    }
                    ++its;
                    long m;
                    for (m = nn - 2; m >= l; --m) {
                        z = a(m, m);
                        r = x - z;
                        s = y - z;
                        p = (r * s - w) / a(m + 1, m) + a(m, m + 1);
                        q = a(m + 1, m + 1) - z - r - s;
                        r = a(m + 2, m + 1);
                        s = std::fabs(p) + std::fabs(q) + std::fabs(r);
                        p /= s;
                        q /= s;
                        r /= s;
                        if (m == l) break;
                        const double u = std::fabs(a(m, m - 1)) * (std::fabs(q) + std::fabs(r));
                        const double v = std::fabs(p) * (std::fabs(a(m - 1, m - 1)) + std::fabs(z) + std::fabs(a(m + 1, m + 1)));
                        if (u <= eps * v) break;
                    }
                    for (long i = m + 2; i <= nn; ++i) {
                        a(i, i - 2) = 0.0;
                        if (i != m + 2) a(i, i - 3) = 0.0;
                    }
                    for (long k = m; k <= nn - 1; ++k) {
                        if (k != m) {
                            p = a(k, k - 1);
                            q = a(k + 1, k - 1);
                            r = 0.0;
                            if (k != nn - 1) r = a(k + 2, k - 1);
                            x = std::fabs(p) + std::fabs(q) + std::fabs(r);
                            if (x != 0.0) {
                                p /= x;
                                q /= x;
                                r /= x;
                            }
                        }
                        s = std::copysign(std::sqrt(p * p + q * q + r * r), p);
                        if (s != 0.0) {
                            if (k == m) {
                                if (l != m) a(k, k - 1) = -a(k, k - 1);
                            } else {
                                a(k, k - 1) = -s * x;
                            }
                            p += s;
                            x = p / s;
                            y = q / s;
                            z = r / s;
                            q /= p;
                            r /= p;
                            for (long j = k; j <= nn; ++j) {
                                p = a(k, j) + q * a(k + 1, j);
                                if (k != nn - 1) {
                                    p += r * a(k + 2, j);
                                    a(k + 2, j) -= p * z;
                                }
                                a(k + 1, j) -= p * y;
                                a(k, j) -= p * x;
                            }
                            const long mmin = nn < k + 3 ? nn : k + 3;
                            for (long i = l; i <= mmin; ++i) {
                                p = x * a(i, k) + y * a(i, k + 1);
                                if (k != nn - 1) {
                                    p += z * a(i, k + 2);
                                    a(i, k + 2) -= p * r;
                                }
                                a(i, k + 1) -= p * q;
                                a(i, k) -= p;
                            }
                        }
                    }
                }
            }
        } while (l < nn - 1);
    }
}

} // namespace detail

/// Orders complex eigenvalues by real part, then imaginary part.
inline void sort_eigenvalues(std::vector<std::complex<double>>& v) {
    std::sort(v.begin(), v.end(), [](const auto& a, const auto& b) {
        if (a.real() != b.real()) return a.real() < b.real();
        return a.imag() < b.imag();
    });
}

/// All eigenvalues of a real square matrix: balancing, Householder Hessenberg
/// reduction and shifted QR. Sorted by (real, imag).
inline std::vector<std::complex<double>> eigen_general(const FloatMatrix& m) {
    if (!m.square()) throw DimensionError("eigen_general needs a square matrix");
    const long n = static_cast<long>(m.rows());
    detail::Grid a(m.rows());
    for (long i = 1; i <= n; ++i)
        for (long j = 1; j <= n; ++j) a(i, j) = m(static_cast<std::size_t>(i - 1), static_cast<std::size_t>(j - 1));
    detail::balance(a, n);
    detail::hessenberg(a, n);
    std::vector<double> wr(static_cast<std::size_t>(n + 1)), wi(static_cast<std::size_t>(n + 1));
    detail::hessenberg_qr(a, n, wr, wi);
    std::vector<std::complex<double>> out;
    for (long i = 1; i <= n; ++i) out.emplace_back(wr[i], wi[i]);
    sort_eigenvalues(out);
    return out;
}

inline std::vector<std::complex<double>> eigen_general(const RationalMatrix& m) { return eigen_general(to_float(m)); }

} // namespace nullforge
