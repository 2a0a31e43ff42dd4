#pragma once

#include "error.hpp"
#include "matrix.hpp"
#include "rational.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace nullforge {

/// Normalized component magnitudes of a mode. `log10_amplitude[k]` is empty
/// for an exactly zero component; JSON writes it as null.
struct Profile {
    std::vector<int> site;
    std::vector<double> amplitude;
    std::vector<std::optional<double>> log10_amplitude;
    double normalization{1.0};

    std::size_t size() const noexcept { return site.size(); }
};

inline Profile profile(std::span<const double> v) {
    if (v.empty()) throw DimensionError("profile of an empty vector");
    const double norm = euclidean_norm(v);
    if (norm == 0.0) throw DomainError("profile of the zero vector");
    Profile p;
    p.normalization = norm;
    for (std::size_t k = 0; k < v.size(); ++k) {
        const double amp = std::fabs(v[k]) / norm;
        p.site.push_back(static_cast<int>(k) + 1);
        p.amplitude.push_back(amp);
        if (amp > 0.0)
            p.log10_amplitude.emplace_back(std::log10(amp));
        else
            p.log10_amplitude.emplace_back(std::nullopt);
    }
    return p;
}

inline Profile profile(const std::vector<double>& v) { return profile(std::span<const double>(v)); }

inline Profile profile(const std::vector<Rational>& v) {
    std::vector<double> d;
    d.reserve(v.size());
    for (const auto& x : v) d.push_back(to_double(x));
    return profile(d);
}

struct Localization {
    double ipr{0.0};
    int peak_site{0};
    double suppression{0.0};
};

/// Inverse participation ratio, the site of largest amplitude (first on ties),
/// and smallest over largest nonzero amplitude.
inline Localization localization_metrics(const Profile& p) {
    if (p.size() == 0) throw DimensionError("empty profile");
    Localization out;
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) {
        const double a = p.amplitude[k];
        out.ipr += a * a * a * a;
        if (a > hi) {
            hi = a;
            out.peak_site = p.site[k];
        }
        if (a > 0.0) lo = std::min(lo, a);
    }
    out.suppression = hi > 0.0 ? lo / hi : 0.0;
    return out;
}

enum class GapLaw { constant, linear_in_k };

inline std::string to_string(GapLaw l) { return l == GapLaw::constant ? "constant" : "linear_in_k"; }

inline GapLaw gap_law_from_string(std::string_view s) {
    if (s == "constant") return GapLaw::constant;
    if (s == "linear_in_k" || s == "linear") return GapLaw::linear_in_k;
    throw DomainError("unknown gap law '" + std::string(s) + "'");
}

struct GapFit {
    GapLaw law{GapLaw::constant};
    double coeff{0.0};
    double max_rel_residual{0.0};
    int first_k{1};
    std::size_t points{0};
};

/// Least-squares fit of d_k = c (constant) or d_k = c (2k-1) (linear_in_k),
/// where gaps[p] carries mode number first_k + p. The residual is
/// max_k |d_k - model_k| / |d_k|.
inline GapFit fit_gap_law(std::span<const double> gaps, GapLaw law, int first_k = 1) {
    if (gaps.size() < 3) throw DomainError("gap fit needs at least 3 gaps, got " + std::to_string(gaps.size()));
    for (double d : gaps)
        if (!std::isfinite(d)) throw DomainError("non-finite gap");
    std::vector<double> w(gaps.size(), 1.0);
    if (law == GapLaw::linear_in_k)
        for (std::size_t p = 0; p < gaps.size(); ++p) w[p] = 2.0 * (first_k + static_cast<double>(p)) - 1.0;
    double num = 0.0, den = 0.0;
    for (std::size_t p = 0; p < gaps.size(); ++p) {
        num += w[p] * gaps[p];
        den += w[p] * w[p];
    }
    if (den == 0.0) throw DomainError("degenerate gap-law weights");
    GapFit fit;
    fit.law = law;
    fit.first_k = first_k;
    fit.points = gaps.size();
    fit.coeff = num / den;
    for (std::size_t p = 0; p < gaps.size(); ++p) {
        const double err = std::fabs(gaps[p] - fit.coeff * w[p]);
        const double rel = gaps[p] != 0.0 ? err / std::fabs(gaps[p]) : (err == 0.0 ? 0.0 : std::numeric_limits<double>::infinity());
        fit.max_rel_residual = std::max(fit.max_rel_residual, rel);
    }
    return fit;
}

inline GapFit fit_gap_law(const std::vector<double>& gaps, GapLaw law, int first_k = 1) {
    return fit_gap_law(std::span<const double>(gaps), law, first_k);
}

} // namespace nullforge
