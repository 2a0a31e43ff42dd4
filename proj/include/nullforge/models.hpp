#pragma once

#include "analysis.hpp"
#include "eigen.hpp"
#include "linalg.hpp"
#include "spectrum.hpp"
#include "svd.hpp"
#include "transform.hpp"

#include <cmath>
#include <map>
#include <numbers>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace nullforge {

enum class ModelKind { uniform_cw, generalized_cw, nonlocal_cw, deconstruction, kk_bidiagonal };

inline std::string to_string(ModelKind k) {
    switch (k) {
    case ModelKind::uniform_cw: return "uniform_cw";
    case ModelKind::generalized_cw: return "generalized_cw";
    case ModelKind::nonlocal_cw: return "nonlocal_cw";
    case ModelKind::deconstruction: return "deconstruction";
    case ModelKind::kk_bidiagonal: return "kk_bidiagonal";
    }
    return "?";
}

inline ModelKind model_kind_from_string(std::string_view s) {
    for (auto k : {ModelKind::uniform_cw, ModelKind::generalized_cw, ModelKind::nonlocal_cw, ModelKind::deconstruction,
                   ModelKind::kk_bidiagonal})
        if (to_string(k) == s) return k;
    throw DomainError("unknown model kind '" + std::string(s) + "'");
}

/// Parameter names each model accepts. Scalars are stored as length-1 arrays.
///  uniform_cw:      m (1)                           rows (m, m)
///  generalized_cw:  m_i or m, q_i or q              rows (m_i, m_i q_i)
///  nonlocal_cw:     a = [a_0, a_1, ...]             H(i, i+k) = a_k
///  deconstruction:  m (1)                           tridiagonal, m on all bands
///  kk_bidiagonal:   Mf (1), g (1), gp (1)           (N+1)×N, Mf g diagonal, -Mf gp below
inline const std::set<std::string>& model_param_names(ModelKind k) {
    static const std::map<ModelKind, std::set<std::string>> names = {
        {ModelKind::uniform_cw, {"m"}},
        {ModelKind::generalized_cw, {"m", "m_i", "q", "q_i"}},
        {ModelKind::nonlocal_cw, {"a"}},
        {ModelKind::deconstruction, {"m"}},
        {ModelKind::kk_bidiagonal, {"Mf", "g", "gp"}},
    };
    return names.at(k);
}

/// Transform composed after construction.
struct GfSpec {
    std::string expr;
    TransformFn::Params params;
    Mode mode{Mode::multiply};

    TransformFn fn() const { return TransformFn::parse(expr, params); }
};

struct ModelSpec {
    using Params = std::map<std::string, std::vector<Number>>;

    ModelKind kind{ModelKind::uniform_cw};
    long n{1};
    Params params;
    std::optional<GfSpec> gf;

    bool has(const std::string& name) const { return params.count(name) != 0; }

    Number scalar(const std::string& name, Number fallback) const {
        auto it = params.find(name);
        if (it == params.end()) return fallback;
        if (it->second.size() != 1) throw DomainError("parameter '" + name + "' must be a scalar");
        return it->second.front();
    }

    /// Site-dependent values: the array `name_i` of length n, else the scalar
    /// `name` repeated, else `fallback` repeated.
    std::vector<Number> per_site(const std::string& name, Number fallback) const {
        if (auto it = params.find(name + "_i"); it != params.end()) {
            if (static_cast<long>(it->second.size()) != n)
                throw DomainError("parameter '" + name + "_i' needs " + std::to_string(n) + " values");
            return it->second;
        }
        return std::vector<Number>(static_cast<std::size_t>(n), scalar(name, fallback));
    }

    /// The kk model uses the transformed mass formula when g or gp is given.
    bool kk_transformed() const { return kind == ModelKind::kk_bidiagonal && (has("g") || has("gp")); }
};

inline void validate(const ModelSpec& spec) {
    if (spec.n < 1) throw DomainError("model size n must be at least 1");
    const auto& allowed = model_param_names(spec.kind);
    for (const auto& [name, values] : spec.params) {
        if (!allowed.count(name)) throw DomainError("model " + to_string(spec.kind) + " has no parameter '" + name + "'");
        if (values.empty()) throw DomainError("parameter '" + name + "' is empty");
    }
    auto positive = [](const Number& x, const std::string& what) {
        if (!(x.exact > 0)) throw DomainError(what + " must be > 0");
    };
    switch (spec.kind) {
    case ModelKind::uniform_cw:
        positive(spec.scalar("m", 1), "mass scale m");
        break;
    case ModelKind::generalized_cw:
        if (spec.has("m") && spec.has("m_i")) throw DomainError("give either m or m_i");
        if (spec.has("q") && spec.has("q_i")) throw DomainError("give either q or q_i");
        for (const auto& m : spec.per_site("m", 1)) positive(m, "mass scale m_i");
        (void)spec.per_site("q", 1);
        break;
    case ModelKind::nonlocal_cw: {
        if (!spec.has("a")) throw DomainError("nonlocal_cw needs band couplings a");
        const auto& a = spec.params.at("a");
        if (static_cast<long>(a.size()) > spec.n + 1) throw DomainError("nonlocal_cw has at most n+1 bands");
        if (a.front().exact == 0) throw DomainError("band coupling a_0 must be nonzero");
        break;
    }
    case ModelKind::deconstruction: positive(spec.scalar("m", 1), "mass scale m"); break;
    case ModelKind::kk_bidiagonal:
        positive(spec.scalar("Mf", 1), "mass scale Mf");
        (void)spec.scalar("g", 1);
        (void)spec.scalar("gp", 1);
        break;
    }
    if (spec.gf) (void)spec.gf->fn();
}

/// Mass matrix of the model with the optional transform applied afterwards.
template <Scalar S>
DenseMatrix<S> build(const ModelSpec& spec) {
    validate(spec);
    const auto n = static_cast<std::size_t>(spec.n);
    DenseMatrix<S> h(1, 1);
    switch (spec.kind) {
    case ModelKind::uniform_cw: {
        const S m = spec.scalar("m", 1).as<S>();
        h = DenseMatrix<S>(n, n + 1);
        for (std::size_t i = 0; i < n; ++i) h(i, i) = h(i, i + 1) = m;
        break;
    }
    case ModelKind::generalized_cw: {
        const auto m = spec.per_site("m", 1);
        const auto q = spec.per_site("q", 1);
        h = DenseMatrix<S>(n, n + 1);
        for (std::size_t i = 0; i < n; ++i) {
            h(i, i) = m[i].as<S>();
            h(i, i + 1) = m[i].as<S>() * q[i].as<S>();
        }
        break;
    }
    case ModelKind::nonlocal_cw: {
        const auto& a = spec.params.at("a");
        h = DenseMatrix<S>(n, n + 1);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < a.size() && i + k <= n; ++k) h(i, i + k) = a[k].as<S>();
        break;
    }
    case ModelKind::deconstruction: {
        const S m = spec.scalar("m", 1).as<S>();
        h = DenseMatrix<S>(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            h(i, i) = m;
            if (i + 1 < n) h(i, i + 1) = h(i + 1, i) = m;
        }
        break;
    }
    case ModelKind::kk_bidiagonal: {
        const S mf = spec.scalar("Mf", 1).as<S>();
        const S g = spec.scalar("g", 1).as<S>();
        const S gp = spec.scalar("gp", 1).as<S>();
        h = DenseMatrix<S>(n + 1, n);
        for (std::size_t i = 0; i < n; ++i) {
            h(i, i) = mf * g;
            h(i + 1, i) = -(mf * gp);
        }
        break;
    }
    }
    if (spec.gf) h = apply_transform(h, spec.gf->fn(), spec.gf->mode);
    return h;
}

enum class ZeroModeKind { cw_geometric, alternating_col, nonlocal_multinomial, decon_mod3, decon_transformed_right, decon_transformed_left };

inline std::string to_string(ZeroModeKind k) {
    switch (k) {
    case ZeroModeKind::cw_geometric: return "cw_geometric";
    case ZeroModeKind::alternating_col: return "alternating_col";
    case ZeroModeKind::nonlocal_multinomial: return "nonlocal_multinomial";
    case ZeroModeKind::decon_mod3: return "decon_mod3";
    case ZeroModeKind::decon_transformed_right: return "decon_transformed_right";
    case ZeroModeKind::decon_transformed_left: return "decon_transformed_left";
    }
    return "?";
}

inline ZeroModeKind zero_mode_kind_from_string(std::string_view s) {
    for (auto k : {ZeroModeKind::cw_geometric, ZeroModeKind::alternating_col, ZeroModeKind::nonlocal_multinomial,
                   ZeroModeKind::decon_mod3, ZeroModeKind::decon_transformed_right, ZeroModeKind::decon_transformed_left})
        if (to_string(k) == s) return k;
    throw DomainError("unknown zero-mode formula '" + std::string(s) + "'");
}

/// Closed-form zero mode of a model, components k = 1..M.
///
///  cw_geometric (q, length n+1)       (-q)^(n+2-k); kernel of uniform_cw with g = q^(i-j), divide
///  alternating_col (q, length n+1)    (-1)^k q^(n+1-(-1)^k k); uniform_cw with g = q^((-1)^j j), multiply
///  nonlocal_multinomial (a, n+1)      composition sum over n k_n + ... + k_1 = n+1-K
///  decon_mod3 (length n)              -1, 1, 0 for k mod 3 = 1, 2, 0
///  decon_transformed_right (a, n)     right mode of the deconstruction matrix times sin(2ai) a^((-1)^j j), multiply
///  decon_transformed_left (a, n)      left mode of the same matrix
///
/// `mode` selects the transform direction the formula describes. Each
/// transformed formula has a native direction (listed above); asking for the
/// other one substitutes q -> 1/q (a -> 1/a), and for the left mode replaces
/// the row-factor quotient by its reciprocal. nonlocal_multinomial and
/// decon_mod3 describe untransformed models and ignore `mode`.
struct ZeroModeFormula {
    ZeroModeKind kind{ZeroModeKind::cw_geometric};
    std::map<std::string, std::vector<Number>> params;
    std::optional<Mode> mode;

    Mode native_mode() const {
        return kind == ZeroModeKind::cw_geometric ? Mode::divide : Mode::multiply;
    }
    bool inverted() const { return mode && *mode != native_mode(); }

    Number scalar(const std::string& name) const {
        auto it = params.find(name);
        if (it == params.end() || it->second.size() != 1) throw DomainError(to_string(kind) + " needs scalar parameter '" + name + "'");
        return it->second.front();
    }
};

/// Largest n accepted by the composition enumeration.
inline constexpr long max_multinomial_n = 12;

namespace detail {

template <Scalar S>
S ipow(S base, long e) {
    const bool neg = e < 0;
    unsigned long u = static_cast<unsigned long>(neg ? -e : e);
    S r(1);
    while (u) {
        if (u & 1u) r *= base;
        base *= base;
        u >>= 1u;
    }
    if (neg) {
        if (is_zero(r)) throw DomainError("zero raised to a negative power");
        r = S(1) / r;
    }
    return r;
}

inline long mod3_sign(long k) { return k % 3 == 1 ? 1 : (k % 3 == 2 ? -1 : 0); }

inline void require_mod3(long n, ZeroModeKind kind) {
    if (n < 2 || n % 3 != 2) throw DomainError(to_string(kind) + " needs n = 2 (mod 3), got n = " + std::to_string(n));
}

inline BigInt factorial(long k) {
    BigInt r = 1;
    for (long i = 2; i <= k; ++i) r *= i;
    return r;
}

/// Enumerates (k_1..k_n) with sum m k_m = target by DFS from the top band down.
template <Scalar S>
void multinomial_sum(long m, long remaining, std::vector<long>& k, const std::vector<S>& neg_ratio, S& acc) {
    if (m == 0) {
        if (remaining != 0) return;
        long total = 0;
        for (long x : k) total += x;
        BigInt coef = factorial(total);
        for (long x : k) coef /= factorial(x);
        S term;
        if constexpr (std::same_as<S, Rational>)
            term = Rational(coef);
        else
            term = coef.convert_to<double>();
        for (std::size_t b = 0; b < k.size(); ++b)
            if (k[b]) term *= ipow(neg_ratio[b], k[b]);
        acc += term;
        return;
    }
    for (long c = 0; c * m <= remaining; ++c) {
        k[m - 1] = c;
        multinomial_sum(m - 1, remaining - c * m, k, neg_ratio, acc);
    }
    k[m - 1] = 0;
}

} // namespace detail

template <Scalar S = double>
std::vector<S> zero_mode_analytic(const ZeroModeFormula& formula, long n) {
    if (n < 1) throw DomainError("zero-mode formula needs n >= 1");
    std::vector<S> v;
    switch (formula.kind) {
    case ZeroModeKind::cw_geometric: {
        S q = formula.scalar("q").as<S>();
        if (is_zero(q)) throw DomainError("cw_geometric needs q != 0");
        if (formula.inverted()) q = S(1) / q;
        for (long k = 1; k <= n + 1; ++k) v.push_back(detail::ipow(S(-q), n + 2 - k));
        break;
    }
    case ZeroModeKind::alternating_col: {
        S q = formula.scalar("q").as<S>();
        if (is_zero(q)) throw DomainError("alternating_col needs q != 0");
        if (formula.inverted()) q = S(1) / q;
        for (long k = 1; k <= n + 1; ++k) {
            const long sgn = k % 2 == 0 ? 1 : -1;
            v.push_back(S(sgn) * detail::ipow(q, n + 1 - sgn * k));
        }
        break;
    }
    case ZeroModeKind::nonlocal_multinomial: {
        if (n > max_multinomial_n) throw DomainError("nonlocal_multinomial is limited to n <= " + std::to_string(max_multinomial_n));
        auto it = formula.params.find("a");
        if (it == formula.params.end() || it->second.empty()) throw DomainError("nonlocal_multinomial needs band couplings a");
        const auto& a = it->second;
        const S a0 = a.front().as<S>();
        if (is_zero(a0)) throw DomainError("band coupling a_0 must be nonzero");
        // (-a_m)^k / a_0^k folded into one ratio per band.
        std::vector<S> neg_ratio(static_cast<std::size_t>(n), S(0));
        for (long m = 1; m <= n && m < static_cast<long>(a.size()); ++m) neg_ratio[m - 1] = S(-a[m].as<S>() / a0);
        std::vector<long> k(static_cast<std::size_t>(n), 0);
        for (long K = 1; K <= n + 1; ++K) {
            S acc(0);
            detail::multinomial_sum(n, n + 1 - K, k, neg_ratio, acc);
            v.push_back(acc);
        }
        break;
    }
    case ZeroModeKind::decon_mod3:
        detail::require_mod3(n, formula.kind);
        for (long k = 1; k <= n; ++k) v.push_back(S(-detail::mod3_sign(k)));
        break;
    case ZeroModeKind::decon_transformed_right: {
        detail::require_mod3(n, formula.kind);
        S a = formula.scalar("a").as<S>();
        if (is_zero(a)) throw DomainError("decon_transformed_right needs a != 0");
        if (formula.inverted()) a = S(1) / a;
        // n = 2 + 3(2h) is even, n = 2 + 3(2h-1) is odd.
        const bool even_regime = ((n - 2) / 3) % 2 == 0;
        for (long k = 1; k <= n; ++k) {
            const long s = detail::mod3_sign(k);
            if (s == 0) {
                v.push_back(S(0));
                continue;
            }
            const long e = n - ((n - k) % 2 == 0 ? k : -k);
            v.push_back(S(s) * detail::ipow(a, even_regime ? e : -e));
        }
        break;
    }
    case ZeroModeKind::decon_transformed_left: {
        if constexpr (std::same_as<S, Rational>) {
            throw DomainError("decon_transformed_left involves sin and has no exact form");
        } else {
            detail::require_mod3(n, formula.kind);
            const double a = formula.scalar("a").value;
            const double top = std::sin(2.0 * n * a);
            for (long k = 1; k <= n; ++k) {
                const long s = detail::mod3_sign(k);
                const double sk = std::sin(2.0 * k * a);
                if (sk == 0.0 || top == 0.0) throw DomainError("sin(2ka) vanishes; choose a not a multiple of pi/2");
                if (s == 0)
                    v.push_back(0.0);
                else
                    v.push_back(formula.inverted() ? s * sk / top : s * top / sk);
            }
        }
        break;
    }
    }
    return v;
}

/// Unit-norm variant.
inline std::vector<double> zero_mode_normalized(const ZeroModeFormula& formula, long n) {
    auto v = zero_mode_analytic<double>(formula, n);
    const double norm = euclidean_norm(v);
    if (norm == 0.0) throw DomainError("zero-mode formula produced the zero vector");
    for (double& x : v) x /= norm;
    return v;
}

/// Finite-N index convention for the KK mass formulas: `nominal` uses N as
/// given, `shifted` uses N+1 (the number of rows of the bidiagonal matrix).
enum class KkConvention { nominal, shifted };

inline std::string to_string(KkConvention c) { return c == KkConvention::nominal ? "nominal" : "shifted"; }

/// Analytic KK masses for k = 1..N_eff-1, labelled by k.
///  untransformed: 2 Mf sin(k pi / 2 N_eff)
///  transformed:   Mf sqrt(g^2 + gp^2 + 2 g gp cos(k pi / N_eff))
inline Spectrum spectrum_analytic(const ModelSpec& spec, KkConvention convention = KkConvention::nominal) {
    if (spec.kind != ModelKind::kk_bidiagonal) throw DomainError("analytic spectrum is only known for kk_bidiagonal");
    if (spec.gf) throw DomainError("no analytic spectrum for an extra transform on the kk model");
    validate(spec);
    const double mf = spec.scalar("Mf", 1).value;
    const double g = spec.scalar("g", 1).value;
    const double gp = spec.scalar("gp", 1).value;
    const long n_eff = convention == KkConvention::nominal ? spec.n : spec.n + 1;
    std::vector<double> m;
    std::vector<int> k;
    for (long j = 1; j < n_eff; ++j) {
        const double x = std::numbers::pi * static_cast<double>(j) / static_cast<double>(n_eff);
        if (spec.kk_transformed())
            m.push_back(mf * std::sqrt(std::max(0.0, g * g + gp * gp + 2.0 * g * gp * std::cos(x))));
        else
            m.push_back(2.0 * mf * std::sin(x / 2.0));
        k.push_back(static_cast<int>(j));
    }
    return Spectrum(std::move(m), std::move(k), SpectrumKind::singular);
}

/// Singular values of the built matrix.
inline Spectrum spectrum_numeric(const ModelSpec& spec) { return singular_values(build<double>(spec)); }

/// How one index convention lines up with the numeric singular values: each
/// analytic mass is paired with the nearest unused numeric value, numeric
/// values left over are edge values.
struct ConventionFit {
    KkConvention convention{KkConvention::nominal};
    long n_eff{0};
    Spectrum analytic;
    std::vector<double> matched_numeric;
    double max_abs_error{0.0};
    std::vector<double> edge_values;
};

struct KkAdjudication {
    Spectrum numeric;
    ConventionFit nominal;
    ConventionFit shifted;
    KkConvention chosen{KkConvention::nominal};

    const ConventionFit& best() const { return chosen == KkConvention::nominal ? nominal : shifted; }
};

namespace detail {

inline ConventionFit fit_convention(const ModelSpec& spec, const Spectrum& numeric, KkConvention c) {
    ConventionFit fit;
    fit.convention = c;
    fit.n_eff = c == KkConvention::nominal ? spec.n : spec.n + 1;
    fit.analytic = spectrum_analytic(spec, c);
    std::vector<bool> used(numeric.size(), false);
    for (double want : fit.analytic.values) {
        std::size_t best = numeric.size();
        for (std::size_t p = 0; p < numeric.size(); ++p)
            if (!used[p] && (best == numeric.size() || std::fabs(numeric.values[p] - want) < std::fabs(numeric.values[best] - want)))
                best = p;
        if (best == numeric.size()) {
            fit.max_abs_error = std::numeric_limits<double>::infinity();
            fit.matched_numeric.push_back(std::nan(""));
            continue;
        }
        used[best] = true;
        fit.matched_numeric.push_back(numeric.values[best]);
        fit.max_abs_error = std::max(fit.max_abs_error, std::fabs(numeric.values[best] - want));
    }
    for (std::size_t p = 0; p < numeric.size(); ++p)
        if (!used[p]) fit.edge_values.push_back(numeric.values[p]);
    return fit;
}

} // namespace detail

/// Compares both index conventions against the numeric singular values and
/// picks the one with the smaller worst-case error.
inline KkAdjudication adjudicate_kk_spectrum(const ModelSpec& spec) {
    if (spec.kind != ModelKind::kk_bidiagonal) throw DomainError("adjudication is only defined for kk_bidiagonal");
    KkAdjudication r;
    r.numeric = spectrum_numeric(spec);
    r.nominal = detail::fit_convention(spec, r.numeric, KkConvention::nominal);
    r.shifted = detail::fit_convention(spec, r.numeric, KkConvention::shifted);
    r.chosen = r.shifted.max_abs_error < r.nominal.max_abs_error ? KkConvention::shifted : KkConvention::nominal;
    return r;
}

/// Consecutive mass gaps in mode order, with both gap-law fits over k <= max_k.
/// When masses grow with k the gap is m_{k+1} - m_k labelled k; when they
/// fall with k it is m_{k-1} - m_k labelled k.
struct GapReport {
    std::vector<int> k;
    std::vector<double> gaps;
    std::optional<GapFit> constant;
    std::optional<GapFit> linear;
};

inline GapReport mass_gaps(const Spectrum& s, int max_k = 0) {
    if (s.size() < 2) throw DomainError("mass gaps need at least 2 values");
    std::vector<std::pair<int, double>> by_mode;
    for (std::size_t p = 0; p < s.size(); ++p) by_mode.emplace_back(s.mode_index[p], s.values[p]);
    std::sort(by_mode.begin(), by_mode.end());
    const bool rising = by_mode.back().second >= by_mode.front().second;
    GapReport r;
    for (std::size_t p = 1; p < by_mode.size(); ++p) {
        const int label = rising ? by_mode[p - 1].first : by_mode[p].first;
        if (max_k > 0 && label > max_k) continue;
        r.k.push_back(label);
        r.gaps.push_back(rising ? by_mode[p].second - by_mode[p - 1].second : by_mode[p - 1].second - by_mode[p].second);
    }
    if (r.gaps.size() >= 3) {
        r.constant = fit_gap_law(r.gaps, GapLaw::constant, r.k.front());
        r.linear = fit_gap_law(r.gaps, GapLaw::linear_in_k, r.k.front());
    }
    return r;
}

template <Scalar S>
struct ChiralModes {
    NullBasis<S> right;
    NullBasis<S> left;
};

/// Right modes span ker M, left modes span ker M^T (real entries).
template <Scalar S>
ChiralModes<S> chiral_zero_modes(const DenseMatrix<S>& m, double tol = default_rank_tol) {
    return {null_basis(m, tol), null_basis(m.transpose(), tol)};
}

} // namespace nullforge
