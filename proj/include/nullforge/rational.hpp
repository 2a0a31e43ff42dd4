#pragma once

#include "error.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <concepts>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <type_traits>

namespace nullforge {

using BigInt = boost::multiprecision::cpp_int;
/// Arbitrary-precision rational, always kept in lowest terms with a positive denominator.
using Rational = boost::multiprecision::cpp_rational;

/// The two scalar domains matrices may be built over.
template <class S>
concept Scalar = std::same_as<S, double> || std::same_as<S, Rational>;

enum class Domain { rational, floating };

template <Scalar S>
constexpr Domain domain_of() {
    return std::same_as<S, Rational> ? Domain::rational : Domain::floating;
}

inline std::string to_string(Domain d) { return d == Domain::rational ? "rational" : "float"; }

inline double to_double(const Rational& r) { return static_cast<double>(r); }
inline double to_double(double x) { return x; }

template <Scalar S>
bool is_zero(const S& x) {
    if constexpr (std::same_as<S, Rational>)
        return x.is_zero();
    else
        return x == 0.0;
}

template <Scalar S>
S abs_of(const S& x) {
    if constexpr (std::same_as<S, Rational>)
        return x < 0 ? S(-x) : x;
    else
        return std::fabs(x);
}

/// "p/q" wire format; the denominator is always written.
inline std::string to_string(const Rational& r) {
    return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

inline std::optional<BigInt> parse_integer(std::string_view s) {
    if (s.empty()) return std::nullopt;
    std::size_t pos = 0;
    bool negative = false;
    if (s[0] == '+' || s[0] == '-') {
        negative = s[0] == '-';
        pos = 1;
    }
    if (pos == s.size()) return std::nullopt;
    BigInt value = 0;
    for (; pos < s.size(); ++pos) {
        if (s[pos] < '0' || s[pos] > '9') return std::nullopt;
        value = value * 10 + (s[pos] - '0');
    }
    return negative ? BigInt(-value) : value;
}

inline BigInt pow10(unsigned e) {
    BigInt r = 1;
    for (unsigned k = 0; k < e; ++k) r *= 10;
    return r;
}

} // namespace detail

/// Parses "p/q", an integer, or a decimal with optional exponent ("1.25e-3")
/// into the exact rational it denotes. Decimal text is read exactly, so "0.1"
/// becomes 1/10 rather than the nearest double.
inline std::optional<Rational> parse_rational(std::string_view text) {
    auto s = detail::trim(text);
    if (s.empty()) return std::nullopt;
    if (auto slash = s.find('/'); slash != std::string_view::npos) {
        auto num = detail::parse_integer(detail::trim(s.substr(0, slash)));
        auto den = detail::parse_integer(detail::trim(s.substr(slash + 1)));
        if (!num || !den || den->is_zero()) return std::nullopt;
        return Rational(*num) / Rational(*den);
    }
    std::string_view mantissa = s;
    long exponent = 0;
    if (auto e = s.find_first_of("eE"); e != std::string_view::npos) {
        auto ex = detail::parse_integer(s.substr(e + 1));
        if (!ex || abs(*ex) > 4000) return std::nullopt;
        exponent = ex->convert_to<long>();
        mantissa = s.substr(0, e);
    }
    bool negative = false;
    if (!mantissa.empty() && (mantissa[0] == '+' || mantissa[0] == '-')) {
        negative = mantissa[0] == '-';
        mantissa.remove_prefix(1);
    }
    std::string digits;
    long fraction_digits = 0;
    bool seen_point = false;
    for (char c : mantissa) {
        if (c == '.') {
            if (seen_point) return std::nullopt;
            seen_point = true;
        } else if (c >= '0' && c <= '9') {
            digits.push_back(c);
            if (seen_point) ++fraction_digits;
        } else {
            return std::nullopt;
        }
    }
    if (digits.empty()) return std::nullopt;
    auto value = detail::parse_integer(digits);
    if (!value) return std::nullopt;
    long shift = exponent - fraction_digits;
    Rational r = shift >= 0 ? Rational(*value * detail::pow10(static_cast<unsigned>(shift)))
                            : Rational(*value, detail::pow10(static_cast<unsigned>(-shift)));
    return negative ? Rational(-r) : r;
}

/// Largest integer r with r^k <= x, for x >= 0.
inline BigInt integer_root(const BigInt& x, unsigned k) {
    if (x < 2 || k == 1) return x;
    BigInt lo = 0;
    BigInt hi = 1;
    while (boost::multiprecision::pow(hi, k) <= x) hi <<= 1;
    while (hi - lo > 1) {
        BigInt mid = (lo + hi) >> 1;
        if (boost::multiprecision::pow(mid, k) <= x)
            lo = mid;
        else
            hi = mid;
    }
    return lo;
}

/// Exact k-th root of a nonnegative rational, if it is itself rational.
inline std::optional<Rational> exact_root(const Rational& x, unsigned k) {
    if (x < 0) return std::nullopt;
    const BigInt num = boost::multiprecision::numerator(x);
    const BigInt den = boost::multiprecision::denominator(x);
    BigInt rn = integer_root(num, k);
    BigInt rd = integer_root(den, k);
    if (boost::multiprecision::pow(rn, k) != num || boost::multiprecision::pow(rd, k) != den) return std::nullopt;
    return Rational(rn, rd);
}

inline constexpr long max_exact_exponent = 4096;

/// base^exponent when the result is exactly rational. Integer exponents are
/// always exact (negative bases allowed); p/q exponents need a rational q-th root.
inline std::optional<Rational> exact_pow(const Rational& base, const Rational& exponent) {
    const BigInt p = boost::multiprecision::numerator(exponent);
    const BigInt q = boost::multiprecision::denominator(exponent);
    if (abs(p) > max_exact_exponent || q > 64) return std::nullopt;
    Rational b = base;
    if (q != 1) {
        auto root = exact_root(base, q.convert_to<unsigned>());
        if (!root) return std::nullopt;
        b = *root;
    }
    const long e = p.convert_to<long>();
    if (e == 0) return Rational(1);
    if (b.is_zero()) {
        if (e < 0) return std::nullopt;
        return Rational(0);
    }
    const auto ue = static_cast<unsigned>(e < 0 ? -e : e);
    Rational r(boost::multiprecision::pow(boost::multiprecision::numerator(b), ue),
               boost::multiprecision::pow(boost::multiprecision::denominator(b), ue));
    if (e < 0) r = Rational(1) / r;
    return r;
}

/// A user-supplied real constant, carried both exactly and as a double.
/// Constructed from text the exact value is the decimal the text denotes.
struct Number {
    Rational exact{0};
    double value{0.0};

    Number() = default;
    Number(const Rational& r) : exact(r), value(to_double(r)) {}
    Number(double x) : exact(finite_or_throw(x)), value(x) {}
    Number(int x) : Number(Rational(x)) {}
    Number(long x) : Number(Rational(x)) {}

    static Number parse(std::string_view text) {
        auto r = parse_rational(text);
        if (!r) throw DomainError("not a number: '" + std::string(text) + "'");
        return Number(*r);
    }

    template <Scalar S>
    S as() const {
        if constexpr (std::same_as<S, Rational>)
            return exact;
        else
            return value;
    }

    /// Shortest text that reproduces the exact value.
    std::string str() const {
        if (boost::multiprecision::denominator(exact) == 1) return boost::multiprecision::numerator(exact).str();
        return to_string(exact);
    }

    friend bool operator==(const Number& a, const Number& b) { return a.exact == b.exact; }

private:
    static Rational finite_or_throw(double x) {
        if (!std::isfinite(x)) throw DomainError("non-finite number");
        return Rational(x);
    }
};

} // namespace nullforge
