#pragma once

// Expression language for transform functions g(i,j).
//
//   expr    := term (('+' | '-') term)*
//   term    := unary (('*' | '/') unary)*
//   unary   := '-' unary | power
//   power   := primary ('^' unary)?          right-associative
//   primary := number | identifier | function '(' expr ')' | '(' expr ')'
//   function:= sin | cos | exp | abs
//
// `i` and `j` are the 1-based row and column indices; every other identifier
// is a parameter. `^` binds tighter than unary minus, so -1^j is -(1^j) and the
// alternating sign must be written (-1)^j.

#include "error.hpp"
#include "rational.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace nullforge {

enum class BinaryOp { add, sub, mul, div, pow };
enum class Function { sin, cos, exp, abs };
enum class IndexVar { row, col };

struct Node;
using NodePtr = std::shared_ptr<const Node>;

struct Literal {
    std::string text;
    Rational exact;
    double value;
};
struct ParamRef {
    std::string name;
};
struct IndexRef {
    IndexVar var;
};
struct Negate {
    NodePtr operand;
};
struct Binary {
    BinaryOp op;
    NodePtr lhs;
    NodePtr rhs;
};
struct Call {
    Function fn;
    NodePtr arg;
};

struct Node {
    std::variant<Literal, ParamRef, IndexRef, Negate, Binary, Call> v;
};

namespace detail {

inline bool same_tree(const Node& a, const Node& b);

inline bool same_tree(const NodePtr& a, const NodePtr& b) { return same_tree(*a, *b); }

inline bool same_tree(const Node& a, const Node& b) {
    if (a.v.index() != b.v.index()) return false;
    return std::visit(
        [&](const auto& x) -> bool {
            using T = std::decay_t<decltype(x)>;
            const auto& y = std::get<T>(b.v);
            if constexpr (std::is_same_v<T, Literal>)
                return x.exact == y.exact;
            else if constexpr (std::is_same_v<T, ParamRef>)
                return x.name == y.name;
            else if constexpr (std::is_same_v<T, IndexRef>)
                return x.var == y.var;
            else if constexpr (std::is_same_v<T, Negate>)
                return same_tree(x.operand, y.operand);
            else if constexpr (std::is_same_v<T, Binary>)
                return x.op == y.op && same_tree(x.lhs, y.lhs) && same_tree(x.rhs, y.rhs);
            else
                return x.fn == y.fn && same_tree(x.arg, y.arg);
        },
        a.v);
}

inline const char* op_symbol(BinaryOp op) {
    switch (op) {
    case BinaryOp::add: return "+";
    case BinaryOp::sub: return "-";
    case BinaryOp::mul: return "*";
    case BinaryOp::div: return "/";
    case BinaryOp::pow: return "^";
    }
    return "?";
}

inline const char* function_name(Function f) {
    switch (f) {
    case Function::sin: return "sin";
    case Function::cos: return "cos";
    case Function::exp: return "exp";
    case Function::abs: return "abs";
    }
    return "?";
}

} // namespace detail

/// Immutable expression tree.
class Expr {
public:
    explicit Expr(NodePtr root) : root_(std::move(root)) {}

    const Node& root() const { return *root_; }

    /// Parameter names referenced anywhere in the tree.
    std::set<std::string> parameters() const {
        std::set<std::string> out;
        collect(*root_, out);
        return out;
    }

    /// Fully parenthesized source text; parsing it yields an identical tree.
    std::string to_source() const { return print(*root_); }

    friend bool operator==(const Expr& a, const Expr& b) { return detail::same_tree(*a.root_, *b.root_); }

private:
    static void collect(const Node& n, std::set<std::string>& out) {
        std::visit(
            [&](const auto& x) {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, ParamRef>)
                    out.insert(x.name);
                else if constexpr (std::is_same_v<T, Negate>)
                    collect(*x.operand, out);
                else if constexpr (std::is_same_v<T, Binary>) {
                    collect(*x.lhs, out);
                    collect(*x.rhs, out);
                } else if constexpr (std::is_same_v<T, Call>)
                    collect(*x.arg, out);
            },
            n.v);
    }

    static std::string print(const Node& n) {
        return std::visit(
            [](const auto& x) -> std::string {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Literal>)
                    return x.text;
                else if constexpr (std::is_same_v<T, ParamRef>)
                    return x.name;
                else if constexpr (std::is_same_v<T, IndexRef>)
                    return x.var == IndexVar::row ? "i" : "j";
                else if constexpr (std::is_same_v<T, Negate>)
                    return "(-" + print(*x.operand) + ")";
                else if constexpr (std::is_same_v<T, Binary>)
                    return "(" + print(*x.lhs) + " " + detail::op_symbol(x.op) + " " + print(*x.rhs) + ")";
                else
                    return std::string(detail::function_name(x.fn)) + "(" + print(*x.arg) + ")";
            },
            n.v);
    }

    NodePtr root_;
};

namespace detail {

class Parser {
public:
    explicit Parser(std::string_view src) : src_(src) {}

    Expr parse() {
        skip_space();
        if (pos_ == src_.size()) throw ParseError("empty expression", pos_, "expression");
        NodePtr e = expression();
        skip_space();
        if (pos_ != src_.size()) throw ParseError("unexpected '" + std::string(1, src_[pos_]) + "'", pos_, "operator or end of input");
        return Expr(std::move(e));
    }

private:
    static NodePtr make(auto value) { return std::make_shared<const Node>(Node{std::move(value)}); }

    void skip_space() {
        while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
    }

    bool accept(char c) {
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == c) {
            ++pos_;
            return true;
        }
        return false;
    }

    NodePtr expression() {
        NodePtr lhs = term();
        while (true) {
            if (accept('+'))
                lhs = make(Binary{BinaryOp::add, lhs, term()});
            else if (accept('-'))
                lhs = make(Binary{BinaryOp::sub, lhs, term()});
            else
                return lhs;
        }
    }

    NodePtr term() {
        NodePtr lhs = unary();
        while (true) {
            if (accept('*'))
                lhs = make(Binary{BinaryOp::mul, lhs, unary()});
            else if (accept('/'))
                lhs = make(Binary{BinaryOp::div, lhs, unary()});
            else
                return lhs;
        }
    }

    NodePtr unary() {
        if (accept('-')) return make(Negate{unary()});
        return power();
    }

    NodePtr power() {
        NodePtr base = primary();
        if (accept('^')) return make(Binary{BinaryOp::pow, base, unary()});
        return base;
    }

    NodePtr primary() {
        skip_space();
        if (pos_ == src_.size()) throw ParseError("unexpected end of input", pos_, "number, identifier, '(' or '-'");
        const char c = src_[pos_];
        if (c == '(') {
            ++pos_;
            NodePtr inner = expression();
            if (!accept(')')) throw ParseError("unbalanced parenthesis", pos_, "')'");
            return inner;
        }
        if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
        throw ParseError("unexpected '" + std::string(1, c) + "'", pos_, "number, identifier, '(' or '-'");
    }

    NodePtr number() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.')) ++pos_;
        if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
            std::size_t p = pos_ + 1;
            if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
            if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
                pos_ = p;
                while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_]))) ++pos_;
            }
        }
        std::string text(src_.substr(start, pos_ - start));
        auto exact = parse_rational(text);
        if (!exact) throw ParseError("malformed number '" + text + "'", start, "number");
        const double value = std::strtod(text.c_str(), nullptr);
        return make(Literal{std::move(text), *exact, value});
    }

    NodePtr identifier() {
        const std::size_t start = pos_;
        while (pos_ < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_')) ++pos_;
        std::string name(src_.substr(start, pos_ - start));
        skip_space();
        if (pos_ < src_.size() && src_[pos_] == '(') {
            static const std::map<std::string, Function> functions{
                {"sin", Function::sin}, {"cos", Function::cos}, {"exp", Function::exp}, {"abs", Function::abs}};
            auto it = functions.find(name);
            if (it == functions.end()) throw ParseError("unknown function '" + name + "'", start, "sin, cos, exp or abs");
            ++pos_;
            NodePtr arg = expression();
            if (!accept(')')) throw ParseError("unclosed call to " + name, pos_, "')'");
            return make(Call{it->second, arg});
        }
        if (name == "i") return make(IndexRef{IndexVar::row});
        if (name == "j") return make(IndexRef{IndexVar::col});
        return make(ParamRef{std::move(name)});
    }

    std::string_view src_;
    std::size_t pos_{0};
};

} // namespace detail

inline Expr parse_expr(std::string_view src) { return detail::Parser(src).parse(); }

/// A parsed g(i,j) bound to parameter values. Indices are 1-based.
class TransformFn {
public:
    using Params = std::map<std::string, Number>;

    TransformFn(Expr expr, Params params) : expr_(std::move(expr)), params_(std::move(params)) {
        for (const auto& name : expr_.parameters())
            if (!params_.count(name)) throw DomainError("missing parameter '" + name + "'");
    }

    static TransformFn parse(std::string_view src, Params params = {}) { return TransformFn(parse_expr(src), std::move(params)); }

    const Expr& expr() const noexcept { return expr_; }
    const Params& params() const noexcept { return params_; }
    std::string source() const { return expr_.to_source(); }

    /// Floating evaluation; throws EvalError on a non-finite result.
    double operator()(long i, long j) const {
        const double v = eval(expr_.root(), i, j);
        if (!std::isfinite(v)) throw EvalError("non-finite transform value", i, j);
        return v;
    }

    /// Exact evaluation; throws EvalError when the value is not a rational
    /// (transcendental function of a nonzero argument, irrational root, ...).
    Rational exact(long i, long j) const { return eval_exact(expr_.root(), i, j); }

    template <Scalar S>
    S at(long i, long j) const {
        if constexpr (std::same_as<S, Rational>)
            return exact(i, j);
        else
            return (*this)(i, j);
    }

    /// Value for use as a divisor: finite and nonzero.
    template <Scalar S>
    S divisor(long i, long j) const {
        S v = at<S>(i, j);
        if (is_zero(v)) throw EvalError("transform value is zero", i, j);
        return v;
    }

    /// Eagerly evaluates the whole n×m grid, throwing on the first unusable point.
    template <Scalar S = double>
    void check_grid(long n, long m, bool as_divisor = true) const {
        for (long i = 1; i <= n; ++i)
            for (long j = 1; j <= m; ++j) {
                if (as_divisor)
                    (void)divisor<S>(i, j);
                else
                    (void)at<S>(i, j);
            }
    }

private:
    double param(const std::string& name) const { return params_.at(name).value; }

    double eval(const Node& n, long i, long j) const {
        return std::visit(
            [&](const auto& x) -> double {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Literal>)
                    return x.value;
                else if constexpr (std::is_same_v<T, ParamRef>)
                    return param(x.name);
                else if constexpr (std::is_same_v<T, IndexRef>)
                    return static_cast<double>(x.var == IndexVar::row ? i : j);
                else if constexpr (std::is_same_v<T, Negate>)
                    return -eval(*x.operand, i, j);
                else if constexpr (std::is_same_v<T, Binary>) {
                    const double a = eval(*x.lhs, i, j);
                    const double b = eval(*x.rhs, i, j);
                    switch (x.op) {
                    case BinaryOp::add: return a + b;
                    case BinaryOp::sub: return a - b;
                    case BinaryOp::mul: return a * b;
                    case BinaryOp::div:
                        if (b == 0.0) throw EvalError("division by zero", i, j);
                        return a / b;
                    case BinaryOp::pow:
                        if (a < 0.0 && std::trunc(b) != b)
                            throw EvalError("negative base with non-integer exponent", i, j);
                        return std::pow(a, b);
                    }
                    return 0.0;
                } else {
                    const double a = eval(*x.arg, i, j);
                    switch (x.fn) {
                    case Function::sin: return std::sin(a);
                    case Function::cos: return std::cos(a);
                    case Function::exp: return std::exp(a);
                    case Function::abs: return std::fabs(a);
                    }
                    return 0.0;
                }
            },
            n.v);
    }

    Rational eval_exact(const Node& n, long i, long j) const {
        return std::visit(
            [&](const auto& x) -> Rational {
                using T = std::decay_t<decltype(x)>;
                if constexpr (std::is_same_v<T, Literal>)
                    return x.exact;
                else if constexpr (std::is_same_v<T, ParamRef>)
                    return params_.at(x.name).exact;
                else if constexpr (std::is_same_v<T, IndexRef>)
                    return Rational(x.var == IndexVar::row ? i : j);
                else if constexpr (std::is_same_v<T, Negate>)
                    return -eval_exact(*x.operand, i, j);
                else if constexpr (std::is_same_v<T, Binary>) {
                    const Rational a = eval_exact(*x.lhs, i, j);
                    const Rational b = eval_exact(*x.rhs, i, j);
                    switch (x.op) {
                    case BinaryOp::add: return a + b;
                    case BinaryOp::sub: return a - b;
                    case BinaryOp::mul: return a * b;
                    case BinaryOp::div:
                        if (b.is_zero()) throw EvalError("division by zero", i, j);
                        return a / b;
                    case BinaryOp::pow: {
                        if (a < 0 && boost::multiprecision::denominator(b) != 1)
                            throw EvalError("negative base with non-integer exponent", i, j);
                        auto r = exact_pow(a, b);
                        if (!r) throw EvalError("power is not an exact rational", i, j);
                        return *r;
                    }
                    }
                    return Rational(0);
                } else {
                    const Rational a = eval_exact(*x.arg, i, j);
                    if (x.fn == Function::abs) return a < 0 ? Rational(-a) : a;
                    if (a.is_zero()) return x.fn == Function::sin ? Rational(0) : Rational(1);
                    throw EvalError(std::string(detail::function_name(x.fn)) + " of a nonzero argument is not rational", i, j);
                }
            },
            n.v);
    }

    Expr expr_;
    Params params_;
};

/// Named transform families with their documented source text.
enum class Builtin { constant, row_only, col_only, geometric_cw, alternating_col, sine_row };

struct BuiltinInfo {
    Builtin kind;
    const char* name;
    const char* source;
    const char* parameter;
};

inline const std::vector<BuiltinInfo>& builtin_table() {
    static const std::vector<BuiltinInfo> table{
        {Builtin::constant, "constant", "c", "c"},
        {Builtin::row_only, "row_only", "1/(f+i^2)", "f"},
        {Builtin::col_only, "col_only", "1/(f+j^2)^(1/2)", "f"},
        {Builtin::geometric_cw, "geometric_cw", "f^(i-j)", "f"},
        {Builtin::alternating_col, "alternating_col", "q^((-1)^j*j)", "q"},
        {Builtin::sine_row, "sine_row", "sin(2*a*i)", "a"},
    };
    return table;
}

inline const BuiltinInfo& builtin_info(Builtin b) {
    for (const auto& info : builtin_table())
        if (info.kind == b) return info;
    throw DomainError("unknown builtin");
}

inline Builtin builtin_from_name(std::string_view name) {
    for (const auto& info : builtin_table())
        if (name == info.name) return info.kind;
    throw DomainError("unknown builtin '" + std::string(name) + "'");
}

inline TransformFn builtin(Builtin b, const TransformFn::Params& params) {
    const auto& info = builtin_info(b);
    if (!params.count(info.parameter))
        throw DomainError(std::string("builtin ") + info.name + " needs parameter '" + info.parameter + "'");
    return TransformFn::parse(info.source, params);
}

} // namespace nullforge
