#include <nullforge/gfdsl.hpp>

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace nullforge;

namespace {

const Binary& as_binary(const Node& n) { return std::get<Binary>(n.v); }

TransformFn::Params params(std::initializer_list<std::pair<const std::string, Number>> p) { return p; }

} // namespace

TEST(Parse, PowerOfIndexDifference) {
    const Expr e = parse_expr("q^(i-j)");
    const auto& pow = as_binary(e.root());
    EXPECT_EQ(pow.op, BinaryOp::pow);
    EXPECT_EQ(std::get<ParamRef>(pow.lhs->v).name, "q");
    const auto& diff = as_binary(*pow.rhs);
    EXPECT_EQ(diff.op, BinaryOp::sub);
    EXPECT_EQ(std::get<IndexRef>(diff.lhs->v).var, IndexVar::row);
    EXPECT_EQ(std::get<IndexRef>(diff.rhs->v).var, IndexVar::col);
}

TEST(Parse, Literal) {
    const Expr e = parse_expr("1");
    EXPECT_EQ(std::get<Literal>(e.root().v).exact, Rational(1));
    EXPECT_EQ(std::get<Literal>(parse_expr("0.25").root().v).exact, Rational(1, 4));
    EXPECT_EQ(std::get<Literal>(parse_expr("1e-2").root().v).exact, Rational(1, 100));
}

TEST(Parse, SineTimesAlternatingPower) {
    const Expr e = parse_expr("sin(2*a*i)*a^((-1)^j*j)");
    const auto& product = as_binary(e.root());
    EXPECT_EQ(product.op, BinaryOp::mul);
    const auto& call = std::get<Call>(product.lhs->v);
    EXPECT_EQ(call.fn, Function::sin);
    const auto& pow = as_binary(*product.rhs);
    EXPECT_EQ(pow.op, BinaryOp::pow);
    const auto& exponent = as_binary(*pow.rhs);
    EXPECT_EQ(exponent.op, BinaryOp::mul);
    const auto& sign = as_binary(*exponent.lhs);
    EXPECT_EQ(sign.op, BinaryOp::pow);
    EXPECT_TRUE(std::holds_alternative<Negate>(sign.lhs->v));
    EXPECT_EQ(e.parameters(), (std::set<std::string>{"a"}));
}

TEST(Parse, PrecedenceAndAssociativity) {
    EXPECT_EQ(parse_expr("-1^j"), parse_expr("-(1^j)"));
    EXPECT_FALSE(parse_expr("-1^j") == parse_expr("(-1)^j"));
    EXPECT_EQ(parse_expr("a^b^c"), parse_expr("a^(b^c)"));
    EXPECT_EQ(parse_expr("a-b-c"), parse_expr("(a-b)-c"));
    EXPECT_EQ(parse_expr("a+b*c^2"), parse_expr("a+(b*(c^2))"));
    EXPECT_EQ(parse_expr("2^-i"), parse_expr("2^(-i)"));
    EXPECT_EQ(parse_expr("  q ^ ( i - j ) "), parse_expr("q^(i-j)"));
}

TEST(Parse, ErrorsCarryPosition) {
    try {
        parse_expr("q^(i-j");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 6u);
        EXPECT_EQ(e.expected(), "')'");
    }
    try {
        parse_expr("tan(i)");
        FAIL() << "expected ParseError";
    } catch (const ParseError& e) {
        EXPECT_EQ(e.position(), 0u);
        EXPECT_NE(std::string(e.what()).find("unknown function"), std::string::npos);
    }
    EXPECT_THROW(parse_expr(""), ParseError);
    EXPECT_THROW(parse_expr("i+"), ParseError);
    EXPECT_THROW(parse_expr("i j"), ParseError);
    EXPECT_THROW(parse_expr("i $ j"), ParseError);
    EXPECT_THROW(parse_expr("1.2.3"), ParseError);
}

TEST(Parse, PrintRoundTripProperty) {
    const char* sources[] = {"q^(i-j)", "sin(2*a*i)*a^((-1)^j*j)", "1/(f+i^2)", "1/(f+j^2)^(1/2)",
                             "-x^-2+abs(i-j)/exp(0.5*j)", "a^b^c", "-(-i)", "cos(i)*(j+1e-3)"};
    for (const char* s : sources) {
        const Expr e = parse_expr(s);
        EXPECT_EQ(parse_expr(e.to_source()), e) << s << " -> " << e.to_source();
    }
    // Random trees.
    std::mt19937_64 rng(4);
    const char* atoms[] = {"i", "j", "q", "2", "0.5"};
    const char* ops[] = {"+", "-", "*", "/", "^"};
    for (int trial = 0; trial < 200; ++trial) {
        std::string s = atoms[rng() % 5];
        for (int k = 0; k < 4; ++k) {
            std::string rhs = atoms[rng() % 5];
            if (rng() % 3 == 0) rhs = "sin(" + rhs + ")";
            if (rng() % 4 == 0) rhs = "-" + rhs;
            s = (rng() % 2 ? "(" + s + ")" : s) + ops[rng() % 5] + rhs;
        }
        const Expr e = parse_expr(s);
        EXPECT_EQ(parse_expr(e.to_source()), e) << s;
    }
}

TEST(Evaluate, ExamplesFromTheTransformFamilies) {
    const auto g = TransformFn::parse("q^(i-j)", params({{"q", 2}}));
    EXPECT_EQ(g(3, 1), 4.0);
    EXPECT_EQ(g.exact(3, 1), Rational(4));
    EXPECT_EQ(g.exact(1, 3), Rational(1, 4));

    const auto alt = TransformFn::parse("q^((-1)^j*j)", params({{"q", 2}}));
    EXPECT_EQ(alt(1, 2), 4.0);
    EXPECT_EQ(alt(1, 3), 0.125);
    EXPECT_EQ(alt.exact(1, 3), Rational(1, 8));

    const auto s = TransformFn::parse("sin(2*a*i)", params({{"a", 1}}));
    EXPECT_EQ(s(1, 7), std::sin(2.0));
    EXPECT_NEAR(s(1, 1), 0.9092974268256817, 1e-16);
}

TEST(Evaluate, PureAndDeterministic) {
    const auto g = TransformFn::parse("sin(2*a*i)*a^((-1)^j*j)", params({{"a", Number::parse("1.1")}}));
    for (long i = 1; i <= 10; ++i)
        for (long j = 1; j <= 10; ++j) EXPECT_EQ(g(i, j), g(i, j));
}

TEST(Evaluate, ErrorPaths) {
    EXPECT_THROW(TransformFn::parse("q*i"), DomainError);
    const auto neg = TransformFn::parse("(-2)^(1/2)");
    EXPECT_THROW(neg(1, 1), EvalError);
    const auto div = TransformFn::parse("1/(i-j)");
    try {
        div(2, 2);
        FAIL();
    } catch (const EvalError& e) {
        EXPECT_EQ(e.i(), 2);
        EXPECT_EQ(e.j(), 2);
    }
    const auto zero = TransformFn::parse("i-j");
    EXPECT_EQ(zero(1, 1), 0.0);
    EXPECT_THROW(zero.divisor<double>(1, 1), EvalError);
    EXPECT_THROW(zero.check_grid(3, 3), EvalError);
    EXPECT_NO_THROW(zero.check_grid(3, 3, false));
    const auto overflow = TransformFn::parse("exp(1000*i)");
    EXPECT_THROW(overflow(1, 1), EvalError);
    EXPECT_THROW(TransformFn::parse("sin(i)").exact(1, 1), EvalError);
    EXPECT_EQ(TransformFn::parse("sin(i-j)+cos(0)").exact(2, 2), Rational(1));
}

TEST(Evaluate, ExactRootsAndIntegerPowers) {
    const auto g = TransformFn::parse("1/(f+j^2)^(1/2)", params({{"f", Number::parse("385/144")}}));
    EXPECT_EQ(g.exact(1, 1), Rational(12, 23));
    EXPECT_EQ(g.exact(1, 2), Rational(12, 31));
    EXPECT_EQ(g.exact(1, 3), Rational(12, 41));
    EXPECT_NEAR(g(1, 1), 12.0 / 23.0, 1e-15);
    const auto h = TransformFn::parse("1/(f+j^2)^(1/2)", params({{"f", 3}}));
    EXPECT_EQ(h.exact(1, 1), Rational(1, 2));
    EXPECT_THROW(h.exact(1, 2), EvalError);
    EXPECT_EQ(TransformFn::parse("(-1)^j").exact(1, 3), Rational(-1));
    EXPECT_EQ(TransformFn::parse("(-1)^j")(1, 4), 1.0);
}

TEST(Builtin, MatchesDocumentedValues) {
    EXPECT_EQ(builtin(Builtin::geometric_cw, params({{"f", 3}}))(2, 1), 3.0);
    const auto one = builtin(Builtin::constant, params({{"c", 1}}));
    for (long i = 1; i <= 5; ++i)
        for (long j = 1; j <= 5; ++j) EXPECT_EQ(one(i, j), 1.0);
    EXPECT_THROW(builtin(Builtin::sine_row, params({{"q", 1}})), DomainError);
    EXPECT_EQ(builtin_from_name("alternating_col"), Builtin::alternating_col);
    EXPECT_THROW(builtin_from_name("nope"), DomainError);
}

TEST(Builtin, AgreesPointwiseWithParsedSourceAndDirectFormula) {
    const double a = 1.0, f = 1.7, q = 1.3, c = 2.5;
    const auto p = params({{"a", a}, {"f", f}, {"q", q}, {"c", c}});
    auto direct = [&](Builtin b, long i, long j) {
        const double di = static_cast<double>(i), dj = static_cast<double>(j);
        switch (b) {
        case Builtin::constant: return c;
        case Builtin::row_only: return 1.0 / (f + std::pow(di, 2.0));
        case Builtin::col_only: return 1.0 / std::pow(f + std::pow(dj, 2.0), 1.0 / 2.0);
        case Builtin::geometric_cw: return std::pow(f, di - dj);
        case Builtin::alternating_col: return std::pow(q, std::pow(-1.0, dj) * dj);
        case Builtin::sine_row: return std::sin(2.0 * a * di);
        }
        return 0.0;
    };
    for (const auto& info : builtin_table()) {
        const auto b = builtin(info.kind, p);
        const auto parsed = TransformFn::parse(info.source, p);
        const long grid = info.kind == Builtin::sine_row ? 50 : 64;
        for (long i = 1; i <= grid; ++i)
            for (long j = 1; j <= grid; ++j) {
                EXPECT_EQ(b(i, j), parsed(i, j));
                EXPECT_EQ(b(i, j), direct(info.kind, i, j)) << info.name << " at " << i << "," << j;
            }
    }
}
