#include "oracles.hpp"

#include <nullforge/models.hpp>

#include <gtest/gtest.h>

#include <random>

using namespace nullforge;

namespace {

Rational q(long p, long d = 1) { return Rational(p) / Rational(d); }

ModelSpec spec(ModelKind kind, long n, ModelSpec::Params params = {}) {
    ModelSpec s;
    s.kind = kind;
    s.n = n;
    s.params = std::move(params);
    return s;
}

ZeroModeFormula formula(ZeroModeKind kind, std::map<std::string, std::vector<Number>> params = {}, std::optional<Mode> mode = {}) {
    return {kind, std::move(params), mode};
}

template <Scalar S>
bool annihilates(const DenseMatrix<S>& h, const std::vector<S>& v) {
    for (const auto& x : h * v)
        if (!is_zero(x)) return false;
    return true;
}

double relative_residual(const FloatMatrix& h, const std::vector<double>& v) {
    const double hn = singular_values(h).values.back();
    return euclidean_norm(h * v) / (hn * euclidean_norm(v));
}

} // namespace

TEST(Build, DisplayedMatrices) {
    EXPECT_EQ(build<Rational>(spec(ModelKind::uniform_cw, 2, {{"m", {1}}})), (RationalMatrix{{1, 1, 0}, {0, 1, 1}}));
    EXPECT_EQ(build<Rational>(spec(ModelKind::kk_bidiagonal, 2, {{"Mf", {1}}, {"g", {1}}, {"gp", {1}}})),
              (RationalMatrix{{1, 0}, {-1, 1}, {0, -1}}));
    EXPECT_EQ(build<Rational>(spec(ModelKind::deconstruction, 3, {{"m", {1}}})), (RationalMatrix{{1, 1, 0}, {1, 1, 1}, {0, 1, 1}}));
    EXPECT_EQ(build<Rational>(spec(ModelKind::generalized_cw, 2, {{"m_i", {2, 3}}, {"q_i", {q(1, 2), 5}}})),
              (RationalMatrix{{2, 1, 0}, {0, 3, 15}}));
    EXPECT_EQ(build<Rational>(spec(ModelKind::nonlocal_cw, 3, {{"a", {1, 2, 3}}})),
              (RationalMatrix{{1, 2, 3, 0}, {0, 1, 2, 3}, {0, 0, 1, 2}}));
}

TEST(Build, ComposesTransform) {
    auto s = spec(ModelKind::uniform_cw, 3, {{"m", {1}}});
    s.gf = GfSpec{"q^(i-j)", {{"q", Number(2)}}, Mode::multiply};
    EXPECT_EQ(build<Rational>(s), (RationalMatrix{{1, q(1, 2), 0, 0}, {0, 1, q(1, 2), 0}, {0, 0, 1, q(1, 2)}}));
    s.gf->mode = Mode::divide;
    EXPECT_EQ(build<Rational>(s)(0, 1), 2);
}

TEST(Build, RejectsInvalidSpecs) {
    EXPECT_THROW(build<double>(spec(ModelKind::uniform_cw, 0)), DomainError);
    EXPECT_THROW(build<double>(spec(ModelKind::uniform_cw, 3, {{"m", {-1}}})), DomainError);
    EXPECT_THROW(build<double>(spec(ModelKind::kk_bidiagonal, 3, {{"Mf", {0}}})), DomainError);
    EXPECT_THROW(build<double>(spec(ModelKind::nonlocal_cw, 3, {{"a", {0, 1}}})), DomainError);
    EXPECT_THROW(build<double>(spec(ModelKind::nonlocal_cw, 3)), DomainError);
    EXPECT_THROW(build<double>(spec(ModelKind::nonlocal_cw, 1, {{"a", {1, 1, 1}}})), DomainError);
    EXPECT_THROW(build<double>(spec(ModelKind::generalized_cw, 3, {{"m_i", {1, 2}}})), DomainError);
    EXPECT_THROW(build<double>(spec(ModelKind::deconstruction, 3, {{"q", {2}}})), DomainError);
    auto s = spec(ModelKind::uniform_cw, 3);
    s.gf = GfSpec{"q^(i-j)", {}, Mode::multiply};
    EXPECT_THROW(build<double>(s), DomainError);
    EXPECT_THROW(model_kind_from_string("clockwork"), DomainError);
}

TEST(ZeroModes, ClockworkGeometric) {
    const auto v = zero_mode_analytic<Rational>(formula(ZeroModeKind::cw_geometric, {{"q", {2}}}), 3);
    EXPECT_EQ(v, (std::vector<Rational>{16, -8, 4, -2}));
    for (long n : {1L, 3L, 8L, 15L}) {
        for (Mode mode : {Mode::divide, Mode::multiply}) {
            auto s = spec(ModelKind::uniform_cw, n);
            s.gf = GfSpec{"q^(i-j)", {{"q", Number(q(5, 2))}}, mode};
            const auto h = build<Rational>(s);
            const auto f = zero_mode_analytic<Rational>(formula(ZeroModeKind::cw_geometric, {{"q", {q(5, 2)}}}, mode), n);
            EXPECT_TRUE(annihilates(h, f));
            ASSERT_EQ(nullity(h), 1u);
            EXPECT_TRUE(oracle::proportional(f, null_basis(h).vectors.front()));
        }
    }
}

TEST(ZeroModes, ClockworkRatioIsConstant) {
    const auto v = zero_mode_normalized(formula(ZeroModeKind::cw_geometric, {{"q", {3}}}), 15);
    for (std::size_t k = 1; k < v.size(); ++k) EXPECT_NEAR(std::fabs(v[k - 1] / v[k]), 3.0, 1e-12);
    EXPECT_NEAR(euclidean_norm(v), 1.0, 1e-14);
}

TEST(ZeroModes, AlternatingColumnBothParities) {
    for (long n = 1; n <= 16; ++n)
        for (Mode mode : {Mode::multiply, Mode::divide}) {
            auto s = spec(ModelKind::uniform_cw, n);
            s.gf = GfSpec{"q^((-1)^j*j)", {{"q", Number(2)}}, mode};
            const auto h = build<Rational>(s);
            const auto f = zero_mode_analytic<Rational>(formula(ZeroModeKind::alternating_col, {{"q", {2}}}, mode), n);
            ASSERT_EQ(f.size(), static_cast<std::size_t>(n + 1));
            EXPECT_TRUE(annihilates(h, f)) << "n=" << n;
        }
}

TEST(ZeroModes, DeconstructionExistenceLaw) {
    for (long n = 2; n <= 30; ++n) {
        const auto h = build<Rational>(spec(ModelKind::deconstruction, n));
        EXPECT_EQ(nullity(h), n % 3 == 2 ? 1u : 0u) << "n=" << n;
        if (n % 3 == 2) {
            const auto f = zero_mode_analytic<Rational>(formula(ZeroModeKind::decon_mod3), n);
            EXPECT_TRUE(annihilates(h, f));
        } else {
            EXPECT_THROW(zero_mode_analytic<Rational>(formula(ZeroModeKind::decon_mod3), n), DomainError);
        }
    }
    EXPECT_EQ(zero_mode_analytic<Rational>(formula(ZeroModeKind::decon_mod3), 5), (std::vector<Rational>{-1, 1, 0, -1, 1}));
}

TEST(ZeroModes, DeconstructionTransformedRightExact) {
    // Any row factor works; a rational one keeps the check exact.
    for (long n : {2L, 5L, 8L, 11L, 14L, 17L, 20L}) {
        for (Rational a : {q(3, 2), q(2, 5), q(7)}) {
            auto s = spec(ModelKind::deconstruction, n);
            s.gf = GfSpec{"(1+i^2)*a^((-1)^j*j)", {{"a", Number(a)}}, Mode::multiply};
            const auto h = build<Rational>(s);
            const auto f = zero_mode_analytic<Rational>(formula(ZeroModeKind::decon_transformed_right, {{"a", {a}}}), n);
            EXPECT_TRUE(annihilates(h, f)) << "n=" << n;
            const auto fd = zero_mode_analytic<Rational>(formula(ZeroModeKind::decon_transformed_right, {{"a", {a}}}, Mode::divide), n);
            s.gf->mode = Mode::divide;
            EXPECT_TRUE(annihilates(build<Rational>(s), fd)) << "n=" << n;
        }
    }
    EXPECT_THROW(zero_mode_analytic<Rational>(formula(ZeroModeKind::decon_transformed_right, {{"a", {2}}}), 6), DomainError);
}

TEST(ZeroModes, ChiralModesOfSineTransformedDeconstruction) {
    // Column factors span a^-n..a^n, so the float rank test needs a modest range.
    for (auto [a, n] : std::vector<std::pair<double, long>>{{1.0, 5}, {1.0, 20}, {1.0, 50}, {0.7, 5}, {0.7, 20}, {1.3, 11}, {1.3, 20}}) {
        {
            auto s = spec(ModelKind::deconstruction, n);
            s.gf = GfSpec{"sin(2*a*i)*a^((-1)^j*j)", {{"a", Number(a)}}, Mode::multiply};
            const auto h = build<double>(s);
            const auto modes = chiral_zero_modes(h);
            ASSERT_EQ(modes.right.size(), 1u) << a << " " << n;
            ASSERT_EQ(modes.left.size(), 1u) << a << " " << n;
            const auto r = zero_mode_analytic<double>(formula(ZeroModeKind::decon_transformed_right, {{"a", {a}}}), n);
            const auto l = zero_mode_analytic<double>(formula(ZeroModeKind::decon_transformed_left, {{"a", {a}}}), n);
            EXPECT_LE(relative_residual(h, r), 1e-12);
            EXPECT_LE(relative_residual(h.transpose(), l), 1e-12);
            EXPECT_LE(oracle::line_distance(r, modes.right.vectors.front()), 1e-8);
            EXPECT_LE(oracle::line_distance(l, modes.left.vectors.front()), 1e-8);
        }
    }
    EXPECT_THROW(zero_mode_analytic<Rational>(formula(ZeroModeKind::decon_transformed_left, {{"a", {1}}}), 5), DomainError);
}

TEST(ZeroModes, RowAndColumnFactorsActIndependently) {
    const long n = 14;
    const std::vector<std::string> rows = {"1", "1+i", "2^i", "1/(i+3)", "i^2+5"};
    const std::vector<std::string> cols = {"1", "3^((-1)^j*j)", "j", "1/(2+j^2)"};
    for (const auto& c : cols) {
        std::optional<NullBasis<Rational>> right;
        for (const auto& r : rows) {
            auto s = spec(ModelKind::deconstruction, n);
            s.gf = GfSpec{"(" + r + ")*(" + c + ")", {}, Mode::multiply};
            const auto modes = chiral_zero_modes(build<Rational>(s));
            if (!right) right = modes.right;
            EXPECT_TRUE(same_subspace(*right, modes.right)) << r << " " << c;
        }
    }
    for (const auto& r : rows) {
        std::optional<NullBasis<Rational>> left;
        for (const auto& c : cols) {
            auto s = spec(ModelKind::deconstruction, n);
            s.gf = GfSpec{"(" + r + ")*(" + c + ")", {}, Mode::multiply};
            const auto modes = chiral_zero_modes(build<Rational>(s));
            if (!left) left = modes.left;
            EXPECT_TRUE(same_subspace(*left, modes.left)) << r << " " << c;
        }
    }
}

TEST(ZeroModes, ChiralBasics) {
    const auto sym = chiral_zero_modes(build<Rational>(spec(ModelKind::deconstruction, 5)));
    EXPECT_TRUE(same_subspace(sym.left, sym.right));
    const auto cw = chiral_zero_modes(build<Rational>(spec(ModelKind::uniform_cw, 4)));
    EXPECT_EQ(cw.right.size(), 1u);
    EXPECT_EQ(cw.left.size(), 0u);
}

TEST(ZeroModes, NonlocalMultinomialMatchesBackSubstitution) {
    std::mt19937_64 rng(4242);
    std::uniform_int_distribution<int> num(-9, 9), den(1, 7);
    for (long n = 1; n <= 8; ++n) {
        std::vector<Number> unit(static_cast<std::size_t>(n + 1), Number(1));
        for (int trial = 0; trial < 4; ++trial) {
            std::vector<Number> a = unit;
            if (trial > 0) {
                a.resize(static_cast<std::size_t>(1 + (trial * n) % (n + 1)));
                for (std::size_t k = 1; k < a.size(); ++k) a[k] = Number(q(num(rng), den(rng)));
            }
            const auto h = build<Rational>(spec(ModelKind::nonlocal_cw, n, {{"a", a}}));
            const auto f = zero_mode_analytic<Rational>(formula(ZeroModeKind::nonlocal_multinomial, {{"a", a}}), n);
            EXPECT_EQ(f, oracle::banded_back_substitution(h)) << "n=" << n;
            EXPECT_EQ(f, null_basis(h).vectors.front());
        }
    }
    std::vector<Number> a13(14, Number(1));
    EXPECT_THROW(zero_mode_analytic<Rational>(formula(ZeroModeKind::nonlocal_multinomial, {{"a", a13}}), 13), DomainError);
}

TEST(ZeroModes, NonlocalSmallCaseByHand) {
    // n = 2: v_3 = 1, v_2 = -a1/a0, v_1 = (a1^2 - a0 a2)/a0^2.
    const auto f = zero_mode_analytic<Rational>(formula(ZeroModeKind::nonlocal_multinomial, {{"a", {2, 3, 5}}}), 2);
    EXPECT_EQ(f, (std::vector<Rational>{q(9 - 10, 4), q(-3, 2), 1}));
}

TEST(Kk, GramMatrixIsTridiagonal) {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(0.2, 2.0);
    for (int trial = 0; trial < 10; ++trial) {
        const double mf = u(rng), g = u(rng), gp = u(rng);
        const auto m = build<double>(spec(ModelKind::kk_bidiagonal, 7, {{"Mf", {mf}}, {"g", {g}}, {"gp", {gp}}}));
        const auto gram = m.transpose() * m;
        for (std::size_t r = 0; r < 7; ++r)
            for (std::size_t c = 0; c < 7; ++c) {
                const double want = r == c ? mf * mf * (g * g + gp * gp) : (r + 1 == c || c + 1 == r ? -mf * mf * g * gp : 0.0);
                EXPECT_NEAR(gram(r, c), want, 1e-13);
            }
    }
}

TEST(Kk, AnalyticExamples) {
    const auto s4 = spectrum_analytic(spec(ModelKind::kk_bidiagonal, 4, {{"Mf", {1}}}));
    ASSERT_EQ(s4.size(), 3u);
    for (int k = 1; k <= 3; ++k) EXPECT_NEAR(s4.at_mode(k), 2 * std::sin(k * std::numbers::pi / 8), 1e-15);
    const auto s2 = spectrum_analytic(spec(ModelKind::kk_bidiagonal, 2, {{"Mf", {1}}, {"g", {1}}, {"gp", {0}}}));
    ASSERT_EQ(s2.size(), 1u);
    EXPECT_NEAR(s2.values[0], 1.0, 1e-15);
    EXPECT_THROW(spectrum_analytic(spec(ModelKind::uniform_cw, 4)), DomainError);
}

TEST(Kk, NumericMatchesGramEigenvalues) {
    for (auto [g, gp] : std::vector<std::pair<double, double>>{{1, 1}, {1.3, 0.6}, {0.5, 2}}) {
        const long n = 30;
        const auto s = spec(ModelKind::kk_bidiagonal, n, {{"Mf", {1.5}}, {"g", {g}}, {"gp", {gp}}});
        const auto numeric = spectrum_numeric(s);
        // The Gram matrix is Toeplitz tridiagonal, so its eigenvalues are known in closed form.
        const auto ev = oracle::toeplitz_tridiagonal_eigenvalues(2.25 * (g * g + gp * gp), -2.25 * g * gp, n);
        ASSERT_EQ(numeric.size(), ev.size());
        for (std::size_t k = 0; k < ev.size(); ++k) EXPECT_NEAR(numeric.values[k], std::sqrt(ev[k]), 1e-11);
    }
}

TEST(Kk, ConventionAdjudication) {
    for (auto params : std::vector<ModelSpec::Params>{{{"Mf", {1}}}, {{"Mf", {1}}, {"g", {1}}, {"gp", {1}}}, {{"Mf", {2}}, {"g", {1.3}}, {"gp", {0.6}}}}) {
        const auto s = spec(ModelKind::kk_bidiagonal, 50, params);
        const auto adj = adjudicate_kk_spectrum(s);
        EXPECT_EQ(adj.chosen, KkConvention::shifted);
        EXPECT_LE(adj.shifted.max_abs_error, 1e-8);
        EXPECT_GT(adj.nominal.max_abs_error, 1e-3);
        EXPECT_TRUE(adj.shifted.edge_values.empty());
        EXPECT_EQ(adj.nominal.edge_values.size(), 1u);
    }
}

TEST(Kk, GapReports) {
    const Spectrum s({1.0, 2.0, 3.0}, SpectrumKind::singular);
    const auto r = mass_gaps(s);
    EXPECT_EQ(r.gaps, (std::vector<double>{1.0, 1.0}));
    EXPECT_FALSE(r.constant);
    EXPECT_THROW(mass_gaps(Spectrum({1.0}, SpectrumKind::singular)), DomainError);

    const auto t = spectrum_analytic(spec(ModelKind::kk_bidiagonal, 50, {{"g", {1}}, {"gp", {1}}}), KkConvention::shifted);
    const auto tg = mass_gaps(t, 10);
    ASSERT_EQ(tg.k.front(), 2);
    ASSERT_EQ(tg.k.back(), 10);
    ASSERT_TRUE(tg.linear);
    EXPECT_LT(tg.linear->max_rel_residual, 0.05);
    // Small-k expansion: coefficient g gp/(g+gp) pi^2/(2 N^2).
    EXPECT_NEAR(tg.linear->coeff, 0.5 * std::pow(std::numbers::pi, 2) / (2.0 * 51 * 51), 2e-5);

    const auto u = spectrum_analytic(spec(ModelKind::kk_bidiagonal, 50), KkConvention::shifted);
    const auto ug = mass_gaps(u, 10);
    ASSERT_EQ(ug.k.front(), 1);
    ASSERT_EQ(ug.gaps.size(), 10u);
    EXPECT_NEAR(ug.constant->coeff, std::numbers::pi / 51, 2e-3);
}
