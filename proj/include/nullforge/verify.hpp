#pragma once

#include "io.hpp"

#include <cmath>
#include <string>
#include <vector>

namespace nullforge {

struct CheckResult {
    std::string name;
    bool passed{false};
    std::string detail;
};

struct FixtureResult {
    std::string name;
    std::string file;
    Provenance provenance{Provenance::derived};
    std::string citation;
    std::vector<CheckResult> checks;
    std::string error;

    bool passed() const {
        if (!error.empty() || checks.empty()) return false;
        for (const auto& c : checks)
            if (!c.passed) return false;
        return true;
    }
};

struct VerifyReport {
    std::vector<FixtureResult> fixtures;

    std::size_t passed() const {
        return static_cast<std::size_t>(std::count_if(fixtures.begin(), fixtures.end(), [](const auto& f) { return f.passed(); }));
    }
    std::size_t failed() const { return fixtures.size() - passed(); }
    bool ok() const { return failed() == 0; }
};

namespace detail {

/// Float residual bound for analytic zero modes: |H v| <= tol |H| |v|.
inline constexpr double mode_residual_tol = 1e-9;

template <Scalar S>
std::pair<bool, std::string> annihilates(const DenseMatrix<S>& h, const std::vector<S>& v) {
    if (v.size() != h.cols()) return {false, "length " + std::to_string(v.size()) + " vs " + std::to_string(h.cols()) + " columns"};
    const auto hv = h * v;
    if constexpr (std::same_as<S, Rational>) {
        for (const auto& x : hv)
            if (!x.is_zero()) return {false, "H v has a nonzero component"};
        return {true, "H v = 0 exactly"};
    } else {
        const double rel = euclidean_norm(hv) / (singular_values(h).values.back() * euclidean_norm(v));
        return {rel <= mode_residual_tol, "relative residual " + format_double(rel)};
    }
}

template <Scalar S>
bool matrices_match(const DenseMatrix<S>& a, const DenseMatrix<S>& b) {
    if (a.rows() != b.rows() || a.cols() != b.cols()) return false;
    if constexpr (std::same_as<S, Rational>) {
        return a == b;
    } else {
        const double scale = std::max(1.0, max_norm(a));
        for (std::size_t k = 0; k < a.entries().size(); ++k)
            if (std::fabs(a.entries()[k] - b.entries()[k]) > 1e-12 * scale) return false;
        return true;
    }
}

template <Scalar S>
class FixtureRunner {
public:
    explicit FixtureRunner(const Fixture& f) : f_(f) {
        if (f.input.contains("matrix")) {
            a_ = matrix_from_json<S>(f.input["matrix"], "input.matrix");
        } else {
            spec_ = model_from_json(f.input["model"], "input.model");
            a_ = build<S>(*spec_);
        }
        if (f.gf) {
            g_.emplace(f.gf->fn());
            target_ = apply_transform(*a_, *g_, f.gf->mode);
        } else {
            target_ = *a_;
        }
    }

    void run(std::vector<CheckResult>& out) {
        for (const auto& [key, want] : f_.expected.items()) {
            CheckResult c;
            c.name = key;
            try {
                check(key, want, c);
            } catch (const std::exception& e) {
                c.passed = false;
                c.detail = std::string("error: ") + e.what();
            }
            out.push_back(std::move(c));
        }
    }

private:
    const TransformFn& gfn() const {
        if (!g_) throw SchemaError("expectation needs a gf transform");
        return *g_;
    }

    long grid_rows() const { return static_cast<long>(a_->rows()); }
    long grid_cols() const { return static_cast<long>(a_->cols()); }

    void expect_count(const char* what, std::size_t got, const Json& want, CheckResult& c) {
        c.passed = got == want.get<std::size_t>();
        c.detail = std::string(what) + " " + std::to_string(got) + ", expected " + std::to_string(want.get<std::size_t>());
    }

    void check_mode(const DenseMatrix<S>& h, const Json& want, CheckResult& c) {
        const auto formula = zero_mode_from_json(want);
        const long n = want.contains("n") ? want["n"].get<long>() : (spec_ ? spec_->n : grid_rows());
        const auto v = zero_mode_analytic<S>(formula, n);
        auto [ok, detail] = annihilates(h, v);
        const auto basis = null_basis(h);
        if (ok && basis.size() != 1) {
            ok = false;
            detail += "; kernel dimension " + std::to_string(basis.size());
        }
        c.passed = ok;
        c.detail = to_string(formula.kind) + ": " + detail;
    }

    void check(const std::string& key, const Json& want, CheckResult& c) {
        if (key == "nullity") return expect_count("nullity", nullity(target_), want, c);
        if (key == "rank") return expect_count("rank", rank(target_), want, c);
        if (key == "nullity_before") return expect_count("nullity of input", nullity(*a_), want, c);
        if (key == "right_nullity") return expect_count("right nullity", nullity(target_), want, c);
        if (key == "left_nullity") return expect_count("left nullity", nullity(target_.transpose()), want, c);
        if (key == "matrix") {
            c.passed = matrices_match(target_, matrix_from_json<S>(want, "expected.matrix"));
            c.detail = c.passed ? "entrywise match" : "entries differ";
            return;
        }
        if (key == "null_basis") {
            NullBasis<S> expected;
            expected.dimension = target_.cols();
            for (const auto& v : want) {
                std::vector<S> row;
                for (const auto& x : v) row.push_back(scalar_from_json<S>(x, "expected.null_basis"));
                expected.vectors.push_back(std::move(row));
            }
            const auto got = null_basis(target_);
            if constexpr (std::same_as<S, Rational>) {
                c.passed = got.vectors == expected.vectors;
                c.detail = c.passed ? "reduced-echelon basis matches exactly" : "basis differs from " + to_json(got).dump();
            } else {
                c.passed = same_subspace(got, expected);
                c.detail = c.passed ? "same subspace" : "subspaces differ";
            }
            return;
        }
        if (key == "predicted_basis_matches") {
            const auto pred = predict_null_basis(null_basis(*a_), gfn(), grid_rows(), grid_cols(), f_.gf->mode);
            const bool same = same_subspace(pred, null_basis(target_));
            c.passed = same == want.get<bool>();
            c.detail = same ? "predicted basis spans the kernel" : "predicted basis differs";
            return;
        }
        if (key == "separable" || key == "witness") {
            const auto rep = is_separable<S>(gfn(), grid_rows(), grid_cols());
            if (key == "separable") {
                c.passed = rep.separable == want.get<bool>();
                c.detail = rep.separable ? "separable" : "not separable";
            } else {
                c.passed = rep.witness && Json(*rep.witness) == want;
                c.detail = rep.witness ? "witness " + Json(*rep.witness).dump() : "no witness";
            }
            return;
        }
        if (key == "eigen_preserved") {
            const bool got = preserves_eigenvalues<S>(gfn(), grid_rows());
            c.passed = got == want.get<bool>();
            c.detail = got ? "unit diagonal" : "diagonal differs from 1";
            return;
        }
        if (key == "similarity") {
            const auto rep = similarity_report<S>(gfn(), grid_rows(), f_.gf->mode);
            const auto p = matrix_from_json<S>(require(want, "p", "expected.similarity"), "expected.similarity.p");
            const std::string orient = require(want, "orientation", "expected.similarity").get<std::string>();
            const bool orient_ok = to_string(rep.orientation) == orient;
            // P is fixed up to a scalar; the listed one must conjugate A into B.
            const bool conj_ok = rep.orientation != Orientation::neither && matrices_match(conjugate(*a_, p, rep.orientation), target_);
            c.passed = orient_ok && conj_ok;
            c.detail = "orientation " + to_string(rep.orientation) + (conj_ok ? ", conjugation reproduces B" : ", conjugation mismatch");
            return;
        }
        if (key == "zero_mode") return check_mode(target_, want, c);
        if (key == "left_zero_mode") return check_mode(target_.transpose(), want, c);
        if (key == "spectrum" || key == "gap_fit") {
            if (!spec_ || spec_->kind != ModelKind::kk_bidiagonal) throw SchemaError(key + " needs a kk_bidiagonal model");
            if (key == "spectrum") {
                const auto adj = adjudicate_kk_spectrum(*spec_);
                const double tol = want.value("tol", 1e-8);
                const std::string conv = want.value("convention", std::string("shifted"));
                c.passed = to_string(adj.chosen) == conv && adj.best().max_abs_error <= tol;
                c.detail = "chosen " + to_string(adj.chosen) + ", max error " + format_double(adj.best().max_abs_error);
                if (want.contains("values")) {
                    const auto analytic = spectrum_analytic(*spec_, KkConvention::nominal);
                    const auto expect = want["values"].get<std::vector<double>>();
                    bool ok = analytic.size() == expect.size();
                    for (std::size_t k = 0; ok && k < expect.size(); ++k) ok = std::fabs(analytic.values[k] - expect[k]) <= tol;
                    c.passed = c.passed && ok;
                    c.detail += ok ? ", listed values match" : ", listed values differ";
                }
            } else {
                const auto law = gap_law_from_string(require(want, "law", "expected.gap_fit").get<std::string>());
                const int max_k = want.value("max_k", 10);
                const double bound = require(want, "residual_below", "expected.gap_fit").get<double>();
                const auto conv = want.value("convention", std::string("shifted")) == "nominal" ? KkConvention::nominal : KkConvention::shifted;
                const auto rep = mass_gaps(spectrum_analytic(*spec_, conv), max_k);
                const auto& fit = law == GapLaw::constant ? rep.constant : rep.linear;
                if (!fit) throw DomainError("too few gaps for a fit");
                c.passed = fit->max_rel_residual < bound;
                c.detail = to_string(law) + " residual " + format_double(fit->max_rel_residual);
            }
            return;
        }
        throw SchemaError("unknown expectation '" + key + "'");
    }

    const Fixture& f_;
    std::optional<DenseMatrix<S>> a_;
    std::optional<ModelSpec> spec_;
    std::optional<TransformFn> g_;
    DenseMatrix<S> target_{1, 1};
};

} // namespace detail

inline FixtureResult run_fixture(const Fixture& f) {
    FixtureResult r;
    r.name = f.name;
    r.file = f.file;
    r.provenance = f.provenance;
    r.citation = f.citation;
    try {
        if (f.domain == Domain::rational)
            detail::FixtureRunner<Rational>(f).run(r.checks);
        else
            detail::FixtureRunner<double>(f).run(r.checks);
    } catch (const std::exception& e) {
        r.error = e.what();
    }
    return r;
}

inline VerifyReport verify_suite(const std::vector<Fixture>& fixtures) {
    VerifyReport rep;
    for (const auto& f : fixtures) rep.fixtures.push_back(run_fixture(f));
    return rep;
}

inline Json to_json(const FixtureResult& r) {
    Json checks = Json::array();
    for (const auto& c : r.checks) checks.push_back(Json{{"check", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    Json j{{"name", r.name}, {"file", r.file}, {"provenance", to_string(r.provenance)}, {"citation", r.citation}, {"passed", r.passed()}, {"checks", std::move(checks)}};
    if (!r.error.empty()) j["error"] = r.error;
    return j;
}

inline Json to_json(const VerifyReport& r) {
    Json fx = Json::array();
    for (const auto& f : r.fixtures) fx.push_back(to_json(f));
    return Json{{"total", r.fixtures.size()}, {"passed", r.passed()}, {"failed", r.failed()}, {"fixtures", std::move(fx)}};
}

} // namespace nullforge
