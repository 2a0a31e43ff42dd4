#pragma once

#include "analysis.hpp"
#include "linalg.hpp"
#include "models.hpp"
#include "spectrum.hpp"
#include "transform.hpp"

#include <json.hpp>

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

namespace nullforge {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------- scalars

/// Rationals travel as "p/q" strings; integers are also accepted on input.
inline Json rational_to_json(const Rational& r) { return to_string(r); }

inline Rational rational_from_json(const Json& j, const std::string& where) {
    if (j.is_number_integer()) return Rational(j.get<long long>());
    if (j.is_string()) {
        if (auto r = parse_rational(j.get<std::string>())) return *r;
        throw SchemaError(where + ": '" + j.get<std::string>() + "' is not a rational");
    }
    throw SchemaError(where + ": expected a \"p/q\" string or integer");
}

/// Doubles are emitted in shortest round-trip form by the JSON writer.
inline double float_from_json(const Json& j, const std::string& where) {
    if (!j.is_number()) throw SchemaError(where + ": expected a number");
    return j.get<double>();
}

/// User constants: integer, "p/q" or decimal string (exact), or a JSON float,
/// whose exact value is the shortest decimal that prints it back.
inline Number number_from_json(const Json& j, const std::string& where) {
    if (j.is_number_integer()) return Number(Rational(j.get<long long>()));
    if (j.is_number_float()) {
        const double x = j.get<double>();
        if (auto r = parse_rational(Json(x).dump())) return Number(*r);
        return Number(x);
    }
    if (j.is_string()) {
        if (auto r = parse_rational(j.get<std::string>())) return Number(*r);
        throw SchemaError(where + ": '" + j.get<std::string>() + "' is not a number");
    }
    throw SchemaError(where + ": expected a number");
}

inline Json number_to_json(const Number& x) {
    if (boost::multiprecision::denominator(x.exact) == 1 && abs(x.exact) < Rational(1LL << 53))
        return Json(static_cast<long long>(boost::multiprecision::numerator(x.exact)));
    return Json(x.str());
}

template <Scalar S>
Json scalar_to_json(const S& x) {
    if constexpr (std::same_as<S, Rational>)
        return rational_to_json(x);
    else
        return Json(x);
}

template <Scalar S>
S scalar_from_json(const Json& j, const std::string& where) {
    if constexpr (std::same_as<S, Rational>)
        return rational_from_json(j, where);
    else
        return float_from_json(j, where);
}

inline const Json& require(const Json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw SchemaError(where + ": expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) throw SchemaError(where + ": missing field '" + key + "'");
    return *it;
}

inline Domain domain_from_string(const std::string& s, const std::string& where) {
    if (s == "rational") return Domain::rational;
    if (s == "float") return Domain::floating;
    throw SchemaError(where + ": domain must be \"rational\" or \"float\", got '" + s + "'");
}

// ---------------------------------------------------------------- matrix

template <Scalar S>
Json to_json(const DenseMatrix<S>& m) {
    Json entries = Json::array();
    for (std::size_t r = 0; r < m.rows(); ++r) {
        Json row = Json::array();
        for (std::size_t c = 0; c < m.cols(); ++c) row.push_back(scalar_to_json(m(r, c)));
        entries.push_back(std::move(row));
    }
    return Json{{"rows", m.rows()}, {"cols", m.cols()}, {"domain", to_string(domain_of<S>())}, {"entries", std::move(entries)}};
}

inline Domain matrix_domain(const Json& j, const std::string& where = "matrix") {
    return domain_from_string(require(j, "domain", where).get<std::string>(), where + ".domain");
}

template <Scalar S>
DenseMatrix<S> matrix_from_json(const Json& j, const std::string& where = "matrix") {
    const auto& rows_j = require(j, "rows", where);
    const auto& cols_j = require(j, "cols", where);
    if (!rows_j.is_number_unsigned() || !cols_j.is_number_unsigned()) throw SchemaError(where + ": rows and cols must be positive integers");
    const auto rows = rows_j.get<std::size_t>();
    const auto cols = cols_j.get<std::size_t>();
    if (rows == 0 || cols == 0) throw SchemaError(where + ": rows and cols must be positive integers");
    const auto& entries = require(j, "entries", where);
    if (!entries.is_array() || entries.size() != rows)
        throw SchemaError(where + ".entries: expected " + std::to_string(rows) + " rows");
    std::vector<S> data;
    data.reserve(rows * cols);
    for (std::size_t r = 0; r < rows; ++r) {
        const auto& row = entries[r];
        const std::string at_row = where + ".entries[" + std::to_string(r) + "]";
        if (!row.is_array() || row.size() != cols) throw SchemaError(at_row + ": expected " + std::to_string(cols) + " entries");
        for (std::size_t c = 0; c < cols; ++c) data.push_back(scalar_from_json<S>(row[c], at_row + "[" + std::to_string(c) + "]"));
    }
    try {
        return DenseMatrix<S>(rows, cols, std::move(data));
    } catch (const Error& e) {
        throw SchemaError(where + ": " + e.what());
    }
}

inline Json read_json_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw SchemaError(path.string() + ": cannot open");
    try {
        return Json::parse(in);
    } catch (const Json::parse_error& e) {
        throw SchemaError(path.string() + ": " + e.what());
    }
}

inline void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(path.string() + ": cannot open for writing");
    out << text;
    if (!out) throw Error(path.string() + ": write failed");
}

template <Scalar S>
DenseMatrix<S> read_matrix(const std::filesystem::path& path) {
    return matrix_from_json<S>(read_json_file(path), path.string());
}

template <Scalar S>
void write_matrix(const DenseMatrix<S>& m, const std::filesystem::path& path) {
    write_text_file(path, to_json(m).dump(2) + "\n");
}

// ---------------------------------------------------------------- transforms and models

inline Json params_to_json(const TransformFn::Params& p) {
    Json j = Json::object();
    for (const auto& [k, v] : p) j[k] = number_to_json(v);
    return j;
}

inline TransformFn::Params params_from_json(const Json& j, const std::string& where) {
    TransformFn::Params p;
    if (j.is_null()) return p;
    if (!j.is_object()) throw SchemaError(where + ": expected an object");
    for (const auto& [k, v] : j.items()) p[k] = number_from_json(v, where + "." + k);
    return p;
}

inline Json to_json(const GfSpec& g) { return Json{{"expr", g.expr}, {"params", params_to_json(g.params)}, {"mode", to_string(g.mode)}}; }

inline GfSpec gf_from_json(const Json& j, const std::string& where = "gf") {
    GfSpec g;
    g.expr = require(j, "expr", where).get<std::string>();
    if (j.contains("params")) g.params = params_from_json(j["params"], where + ".params");
    if (j.contains("mode")) {
        try {
            g.mode = mode_from_string(j["mode"].get<std::string>());
        } catch (const DomainError& e) {
            throw SchemaError(where + ".mode: " + e.what());
        }
    }
    return g;
}

inline Json to_json(const ModelSpec& s) {
    Json params = Json::object();
    for (const auto& [k, values] : s.params) {
        const bool array_valued = k == "a" || k.ends_with("_i");
        if (!array_valued && values.size() == 1) {
            params[k] = number_to_json(values.front());
            continue;
        }
        Json arr = Json::array();
        for (const auto& v : values) arr.push_back(number_to_json(v));
        params[k] = std::move(arr);
    }
    Json j{{"kind", to_string(s.kind)}, {"n", s.n}, {"params", std::move(params)}};
    if (s.gf) j["gf"] = to_json(*s.gf);
    return j;
}

inline ModelSpec model_from_json(const Json& j, const std::string& where = "model") {
    ModelSpec s;
    try {
        s.kind = model_kind_from_string(require(j, "kind", where).get<std::string>());
    } catch (const DomainError& e) {
        throw SchemaError(where + ".kind: " + e.what());
    }
    const auto& n = require(j, "n", where);
    if (!n.is_number_integer()) throw SchemaError(where + ".n: expected an integer");
    s.n = n.get<long>();
    if (j.contains("params")) {
        const auto& p = j["params"];
        if (!p.is_object()) throw SchemaError(where + ".params: expected an object");
        for (const auto& [k, v] : p.items()) {
            std::vector<Number> values;
            if (v.is_array())
                for (std::size_t i = 0; i < v.size(); ++i) values.push_back(number_from_json(v[i], where + ".params." + k + "[" + std::to_string(i) + "]"));
            else
                values.push_back(number_from_json(v, where + ".params." + k));
            s.params[k] = std::move(values);
        }
    }
    if (j.contains("gf") && !j["gf"].is_null()) s.gf = gf_from_json(j["gf"], where + ".gf");
    return s;
}

inline ZeroModeFormula zero_mode_from_json(const Json& j, const std::string& where = "zero_mode") {
    ZeroModeFormula f;
    try {
        f.kind = zero_mode_kind_from_string(require(j, "formula", where).get<std::string>());
        if (j.contains("mode")) f.mode = mode_from_string(j["mode"].get<std::string>());
    } catch (const DomainError& e) {
        throw SchemaError(where + ": " + e.what());
    }
    if (j.contains("params"))
        for (const auto& [k, v] : j["params"].items()) {
            std::vector<Number> values;
            if (v.is_array())
                for (const auto& x : v) values.push_back(number_from_json(x, where + ".params." + k));
            else
                values.push_back(number_from_json(v, where + ".params." + k));
            f.params[k] = std::move(values);
        }
    return f;
}

// ---------------------------------------------------------------- results

template <Scalar S>
Json to_json(const NullBasis<S>& b) {
    Json vectors = Json::array();
    for (const auto& v : b.vectors) {
        Json row = Json::array();
        for (const auto& x : v) row.push_back(scalar_to_json(x));
        vectors.push_back(std::move(row));
    }
    return Json{{"domain", to_string(domain_of<S>())}, {"dimension", b.dimension}, {"normalized", b.normalized}, {"vectors", std::move(vectors)}};
}

template <Scalar S>
NullBasis<S> null_basis_from_json(const Json& j, const std::string& where = "null_basis") {
    NullBasis<S> b;
    b.dimension = require(j, "dimension", where).get<std::size_t>();
    b.normalized = j.value("normalized", false);
    const auto& vs = require(j, "vectors", where);
    for (std::size_t k = 0; k < vs.size(); ++k) {
        const std::string at = where + ".vectors[" + std::to_string(k) + "]";
        if (!vs[k].is_array() || vs[k].size() != b.dimension) throw SchemaError(at + ": expected " + std::to_string(b.dimension) + " components");
        std::vector<S> v;
        for (std::size_t c = 0; c < vs[k].size(); ++c) v.push_back(scalar_from_json<S>(vs[k][c], at + "[" + std::to_string(c) + "]"));
        b.vectors.push_back(std::move(v));
    }
    return b;
}

inline Json to_json(const Spectrum& s) {
    return Json{{"kind", to_string(s.kind)}, {"values", s.values}, {"mode_index", s.mode_index}, {"gaps", s.gaps}};
}

inline Spectrum spectrum_from_json(const Json& j, const std::string& where = "spectrum") {
    const auto kind_s = require(j, "kind", where).get<std::string>();
    if (kind_s != "eigen" && kind_s != "singular") throw SchemaError(where + ".kind: expected \"eigen\" or \"singular\"");
    const auto kind = kind_s == "eigen" ? SpectrumKind::eigen : SpectrumKind::singular;
    std::vector<double> values;
    const auto& vj = require(j, "values", where);
    for (std::size_t k = 0; k < vj.size(); ++k) values.push_back(float_from_json(vj[k], where + ".values[" + std::to_string(k) + "]"));
    if (j.contains("mode_index")) return Spectrum(std::move(values), j["mode_index"].get<std::vector<int>>(), kind);
    return Spectrum(std::move(values), kind);
}

template <Scalar S>
Json to_json(const SeparabilityReport<S>& r) {
    Json j{{"separable", r.separable}, {"rows", r.rows}, {"cols", r.cols}};
    j["witness"] = r.witness ? Json(*r.witness) : Json(nullptr);
    j["anchor"] = r.anchor;
    Json rf = Json::array(), cf = Json::array();
    for (const auto& x : r.row_factor) rf.push_back(scalar_to_json(x));
    for (const auto& x : r.col_factor) cf.push_back(scalar_to_json(x));
    j["row_factor"] = std::move(rf);
    j["col_factor"] = std::move(cf);
    return j;
}

inline Json to_json(const Theorem1Report& r) {
    return Json{{"nullity_before", r.nullity_before}, {"nullity_after", r.nullity_after}, {"preserved", r.preserved}, {"separable", r.separable}};
}

inline Json to_json(const Profile& p) {
    Json logs = Json::array();
    for (const auto& l : p.log10_amplitude) logs.push_back(l ? Json(*l) : Json(nullptr));
    return Json{{"site", p.site}, {"amplitude", p.amplitude}, {"log10_amplitude", std::move(logs)}, {"normalization", p.normalization}};
}

inline Profile profile_from_json(const Json& j, const std::string& where = "profile") {
    Profile p;
    p.site = require(j, "site", where).get<std::vector<int>>();
    p.amplitude = require(j, "amplitude", where).get<std::vector<double>>();
    for (const auto& l : require(j, "log10_amplitude", where)) p.log10_amplitude.push_back(l.is_null() ? std::nullopt : std::optional<double>(l.get<double>()));
    p.normalization = require(j, "normalization", where).get<double>();
    if (p.amplitude.size() != p.site.size() || p.log10_amplitude.size() != p.site.size())
        throw SchemaError(where + ": site, amplitude and log10_amplitude differ in length");
    return p;
}

inline Json to_json(const Localization& m) { return Json{{"ipr", m.ipr}, {"peak_site", m.peak_site}, {"suppression", m.suppression}}; }

inline Json to_json(const GapFit& f) {
    return Json{{"law", to_string(f.law)}, {"coeff", f.coeff}, {"max_rel_residual", f.max_rel_residual}, {"first_k", f.first_k}, {"points", f.points}};
}

inline Json to_json(const GapReport& r) {
    Json j{{"k", r.k}, {"gaps", r.gaps}};
    j["constant_fit"] = r.constant ? to_json(*r.constant) : Json(nullptr);
    j["linear_fit"] = r.linear ? to_json(*r.linear) : Json(nullptr);
    return j;
}

inline Json to_json(const ConventionFit& f) {
    return Json{{"convention", to_string(f.convention)}, {"n_eff", f.n_eff}, {"max_abs_error", f.max_abs_error},
                {"analytic", to_json(f.analytic)}, {"edge_values", f.edge_values}};
}

inline Json to_json(const KkAdjudication& a) {
    return Json{{"chosen", to_string(a.chosen)}, {"numeric", to_json(a.numeric)}, {"nominal", to_json(a.nominal)}, {"shifted", to_json(a.shifted)}};
}

// ---------------------------------------------------------------- CSV

/// %.17g: enough digits to reproduce every double.
inline std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

/// "site,amplitude" or "site,amplitude,log10_amplitude"; zero components leave
/// the log field empty.
inline void write_profile_csv(std::ostream& out, const Profile& p, bool with_log = true) {
    out << (with_log ? "site,amplitude,log10_amplitude\n" : "site,amplitude\n");
    for (std::size_t k = 0; k < p.size(); ++k) {
        out << p.site[k] << ',' << format_double(p.amplitude[k]);
        if (with_log) {
            out << ',';
            if (p.log10_amplitude[k]) out << format_double(*p.log10_amplitude[k]);
        }
        out << '\n';
    }
}

/// "k,analytic,numeric" rows in mode order; a missing side leaves its field empty.
inline void write_spectrum_csv(std::ostream& out, const std::vector<int>& k, const std::vector<std::optional<double>>& analytic,
                               const std::vector<std::optional<double>>& numeric) {
    out << "k,analytic,numeric\n";
    for (std::size_t p = 0; p < k.size(); ++p) {
        out << k[p] << ',';
        if (p < analytic.size() && analytic[p]) out << format_double(*analytic[p]);
        out << ',';
        if (p < numeric.size() && numeric[p]) out << format_double(*numeric[p]);
        out << '\n';
    }
}

// ---------------------------------------------------------------- fixtures

enum class Provenance { paper, trivial, derived };

inline std::string to_string(Provenance p) {
    switch (p) {
    case Provenance::paper: return "paper";
    case Provenance::trivial: return "trivial";
    case Provenance::derived: return "derived";
    }
    return "?";
}

/// One golden check. `input` holds either {"matrix": ...} or {"model": ...};
/// `expected` is interpreted by the verifier.
struct Fixture {
    std::string name;
    Provenance provenance{Provenance::derived};
    std::string citation;
    Json input;
    std::optional<GfSpec> gf;
    Domain domain{Domain::rational};
    Json expected;
    std::string file;
};

inline Fixture fixture_from_json(const Json& j, const std::string& where) {
    Fixture f;
    f.file = where;
    f.name = require(j, "name", where).get<std::string>();
    const auto prov = require(j, "provenance", where).get<std::string>();
    if (prov == "paper")
        f.provenance = Provenance::paper;
    else if (prov == "trivial")
        f.provenance = Provenance::trivial;
    else if (prov == "derived")
        f.provenance = Provenance::derived;
    else
        throw SchemaError(where + ".provenance: expected paper, trivial or derived, got '" + prov + "'");
    if (j.contains("citation") && j["citation"].is_string()) f.citation = j["citation"].get<std::string>();
    if (f.citation.empty()) throw SchemaError(where + ": provenance \"" + prov + "\" needs a non-empty citation naming its source");
    f.input = require(j, "input", where);
    if (!f.input.is_object() || (f.input.contains("matrix") == f.input.contains("model")))
        throw SchemaError(where + ".input: give exactly one of \"matrix\" or \"model\"");
    if (f.input.contains("matrix")) f.domain = matrix_domain(f.input["matrix"], where + ".input.matrix");
    if (j.contains("domain")) f.domain = domain_from_string(j["domain"].get<std::string>(), where + ".domain");
    if (j.contains("gf")) f.gf = gf_from_json(j["gf"], where + ".gf");
    f.expected = require(j, "expected", where);
    if (!f.expected.is_object() || f.expected.empty()) throw SchemaError(where + ".expected: must be a non-empty object");
    return f;
}

/// Every *.json file in `dir`, in filename order.
inline std::vector<Fixture> load_fixture_suite(const std::filesystem::path& dir) {
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir)) throw SchemaError(dir.string() + ": not a directory");
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
        if (e.is_regular_file() && e.path().extension() == ".json") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    std::vector<Fixture> out;
    for (const auto& p : files) out.push_back(fixture_from_json(read_json_file(p), p.filename().string()));
    return out;
}

} // namespace nullforge
