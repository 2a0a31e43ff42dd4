// nullforge command-line frontend.
//
//   nullforge check-separable --gf EXPR --n N [--m M] [--params k=v,...]
//   nullforge transform       --in FILE --gf EXPR [--mode divide|multiply] [--out FILE]
//   nullforge nullmodes       (--in FILE | --model KIND --n N) [--gf EXPR] [--predict] [--format json|csv]
//   nullforge spectrum        --model KIND --n N [--analytic] [--numeric] [--gaps]
//   nullforge verify          --fixtures DIR
//   nullforge sweep           --model KIND --n N --param name=start:stop:steps --metric NAME
//
// Every command prints a JSON summary on stdout. Exit status: 0 success,
// 1 domain error, 2 usage error. A JSON file given to --config (before the
// subcommand) supplies flags, e.g. {"spectrum": {"model": "kk_bidiagonal", "n": 50}}.

#include <nullforge/verify.hpp>

#include <CLI11.hpp>

#include <atomic>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <thread>

namespace nf = nullforge;
using nf::Json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// JSON front end for CLI11's config mechanism: nested objects become
/// subcommand sections, scalars and arrays become option values.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
        Json j;
        try {
            j = Json::parse(input);
        } catch (const Json::parse_error& e) {
            throw CLI::ConversionError(std::string("config: ") + e.what());
        }
        if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
        std::vector<CLI::ConfigItem> out;
        flatten(j, {}, out);
        return out;
    }

private:
    static std::string scalar(const Json& v) { return v.is_string() ? v.get<std::string>() : v.dump(); }

    static void flatten(const Json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
        for (const auto& [key, value] : j.items()) {
            if (value.is_object()) {
                auto p = parents;
                p.push_back(key);
                flatten(value, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = key;
            if (value.is_array())
                for (const auto& x : value) item.inputs.push_back(scalar(x));
            else
                item.inputs.push_back(scalar(value));
            out.push_back(std::move(item));
        }
    }
};

/// "k=v,k2=v2,a=[1,2,3]": values are exact numbers, brackets give arrays.
std::map<std::string, std::vector<nf::Number>> parse_params(const std::string& text) {
    std::map<std::string, std::vector<nf::Number>> out;
    std::vector<std::string> items;
    std::string cur;
    int depth = 0;
    for (char ch : text) {
        if (ch == '[') ++depth;
        if (ch == ']') --depth;
        if (ch == ',' && depth == 0) {
            items.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    if (!cur.empty()) items.push_back(cur);
    for (auto item : items) {
        item = CLI::detail::trim_copy(item);
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0) throw UsageError("--params: expected name=value, got '" + item + "'");
        const std::string name = CLI::detail::trim_copy(item.substr(0, eq));
        std::string value = CLI::detail::trim_copy(item.substr(eq + 1));
        std::vector<nf::Number> values;
        auto number = [&](const std::string& s) {
            auto r = nf::parse_rational(CLI::detail::trim_copy(s));
            if (!r) throw UsageError("--params: '" + s + "' is not a number (parameter " + name + ")");
            return nf::Number(*r);
        };
        if (!value.empty() && value.front() == '[') {
            if (value.back() != ']') throw UsageError("--params: unterminated array for " + name);
            for (const auto& part : CLI::detail::split(value.substr(1, value.size() - 2), ','))
                if (!CLI::detail::trim_copy(std::string(part)).empty()) values.push_back(number(part));
        } else {
            values.push_back(number(value));
        }
        if (out.count(name)) throw UsageError("--params: '" + name + "' given twice");
        out[name] = std::move(values);
    }
    return out;
}

nf::TransformFn::Params scalar_params(const std::map<std::string, std::vector<nf::Number>>& p, const std::set<std::string>& names) {
    nf::TransformFn::Params out;
    for (const auto& name : names) {
        auto it = p.find(name);
        if (it == p.end()) continue;
        if (it->second.size() != 1) throw UsageError("transform parameter '" + name + "' must be a scalar");
        out[name] = it->second.front();
    }
    return out;
}

/// Flags shared by the commands that build or transform a matrix.
struct Common {
    std::string in;
    std::string model;
    long n{0};
    long m{0};
    std::string gf;
    std::string mode{"divide"};
    std::string params;
    std::string domain{"auto"};
    std::string format{"json"};
    std::string out;

    std::map<std::string, std::vector<nf::Number>> parsed() const { return parse_params(params); }

    std::optional<nf::GfSpec> gf_spec(const std::map<std::string, std::vector<nf::Number>>& p) const {
        if (gf.empty()) return std::nullopt;
        nf::GfSpec g;
        g.expr = gf;
        g.mode = nf::mode_from_string(mode);
        const auto expr = nf::parse_expr(gf);
        g.params = scalar_params(p, expr.parameters());
        return g;
    }

    /// Parameters go to the transform when its expression names them and to
    /// the model when the model accepts them; a name may feed both.
    nf::ModelSpec spec() const {
        if (model.empty()) throw UsageError("--model is required");
        if (n < 1) throw UsageError("--n must be a positive integer");
        const auto p = parsed();
        nf::ModelSpec s;
        s.kind = nf::model_kind_from_string(model);
        s.n = n;
        s.gf = gf_spec(p);
        const auto& accepted = nf::model_param_names(s.kind);
        std::set<std::string> gf_names;
        if (!gf.empty()) gf_names = nf::parse_expr(gf).parameters();
        for (const auto& [name, values] : p) {
            if (accepted.count(name))
                s.params[name] = values;
            else if (!gf_names.count(name))
                throw UsageError("--params: '" + name + "' is used by neither model " + model + " nor the transform");
        }
        return s;
    }
};

void add_common(CLI::App* cmd, Common& c, bool with_model, bool with_in) {
    if (with_in) cmd->add_option("--in", c.in, "input matrix JSON file");
    if (with_model) {
        cmd->add_option("--model", c.model, "model kind")
            ->check(CLI::IsMember({"uniform_cw", "generalized_cw", "nonlocal_cw", "deconstruction", "kk_bidiagonal"}));
        cmd->add_option("--n", c.n, "model size");
    }
    cmd->add_option("--gf", c.gf, "transform expression g(i,j)");
    cmd->add_option("--mode", c.mode, "divide or multiply")->check(CLI::IsMember({"divide", "multiply"}));
    cmd->add_option("--params", c.params, "name=value list shared by model and transform");
    cmd->add_option("--domain", c.domain, "auto, rational or float")->check(CLI::IsMember({"auto", "rational", "float"}));
    cmd->add_option("--out", c.out, "write the main artifact to this file");
}

nf::Domain choose_domain(const std::string& choice, const std::function<void()>& exact_probe) {
    if (choice == "rational") return nf::Domain::rational;
    if (choice == "float") return nf::Domain::floating;
    try {
        exact_probe();
        return nf::Domain::rational;
    } catch (const nf::EvalError&) {
        return nf::Domain::floating;
    }
}

/// Writes `text` to --out when given, else returns false.
bool write_out(const std::string& path, const std::string& text) {
    if (path.empty()) return false;
    nf::write_text_file(path, text);
    return true;
}

void print(const Json& j) { std::cout << j.dump(2) << '\n'; }

// ---------------------------------------------------------------- check-separable

int cmd_check_separable(const Common& c) {
    if (c.gf.empty()) throw UsageError("--gf is required");
    if (c.n < 1) throw UsageError("--n must be a positive integer");
    const long m = c.m > 0 ? c.m : c.n;
    const auto g = nf::TransformFn(nf::parse_expr(c.gf), scalar_params(c.parsed(), nf::parse_expr(c.gf).parameters()));
    const auto domain = choose_domain(c.domain, [&] { g.check_grid<nf::Rational>(c.n, m, false); });
    Json j{{"command", "check-separable"}, {"gf", g.source()}, {"params", nf::params_to_json(g.params())}, {"grid", {c.n, m}},
           {"domain", nf::to_string(domain)}};
    j["report"] = domain == nf::Domain::rational ? nf::to_json(nf::is_separable<nf::Rational>(g, c.n, m))
                                                 : nf::to_json(nf::is_separable<double>(g, c.n, m));
    print(j);
    return 0;
}

// ---------------------------------------------------------------- transform

template <nf::Scalar S>
Json transform_with(const nf::DenseMatrix<S>& a, const nf::TransformFn& g, nf::Mode mode, const std::string& out) {
    const auto b = nf::apply_transform(a, g, mode);
    Json j{{"command", "transform"}, {"domain", nf::to_string(nf::domain_of<S>())}, {"mode", nf::to_string(mode)}, {"gf", g.source()}};
    j["theorem"] = nf::to_json(nf::verify_theorem1(a, g, mode));
    const Json mj = nf::to_json(b);
    if (write_out(out, mj.dump(2) + "\n"))
        j["out"] = out;
    else
        j["matrix"] = mj;
    return j;
}

int cmd_transform(const Common& c) {
    if (c.in.empty()) throw UsageError("--in is required");
    if (c.gf.empty()) throw UsageError("--gf is required");
    const auto doc = nf::read_json_file(c.in);
    const auto in_domain = nf::matrix_domain(doc, c.in);
    const auto expr = nf::parse_expr(c.gf);
    const nf::TransformFn g(expr, scalar_params(c.parsed(), expr.parameters()));
    const auto mode = nf::mode_from_string(c.mode);
    nf::Domain domain = nf::Domain::floating;
    if (in_domain == nf::Domain::rational) {
        const auto a = nf::matrix_from_json<nf::Rational>(doc, c.in);
        domain = choose_domain(c.domain, [&] { g.check_grid<nf::Rational>(static_cast<long>(a.rows()), static_cast<long>(a.cols()), false); });
        if (domain == nf::Domain::rational) {
            print(transform_with(a, g, mode, c.out));
            return 0;
        }
        print(transform_with(nf::to_float(a), g, mode, c.out));
        return 0;
    }
    if (c.domain == "rational") throw nf::DomainError("input matrix is floating point; --domain rational is not available");
    print(transform_with(nf::matrix_from_json<double>(doc, c.in), g, mode, c.out));
    return 0;
}

// ---------------------------------------------------------------- nullmodes

struct NullmodeFlags {
    bool predict{false};
    std::string formula;
};

template <nf::Scalar S>
int nullmodes_with(const Common& c, const NullmodeFlags& flags, const nf::DenseMatrix<S>& base, const std::optional<nf::GfSpec>& gf,
                   Json summary) {
    const auto h = gf ? nf::apply_transform(base, gf->fn(), gf->mode) : base;
    const auto modes = nf::chiral_zero_modes(h);
    summary["domain"] = nf::to_string(nf::domain_of<S>());
    summary["rows"] = h.rows();
    summary["cols"] = h.cols();
    summary["right"] = {{"nullity", modes.right.size()}, {"basis", nf::to_json(modes.right)}};
    summary["left"] = {{"nullity", modes.left.size()}, {"basis", nf::to_json(modes.left)}};
    std::optional<nf::Profile> prof;
    if (!modes.right.empty()) {
        prof = nf::profile(modes.right.vectors.front());
        summary["profile"] = nf::to_json(*prof);
        summary["localization"] = nf::to_json(nf::localization_metrics(*prof));
    }
    if (flags.predict) {
        if (!gf) throw UsageError("--predict needs --gf");
        const auto pred = nf::predict_null_basis(nf::null_basis(base), gf->fn(), static_cast<long>(base.rows()),
                                                 static_cast<long>(base.cols()), gf->mode);
        summary["predicted"] = {{"basis", nf::to_json(pred)}, {"matches", nf::same_subspace(pred, modes.right)}};
    }
    if (!flags.formula.empty()) {
        nf::ZeroModeFormula f;
        f.kind = nf::zero_mode_kind_from_string(flags.formula);
        f.params = c.parsed();
        if (gf) f.mode = gf->mode;
        const long n = c.n > 0 ? c.n : static_cast<long>(h.rows());
        const auto v = nf::zero_mode_analytic<S>(f, n);
        const bool left = f.kind == nf::ZeroModeKind::decon_transformed_left;
        const auto& target = left ? modes.left : modes.right;
        const bool same = v.size() == h.cols() && target.size() == 1 && nf::same_subspace(nf::span_of(v), target);
        Json fj{{"name", flags.formula}, {"side", left ? "left" : "right"}, {"matches", same}};
        Json comps = Json::array();
        for (const auto& x : v) comps.push_back(nf::scalar_to_json(x));
        fj["components"] = std::move(comps);
        summary["formula"] = std::move(fj);
    }
    if (c.format == "csv") {
        if (!prof) throw nf::DomainError("no right zero mode to write as a profile");
        std::ostringstream csv;
        nf::write_profile_csv(csv, *prof, true);
        if (!write_out(c.out, csv.str())) {
            std::cout << csv.str();
            return 0;
        }
        summary["out"] = c.out;
    } else if (write_out(c.out, summary.dump(2) + "\n")) {
        print(Json{{"command", "nullmodes"}, {"out", c.out}, {"right_nullity", modes.right.size()}, {"left_nullity", modes.left.size()}});
        return 0;
    }
    print(summary);
    return 0;
}

int cmd_nullmodes(const Common& c, const NullmodeFlags& flags) {
    if (c.in.empty() == c.model.empty()) throw UsageError("give exactly one of --in or --model");
    Json summary{{"command", "nullmodes"}};
    if (!c.model.empty()) {
        auto spec = c.spec();
        summary["model"] = nf::to_json(spec);
        const auto gf = spec.gf;
        spec.gf.reset();
        const auto domain = choose_domain(c.domain, [&] {
            auto probe = spec;
            probe.gf = gf;
            (void)nf::build<nf::Rational>(probe);
        });
        if (domain == nf::Domain::rational) return nullmodes_with(c, flags, nf::build<nf::Rational>(spec), gf, summary);
        return nullmodes_with(c, flags, nf::build<double>(spec), gf, summary);
    }
    const auto doc = nf::read_json_file(c.in);
    const auto gf = c.gf_spec(c.parsed());
    summary["in"] = c.in;
    if (nf::matrix_domain(doc, c.in) == nf::Domain::rational) {
        const auto a = nf::matrix_from_json<nf::Rational>(doc, c.in);
        const auto domain = choose_domain(c.domain, [&] {
            if (gf) gf->fn().check_grid<nf::Rational>(static_cast<long>(a.rows()), static_cast<long>(a.cols()), false);
        });
        if (domain == nf::Domain::rational) return nullmodes_with(c, flags, a, gf, summary);
        return nullmodes_with(c, flags, nf::to_float(a), gf, summary);
    }
    return nullmodes_with(c, flags, nf::matrix_from_json<double>(doc, c.in), gf, summary);
}

// ---------------------------------------------------------------- spectrum

struct SpectrumFlags {
    bool analytic{false};
    bool numeric{false};
    bool gaps{false};
    std::string convention{"auto"};
    int max_k{10};
};

int cmd_spectrum(const Common& c, SpectrumFlags f) {
    const auto spec = c.spec();
    if (!f.analytic && !f.numeric) f.numeric = true;
    Json j{{"command", "spectrum"}, {"model", nf::to_json(spec)}};
    std::optional<nf::Spectrum> analytic, numeric;
    std::optional<nf::KkAdjudication> adj;
    if (f.numeric) numeric = nf::spectrum_numeric(spec);
    if (f.analytic) {
        auto conv = nf::KkConvention::shifted;
        if (f.convention == "nominal") conv = nf::KkConvention::nominal;
        if (f.convention == "auto" || f.numeric) adj = nf::adjudicate_kk_spectrum(spec);
        if (f.convention == "auto") conv = adj->chosen;
        analytic = nf::spectrum_analytic(spec, conv);
        j["convention"] = nf::to_string(conv);
        j["analytic"] = nf::to_json(*analytic);
    }
    if (numeric) j["numeric"] = nf::to_json(*numeric);
    const nf::ConventionFit* fit = nullptr;
    if (adj && analytic) {
        fit = j["convention"] == "nominal" ? &adj->nominal : &adj->shifted;
        j["comparison"] = {{"max_abs_error", fit->max_abs_error},
                           {"edge_values", fit->edge_values},
                           {"nominal_max_abs_error", adj->nominal.max_abs_error},
                           {"shifted_max_abs_error", adj->shifted.max_abs_error},
                           {"adjudicated", nf::to_string(adj->chosen)}};
    }
    if (f.gaps) j["gaps"] = nf::to_json(nf::mass_gaps(analytic ? *analytic : *numeric, f.max_k));

    if (c.format == "csv") {
        std::vector<int> ks;
        std::vector<std::optional<double>> av, nv;
        if (analytic) {
            std::vector<std::pair<int, std::size_t>> order;
            for (std::size_t p = 0; p < analytic->size(); ++p) order.emplace_back(analytic->mode_index[p], p);
            std::sort(order.begin(), order.end());
            for (auto [k, p] : order) {
                ks.push_back(k);
                av.push_back(analytic->values[p]);
                if (fit) nv.push_back(fit->matched_numeric[p]);
                else nv.push_back(std::nullopt);
            }
        } else {
            for (std::size_t p = 0; p < numeric->size(); ++p) {
                ks.push_back(numeric->mode_index[p]);
                av.push_back(std::nullopt);
                nv.push_back(numeric->values[p]);
            }
        }
        std::ostringstream csv;
        nf::write_spectrum_csv(csv, ks, av, nv);
        if (!write_out(c.out, csv.str())) {
            std::cout << csv.str();
            return 0;
        }
        j["out"] = c.out;
    } else if (write_out(c.out, j.dump(2) + "\n")) {
        print(Json{{"command", "spectrum"}, {"out", c.out}});
        return 0;
    }
    print(j);
    return 0;
}

// ---------------------------------------------------------------- verify

int cmd_verify(const std::string& dir) {
    const auto report = nf::verify_suite(nf::load_fixture_suite(dir));
    Json j = nf::to_json(report);
    j["command"] = "verify";
    print(j);
    if (!report.ok()) {
        std::cerr << "verify: " << report.failed() << " of " << report.fixtures.size() << " fixtures failed\n";
        return 1;
    }
    return 0;
}

// ---------------------------------------------------------------- sweep

struct SweepPoint {
    nf::Number value;
    std::optional<double> metric;
    std::string error;
};

double sweep_metric(const nf::ModelSpec& spec, const std::string& metric) {
    if (metric == "kk_max_abs_error") return nf::adjudicate_kk_spectrum(spec).best().max_abs_error;
    if (metric == "sigma_min" || metric == "sigma_max") {
        const auto s = nf::spectrum_numeric(spec);
        return metric == "sigma_min" ? s.values.front() : s.values.back();
    }
    nf::Domain domain = nf::Domain::rational;
    try {
        (void)nf::build<nf::Rational>(spec);
    } catch (const nf::EvalError&) {
        domain = nf::Domain::floating;
    }
    auto modes_of = [&]() -> std::pair<std::size_t, std::vector<double>> {
        if (domain == nf::Domain::rational) {
            const auto m = nf::build<nf::Rational>(spec);
            if (metric == "left_nullity") return {nf::nullity(m.transpose()), {}};
            auto b = nf::null_basis(m);
            std::vector<double> v;
            if (!b.empty())
                for (const auto& x : b.vectors.front()) v.push_back(nf::to_double(x));
            return {b.size(), v};
        }
        const auto m = nf::build<double>(spec);
        if (metric == "left_nullity") return {nf::nullity(m.transpose()), {}};
        auto b = nf::null_basis(m);
        return {b.size(), b.empty() ? std::vector<double>{} : b.vectors.front()};
    };
    const auto [nul, v] = modes_of();
    if (metric == "nullity" || metric == "left_nullity") return static_cast<double>(nul);
    if (v.empty()) throw nf::DomainError("no zero mode at this point");
    const auto loc = nf::localization_metrics(nf::profile(v));
    if (metric == "ipr") return loc.ipr;
    if (metric == "suppression") return loc.suppression;
    return loc.peak_site;
}

int cmd_sweep(const Common& c, const std::string& param, const std::string& metric) {
    const auto base = c.spec();
    const auto colon = CLI::detail::split(param.substr(param.find('=') == std::string::npos ? 0 : param.find('=') + 1), ':');
    const auto eq = param.find('=');
    if (eq == std::string::npos || eq == 0 || colon.size() != 3) throw UsageError("--param must look like name=start:stop:steps");
    const std::string name = param.substr(0, eq);
    const auto start = nf::parse_rational(colon[0]);
    const auto stop = nf::parse_rational(colon[1]);
    long steps = 0;
    try {
        steps = std::stol(colon[2]);
    } catch (const std::exception&) {
        throw UsageError("--param: steps must be an integer");
    }
    if (!start || !stop || steps < 1) throw UsageError("--param: start and stop must be numbers and steps >= 1");
    const bool is_n = name == "n";
    const bool for_model = nf::model_param_names(base.kind).count(name) != 0;
    const bool for_gf = base.gf && nf::parse_expr(base.gf->expr).parameters().count(name) != 0;
    if (!is_n && !for_model && !for_gf) throw UsageError("--param: '" + name + "' is not a parameter of the model or transform");

    std::vector<SweepPoint> points(static_cast<std::size_t>(steps));
    for (long p = 0; p < steps; ++p) {
        const nf::Rational v = steps == 1 ? *start : *start + (*stop - *start) * nf::Rational(p) / nf::Rational(steps - 1);
        points[p].value = nf::Number(v);
        if (is_n && boost::multiprecision::denominator(v) != 1) throw UsageError("--param n needs integer grid points");
    }

    unsigned threads = 1;
    if (const char* env = std::getenv("NULLFORGE_THREADS")) {
        try {
            threads = static_cast<unsigned>(std::max(1L, std::stol(env)));
        } catch (const std::exception&) {
            throw UsageError("NULLFORGE_THREADS must be a positive integer");
        }
    } else {
        threads = std::max(1u, std::thread::hardware_concurrency());
    }
    threads = std::min<unsigned>(threads, static_cast<unsigned>(points.size()));

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t p; (p = next.fetch_add(1)) < points.size();) {
            auto spec = base;
            const auto& v = points[p].value;
            if (is_n) spec.n = static_cast<long>(boost::multiprecision::numerator(v.exact));
            if (for_model) spec.params[name] = {v};
            if (for_gf) spec.gf->params[name] = v;
            try {
                points[p].metric = sweep_metric(spec, metric);
            } catch (const std::exception& e) {
                points[p].error = e.what();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned t = 1; t < threads; ++t) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    if (c.format == "csv") {
        std::ostringstream csv;
        csv << "value," << metric << '\n';
        for (const auto& pt : points) {
            csv << nf::format_double(pt.value.value) << ',';
            if (pt.metric) csv << nf::format_double(*pt.metric);
            csv << '\n';
        }
        if (!write_out(c.out, csv.str())) std::cout << csv.str();
        else print(Json{{"command", "sweep"}, {"out", c.out}});
        return 0;
    }
    Json arr = Json::array();
    for (std::size_t p = 0; p < points.size(); ++p) {
        Json pj{{"index", p}, {"value", nf::number_to_json(points[p].value)}};
        pj["metric"] = points[p].metric ? Json(*points[p].metric) : Json(nullptr);
        if (!points[p].error.empty()) pj["error"] = points[p].error;
        arr.push_back(std::move(pj));
    }
    Json j{{"command", "sweep"}, {"model", nf::to_json(base)}, {"param", name}, {"metric", metric}, {"points", std::move(arr)}};
    if (write_out(c.out, j.dump(2) + "\n"))
        print(Json{{"command", "sweep"}, {"out", c.out}});
    else
        print(j);
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Index-dependent element-wise matrix transforms, null spaces and model spectra"};
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON file supplying flags");

    Common common;
    NullmodeFlags nm;
    SpectrumFlags sp;
    std::string fixtures, sweep_param, sweep_metric_name;

    auto* sep = app.add_subcommand("check-separable", "test g(i,j) = g'(i) g''(j) on a grid");
    add_common(sep, common, false, false);
    sep->add_option("--n", common.n, "grid rows");
    sep->add_option("--m", common.m, "grid columns (default n)");

    auto* tr = app.add_subcommand("transform", "apply g to a matrix file");
    add_common(tr, common, false, true);

    auto* nmc = app.add_subcommand("nullmodes", "null bases, profiles and predictions");
    add_common(nmc, common, true, true);
    nmc->add_flag("--predict", nm.predict, "compare with the basis predicted from the untransformed matrix");
    nmc->add_option("--formula", nm.formula, "closed-form zero mode to compare against");
    nmc->add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    auto* spc = app.add_subcommand("spectrum", "analytic and numeric mass spectra");
    add_common(spc, common, true, false);
    spc->add_flag("--analytic", sp.analytic, "closed-form KK masses");
    spc->add_flag("--numeric", sp.numeric, "singular values of the built matrix");
    spc->add_flag("--gaps", sp.gaps, "mass gaps with constant and linear fits");
    spc->add_option("--convention", sp.convention, "auto, nominal or shifted")->check(CLI::IsMember({"auto", "nominal", "shifted"}));
    spc->add_option("--max-k", sp.max_k, "largest mode number used by the gap fits");
    spc->add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    auto* ver = app.add_subcommand("verify", "run a directory of fixture files");
    ver->add_option("--fixtures", fixtures, "fixture directory")->required();

    auto* sw = app.add_subcommand("sweep", "evaluate a metric over a parameter grid");
    add_common(sw, common, true, false);
    sw->add_option("--param", sweep_param, "name=start:stop:steps")->required();
    sw->add_option("--metric", sweep_metric_name, "metric")
        ->required()
        ->check(CLI::IsMember({"nullity", "left_nullity", "ipr", "suppression", "peak_site", "sigma_min", "sigma_max", "kk_max_abs_error"}));
    sw->add_option("--format", common.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*sep) return cmd_check_separable(common);
        if (*tr) return cmd_transform(common);
        if (*nmc) return cmd_nullmodes(common, nm);
        if (*spc) return cmd_spectrum(common, sp);
        if (*ver) return cmd_verify(fixtures);
        if (*sw) return cmd_sweep(common, sweep_param, sweep_metric_name);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    } catch (const nf::ParseError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}
