#include "monoglm_cli/config.hpp"

#include "monoglm/error.hpp"

#include <fstream>
#include <set>

namespace monoglm::cli {

namespace {

using nlohmann::json;

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
    if (!obj.is_object()) throw InputError("configuration: '" + where + "' must be an object");
    const std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = obj.begin(); it != obj.end(); ++it) {
        if (!allowed.contains(it.key()))
            throw InputError("configuration: unknown key '" + it.key() + "' in " + where);
    }
}

std::string as_string(const json& v, const std::string& key) {
    if (v.is_string()) return v.get<std::string>();
    throw InputError("configuration: '" + key + "' must be a string");
}

// Level labels may be written as strings or integers; both compare against the raw CSV text.
std::string as_label(const json& v, const std::string& factor) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return v.dump();
    throw InputError("configuration: levels of factor '" + factor + "' must be strings or integers");
}

double as_positive(const json& v, const std::string& key) {
    if (!v.is_number()) throw InputError("configuration: '" + key + "' must be a number");
    const double d = v.get<double>();
    if (!(d > 0.0)) throw InputError("configuration: '" + key + "' must be positive");
    return d;
}

std::size_t as_count(const json& v, const std::string& key) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
        throw InputError("configuration: '" + key + "' must be a nonnegative integer");
    return v.get<std::size_t>();
}

} // namespace

OutputFormat parse_format(const std::string& name) {
    if (name == "json") return OutputFormat::json;
    if (name == "text") return OutputFormat::text;
    throw InputError("unknown output format '" + name + "' (expected json or text)");
}

RunConfig parse_config(const json& c) {
    allow_keys(c, "configuration",
               {"data", "family", "response", "time", "event", "intercept", "factors", "covariates", "test",
                "tolerances", "output"});
    RunConfig cfg;
    if (c.contains("data")) cfg.data_path = as_string(c["data"], "data");
    if (!c.contains("family")) throw InputError("configuration: 'family' is required");
    switch (parse_family(as_string(c["family"], "family"))) {
    case FamilyKind::gaussian: cfg.model.family = Family::gaussian(); break;
    case FamilyKind::logistic: cfg.model.family = Family::logistic(); break;
    case FamilyKind::cox: cfg.model.family = Family::cox(); break;
    }
    const bool cox = cfg.model.family.kind == FamilyKind::cox;
    if (cox) {
        if (c.contains("response")) throw InputError("configuration: Cox models take 'time' and 'event', not 'response'");
        if (!c.contains("time") || !c.contains("event"))
            throw InputError("configuration: Cox models need both 'time' and 'event'");
        cfg.model.time = as_string(c["time"], "time");
        cfg.model.event = as_string(c["event"], "event");
    } else {
        if (c.contains("time") || c.contains("event"))
            throw InputError("configuration: 'time'/'event' only apply to the Cox family");
        if (!c.contains("response")) throw InputError("configuration: 'response' is required");
        cfg.model.response = as_string(c["response"], "response");
    }
    if (c.contains("intercept")) {
        if (!c["intercept"].is_boolean()) throw InputError("configuration: 'intercept' must be true or false");
        cfg.model.intercept = c["intercept"].get<bool>();
    }

    if (c.contains("factors")) {
        if (!c["factors"].is_array()) throw InputError("configuration: 'factors' must be a list");
        for (const auto& f : c["factors"]) {
            allow_keys(f, "factor", {"column", "levels", "direction"});
            if (!f.contains("column") || !f.contains("levels"))
                throw InputError("configuration: each factor needs 'column' and 'levels'");
            OrderedFactor factor;
            factor.name = as_string(f["column"], "column");
            if (!f["levels"].is_array())
                throw InputError("configuration: levels of factor '" + factor.name + "' must be a list");
            for (const auto& level : f["levels"]) factor.levels.push_back(as_label(level, factor.name));
            if (f.contains("direction")) factor.direction = parse_direction(as_string(f["direction"], "direction"));
            factor.validate();
            cfg.model.factors.push_back(std::move(factor));
        }
    }
    if (c.contains("covariates")) {
        if (!c["covariates"].is_array()) throw InputError("configuration: 'covariates' must be a list");
        for (const auto& v : c["covariates"]) cfg.model.covariates.push_back(as_string(v, "covariates"));
    }

    if (c.contains("tolerances")) {
        const auto& t = c["tolerances"];
        allow_keys(t, "tolerances", {"kkt", "feasibility", "inner_gradient", "max_outer_iterations"});
        auto& s = cfg.model.solver;
        if (t.contains("kkt")) s.kkt_tol = as_positive(t["kkt"], "kkt");
        if (t.contains("feasibility")) s.feasibility_tol = as_positive(t["feasibility"], "feasibility");
        if (t.contains("inner_gradient")) s.inner_gradient_tol = as_positive(t["inner_gradient"], "inner_gradient");
        if (t.contains("max_outer_iterations"))
            s.max_outer_iterations = as_count(t["max_outer_iterations"], "max_outer_iterations");
    }

    if (c.contains("test")) {
        const auto& t = c["test"];
        allow_keys(t, "test", {"null", "method", "n_sim", "seed", "sigma2", "threads"});
        TestConfig test;
        if (!t.contains("null")) throw InputError("configuration: 'test' needs a 'null' hypothesis");
        const auto& null = t["null"];
        allow_keys(null, "test.null", {"factor", "columns"});
        if (null.contains("factor")) test.null.factor = as_string(null["factor"], "factor");
        if (null.contains("columns")) {
            if (!null["columns"].is_array()) throw InputError("configuration: 'test.null.columns' must be a list");
            for (const auto& col : null["columns"]) test.null.columns.push_back(as_string(col, "columns"));
        }
        if (!test.null.factor && test.null.columns.empty())
            throw InputError("configuration: 'test.null' needs 'factor' or 'columns'");
        if (t.contains("method")) test.method = parse_test_method(as_string(t["method"], "method"));
        if (t.contains("n_sim")) test.n_sim = as_count(t["n_sim"], "n_sim");
        if (t.contains("seed")) {
            if (!t["seed"].is_number_unsigned()) throw InputError("configuration: 'seed' must be a nonnegative integer");
            test.seed = t["seed"].get<std::uint64_t>();
        }
        if (t.contains("sigma2")) test.sigma2 = as_positive(t["sigma2"], "sigma2");
        if (t.contains("threads")) test.threads = static_cast<unsigned>(std::max<std::size_t>(1, as_count(t["threads"], "threads")));
        cfg.test = std::move(test);
    }

    if (c.contains("output")) {
        const auto& o = c["output"];
        allow_keys(o, "output", {"path", "format"});
        if (o.contains("path")) cfg.output_path = as_string(o["path"], "path");
        if (o.contains("format")) cfg.format = parse_format(as_string(o["format"], "format"));
    }
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw InputError("cannot open configuration file '" + path + "'");
    json c;
    try {
        c = json::parse(in);
    } catch (const json::parse_error& e) {
        throw InputError("configuration file '" + path + "' is not valid JSON: " + e.what());
    }
    return parse_config(c);
}

} // namespace monoglm::cli
