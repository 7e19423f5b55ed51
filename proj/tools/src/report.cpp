#include "monoglm_cli/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace monoglm::cli {

using nlohmann::ordered_json;

namespace {

std::string_view kind_name(ColumnKind kind) {
    switch (kind) {
    case ColumnKind::intercept: return "intercept";
    case ColumnKind::increment: return "increment";
    case ColumnKind::covariate: return "covariate";
    }
    return "unknown";
}

std::string_view status_name(LevelStatus s) {
    switch (s) {
    case LevelStatus::observed: return "observed";
    case LevelStatus::unobserved_interior: return "unobserved_interior";
    case LevelStatus::dropped: return "dropped";
    }
    return "unknown";
}

ordered_json number(double v) { return std::isfinite(v) ? ordered_json(v) : ordered_json(nullptr); }

ordered_json kkt_json(const KktReport& kkt) {
    ordered_json out;
    out["pass"] = kkt.pass;
    out["tolerance"] = kkt.tolerance;
    out["max_free_gradient"] = kkt.max_free_gradient;
    out["max_bound_gradient"] = kkt.max_bound_gradient;
    ordered_json entries = ordered_json::array();
    for (const auto& e : kkt.entries) {
        ordered_json row;
        row["index"] = e.index;
        row["constrained"] = e.constrained;
        row["at_bound"] = e.at_bound;
        row["degenerate"] = e.degenerate;
        row["gradient"] = e.gradient;
        row["pass"] = e.pass;
        entries.push_back(std::move(row));
    }
    out["entries"] = std::move(entries);
    return out;
}

ordered_json trace_json(const FitResult& fit, const DesignSystem& design) {
    ordered_json out;
    std::size_t adds = 0, drops = 0;
    ordered_json steps = ordered_json::array();
    for (const auto& t : fit.trace) {
        if (t.action == StepAction::add) ++adds;
        if (t.action == StepAction::drop) ++drops;
        ordered_json row;
        row["action"] = std::string(to_string(t.action));
        row["objective"] = t.objective;
        row["active_size"] = t.active_size;
        if (t.coordinate) row["coordinate"] = design.labels()[static_cast<std::size_t>(*t.coordinate)].display();
        else row["coordinate"] = nullptr;
        steps.push_back(std::move(row));
    }
    out["outer_iterations"] = fit.iterations;
    out["adds"] = adds;
    out["drops"] = drops;
    out["initial_objective"] = fit.trace.empty() ? ordered_json(nullptr) : ordered_json(fit.trace.front().objective);
    out["final_objective"] = fit.trace.empty() ? ordered_json(nullptr) : ordered_json(fit.trace.back().objective);
    out["steps"] = std::move(steps);
    return out;
}

} // namespace

ordered_json coefficient_table(const DesignSystem& design, const FitResult& fit) {
    ordered_json rows = ordered_json::array();
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
        const auto& label = design.labels()[static_cast<std::size_t>(j)];
        ordered_json row;
        row["index"] = j;
        row["label"] = label.display();
        row["kind"] = std::string(kind_name(label.kind));
        row["estimate"] = fit.beta[j];
        row["sign"] = label.sign;
        row["constrained"] = design.is_constrained(j);
        row["active"] = fit.active.contains(j);
        rows.push_back(std::move(row));
    }
    return rows;
}

ordered_json fit_report(const RunConfig& config, const DesignSystem& design, const FitResult& fit) {
    const auto& family = config.model.family;
    ordered_json r;
    r["report_version"] = report_version;
    r["family"] = std::string(to_string(family.kind));
    r["tie_rule"] = family.kind == FamilyKind::cox ? ordered_json("breslow") : ordered_json(nullptr);
    r["n"] = design.rows();
    r["p"] = design.cols();
    r["status"] = std::string(to_string(fit.status));
    r["message"] = fit.message;
    r["loglik"] = fit.loglik;
    r["coefficients"] = coefficient_table(design, fit);

    const auto intercept = design.intercept_column();
    const double base = intercept ? fit.beta[*intercept] : 0.0;
    ordered_json factors = ordered_json::array();
    for (std::size_t f = 0; f < design.factors().size(); ++f) {
        const auto& block = design.factors()[f];
        const auto effects = design.level_effects(fit.beta, f);
        ordered_json fj;
        fj["name"] = block.name;
        fj["direction"] = std::string(to_string(block.direction));
        ordered_json levels = ordered_json::array();
        for (std::size_t lvl = 0; lvl < block.levels.size(); ++lvl) {
            ordered_json row;
            row["level"] = block.levels[lvl];
            row["status"] = std::string(status_name(block.status[lvl]));
            row["effect"] = number(base + effects[lvl]);
            row["relative_effect"] = number(effects[lvl]);
            levels.push_back(std::move(row));
        }
        fj["levels"] = std::move(levels);
        ordered_json inc = ordered_json::array();
        for (const double d : design.increments(fit.beta, f)) inc.push_back(d);
        fj["increments"] = std::move(inc);
        factors.push_back(std::move(fj));
    }
    r["factors"] = std::move(factors);

    ordered_json active = ordered_json::array();
    for (const auto j : fit.active.members()) active.push_back(design.labels()[static_cast<std::size_t>(j)].display());
    r["active_set"] = std::move(active);
    r["kkt"] = kkt_json(fit.kkt);
    r["trace"] = trace_json(fit, design);
    r["warnings"] = design.warnings();
    return r;
}

void add_test_section(ordered_json& report, const DesignSystem& design, const TestConfig& test,
                      const LrtResult& result) {
    ordered_json t;
    ordered_json null;
    null["factor"] = test.null.factor ? ordered_json(*test.null.factor) : ordered_json(nullptr);
    ordered_json cols = ordered_json::array();
    for (const auto j : result.tested) cols.push_back(design.labels()[static_cast<std::size_t>(j)].display());
    null["columns"] = std::move(cols);
    t["null"] = std::move(null);
    t["method"] = std::string(to_string(result.method));
    t["stat"] = result.stat;
    t["p_value"] = result.p_value;
    t["df"] = result.df;
    t["n_sim"] = result.n_sim;
    t["seed"] = result.seed;
    t["sigma2"] = test.sigma2 ? ordered_json(*test.sigma2) : ordered_json(nullptr);
    if (result.weights) t["weights"] = *result.weights;
    else t["weights"] = nullptr;
    t["bootstrap_failures"] = result.bootstrap_failures;
    t["loglik_null"] = result.null_fit.loglik;
    t["loglik_alt"] = result.alt_fit.loglik;
    t["null_status"] = std::string(to_string(result.null_fit.status));
    t["null_coefficients"] = coefficient_table(design, result.null_fit);
    report["test"] = std::move(t);
}

namespace {

std::string fmt(const ordered_json& v, int digits = 6) {
    if (v.is_null()) return "NA";
    if (v.is_number_float()) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.*g", digits, v.get<double>());
        return buf;
    }
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

} // namespace

std::string render_text(const ordered_json& r) {
    std::ostringstream out;
    out << "family:   " << fmt(r["family"]);
    if (!r["tie_rule"].is_null()) out << " (ties: " << fmt(r["tie_rule"]) << ")";
    out << "\nn = " << fmt(r["n"]) << ", p = " << fmt(r["p"]) << "\n";
    out << "status:   " << fmt(r["status"]) << "\n";
    out << "loglik:   " << fmt(r["loglik"], 10) << "\n\n";

    out << "coefficients\n";
    char line[256];
    std::snprintf(line, sizeof line, "  %-24s %-10s %14s  %s\n", "label", "kind", "estimate", "");
    out << line;
    for (const auto& c : r["coefficients"]) {
        std::snprintf(line, sizeof line, "  %-24s %-10s %14s  %s\n", fmt(c["label"]).c_str(), fmt(c["kind"]).c_str(),
                      fmt(c["estimate"]).c_str(), c["active"].get<bool>() ? "(at bound)" : "");
        out << line;
    }
    for (const auto& f : r["factors"]) {
        out << "\nfactor " << fmt(f["name"]) << " (" << fmt(f["direction"]) << ")\n";
        for (const auto& l : f["levels"]) {
            std::snprintf(line, sizeof line, "  %-16s %14s  %s\n", fmt(l["level"]).c_str(), fmt(l["effect"]).c_str(),
                          fmt(l["status"]) == "observed" ? "" : fmt(l["status"]).c_str());
            out << line;
        }
    }
    const auto& kkt = r["kkt"];
    out << "\nKKT check: " << (kkt["pass"].get<bool>() ? "pass" : "FAIL") << " (max free |gradient| "
        << fmt(kkt["max_free_gradient"]) << ", max gradient at bound " << fmt(kkt["max_bound_gradient"])
        << ", tolerance " << fmt(kkt["tolerance"]) << ")\n";
    const auto& tr = r["trace"];
    out << "active set iterations: " << fmt(tr["outer_iterations"]) << " (" << fmt(tr["adds"]) << " adds, "
        << fmt(tr["drops"]) << " drops)\n";
    if (!r["active_set"].empty()) {
        out << "active constraints:";
        for (const auto& a : r["active_set"]) out << ' ' << fmt(a);
        out << '\n';
    }
    for (const auto& w : r["warnings"]) out << "warning: " << fmt(w) << '\n';
    if (r.contains("test")) {
        const auto& t = r["test"];
        out << "\nlikelihood ratio test (" << fmt(t["method"]) << ")\n";
        out << "  null fixes:";
        for (const auto& c : t["null"]["columns"]) out << ' ' << fmt(c);
        out << "\n  statistic " << fmt(t["stat"]) << ", p-value " << fmt(t["p_value"]) << ", n_sim "
            << fmt(t["n_sim"]) << ", seed " << fmt(t["seed"]) << '\n';
        if (!t["weights"].is_null()) {
            out << "  mixture weights:";
            for (const auto& w : t["weights"]) out << ' ' << fmt(w, 4);
            out << '\n';
        }
    }
    return out.str();
}

} // namespace monoglm::cli
