#include "monoglm_cli/run.hpp"

#include "monoglm_cli/config.hpp"
#include "monoglm_cli/json_writer.hpp"
#include "monoglm_cli/report.hpp"
#include "monoglm_cli/selfcheck.hpp"

#include "monoglm/design.hpp"
#include "monoglm/error.hpp"
#include "monoglm/inference.hpp"
#include "monoglm/observation_table.hpp"
#include "monoglm/solver.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

namespace monoglm::cli {

namespace {

struct Overrides {
    std::string config;
    std::string data;
    std::string out;
    std::string format;
    std::optional<std::uint64_t> seed;
    std::optional<std::size_t> n_sim;
    std::optional<double> tol_kkt;
    std::optional<double> tol_feas;
    std::optional<std::size_t> max_iter;
};

void add_run_options(CLI::App& cmd, Overrides& o) {
    cmd.add_option("--config", o.config, "Model configuration (JSON)")->required();
    cmd.add_option("--data", o.data, "CSV data file; overrides the configuration");
    cmd.add_option("--out", o.out, "Report path; standard output when omitted");
    cmd.add_option("--format", o.format, "Report format")->check(CLI::IsMember({"json", "text"}));
    cmd.add_option("--seed", o.seed, "Seed for simulated null distributions");
    cmd.add_option("--nsim", o.n_sim, "Number of simulation draws");
    cmd.add_option("--tol-kkt", o.tol_kkt, "Gradient tolerance for releasing active constraints")
        ->check(CLI::PositiveNumber);
    cmd.add_option("--tol-feas", o.tol_feas, "Feasibility tolerance")->check(CLI::PositiveNumber);
    cmd.add_option("--max-iter", o.max_iter, "Maximum outer iterations");
}

RunConfig resolve_config(const Overrides& o, bool with_test) {
    auto cfg = load_config(o.config);
    if (!o.data.empty()) {
        cfg.data_path = o.data;
    } else if (!cfg.data_path.empty() && std::filesystem::path(cfg.data_path).is_relative()) {
        cfg.data_path = (std::filesystem::path(o.config).parent_path() / cfg.data_path).string();
    }
    if (cfg.data_path.empty()) throw InputError("no data file: set 'data' in the configuration or pass --data");
    if (!o.out.empty()) cfg.output_path = o.out;
    if (!o.format.empty()) cfg.format = parse_format(o.format);
    auto& solver = cfg.model.solver;
    if (o.tol_kkt) solver.kkt_tol = *o.tol_kkt;
    if (o.tol_feas) solver.feasibility_tol = *o.tol_feas;
    if (o.max_iter) solver.max_outer_iterations = *o.max_iter;
    if (with_test) {
        if (!cfg.test) throw InputError("configuration has no 'test' section");
        if (o.seed) cfg.test->seed = *o.seed;
        if (o.n_sim) cfg.test->n_sim = *o.n_sim;
        if (!cfg.test->seed) throw InputError("a seed is required for the test: set test.seed or pass --seed");
    } else {
        cfg.test.reset();
    }
    return cfg;
}

void emit(const std::string& text, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << text;
        return;
    }
    std::ofstream file(path, std::ios::binary);
    if (!file) throw InputError("cannot write report to '" + path + "'");
    file << text;
    if (!file) throw InputError("failed writing report to '" + path + "'");
}

NullSpec resolve_null_config(const NullConfig& null, const DesignSystem& design) {
    if (null.factor) return NullSpec::no_effect(*null.factor);
    std::vector<Eigen::Index> columns;
    for (const auto& name : null.columns) {
        const auto& labels = design.labels();
        const auto it = std::find_if(labels.begin(), labels.end(), [&](const auto& l) { return l.display() == name; });
        if (it == labels.end()) throw InputError("test.null: no design column labelled '" + name + "'");
        columns.push_back(static_cast<Eigen::Index>(it - labels.begin()));
    }
    return NullSpec::zero_columns(std::move(columns));
}

int run_model(const RunConfig& cfg, std::ostream& out) {
    const auto table = ObservationTable::read_csv(cfg.data_path);
    const auto design = assemble(cfg.model, table);
    const auto response = extract_response(cfg.model, table);
    validate(cfg.model.family, response);

    FitResult result;
    std::optional<LrtResult> test;
    if (cfg.test) {
        LrtOptions options;
        options.method = cfg.test->method;
        options.n_sim = cfg.test->n_sim;
        options.seed = *cfg.test->seed;
        options.sigma2 = cfg.test->sigma2;
        options.threads = cfg.test->threads;
        options.solver = cfg.model.solver;
        test = lrt(cfg.model.family, design, response, resolve_null_config(cfg.test->null, design), options);
        result = test->alt_fit;
    } else {
        result = fit(cfg.model.family, design, response, cfg.model.solver);
    }

    auto report = fit_report(cfg, design, result);
    if (test) add_test_section(report, design, *cfg.test, *test);
    emit(cfg.format == OutputFormat::json ? to_json_text(report) : render_text(report), cfg.output_path, out);
    return result.converged() ? exit_success : exit_not_converged;
}

struct SelfcheckArgs {
    std::size_t size = 50;
    std::optional<std::size_t> calibration;
    std::uint64_t seed = 1;
    std::optional<double> tol_kkt;
    std::string replay;
    std::string failure_out;
    std::string out;
    std::string format = "json";
};

std::string selfcheck_text(const nlohmann::ordered_json& report) {
    std::string text;
    if (report.contains("suites")) {
        for (const auto& s : report["suites"]) {
            text += s["name"].get<std::string>() + ": " + std::to_string(s["cases"].get<std::size_t>()) + " cases, " +
                    std::to_string(s["failures"].get<std::size_t>()) + " failures\n";
        }
        text += std::string("selfcheck ") + (report["pass"].get<bool>() ? "passed" : "FAILED") + "\n";
        for (const auto& f : report["failures"]) text += "failing case: " + f["diagnostics"].dump() + "\n";
    } else {
        text = report.dump(2) + "\n";
    }
    return text;
}

int run_selfcheck_command(const SelfcheckArgs& a, std::ostream& out) {
    const auto format = parse_format(a.format);
    nlohmann::ordered_json report;
    bool pass = true;
    if (!a.replay.empty()) {
        std::ifstream in(a.replay);
        if (!in) throw InputError("cannot open replay case '" + a.replay + "'");
        nlohmann::json c;
        try {
            c = nlohmann::json::parse(in);
        } catch (const nlohmann::json::exception& e) {
            throw InputError("replay case '" + a.replay + "' is not valid JSON: " + e.what());
        }
        report = replay_case(c);
        pass = report["pass"].get<bool>();
    } else {
        SelfcheckOptions options;
        options.size = a.size;
        options.calibration = a.calibration;
        options.seed = a.seed;
        if (a.tol_kkt) options.kkt_tolerance = *a.tol_kkt;
        auto result = run_selfcheck(options);
        report = std::move(result.report);
        pass = result.pass;
        if (!pass && !a.failure_out.empty()) emit(to_json_text(result.failures.front()["case"]), a.failure_out, out);
    }
    emit(format == OutputFormat::json ? to_json_text(report) : selfcheck_text(report), a.out, out);
    return pass ? exit_success : exit_selfcheck_failed;
}

} // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Monotone-constrained generalized linear models", "monoglm"};
    app.require_subcommand(1);

    Overrides fit_opts, test_opts;
    auto* fit_cmd = app.add_subcommand("fit", "Fit the constrained model and report the maximizer");
    add_run_options(*fit_cmd, fit_opts);
    auto* test_cmd = app.add_subcommand("test", "Fit and run the likelihood ratio test from the configuration");
    add_run_options(*test_cmd, test_opts);

    SelfcheckArgs sc;
    auto* sc_cmd = app.add_subcommand("selfcheck", "Randomized oracle, derivative and calibration checks");
    sc_cmd->add_option("--size", sc.size, "Random problems per family");
    sc_cmd->add_option("--calibration", sc.calibration, "Null replicates for the calibration suite (default 8*size)");
    sc_cmd->add_option("--seed", sc.seed, "Base seed");
    sc_cmd->add_option("--tol-kkt", sc.tol_kkt, "KKT tolerance")->check(CLI::PositiveNumber);
    sc_cmd->add_option("--replay", sc.replay, "Re-run a serialized failing case");
    sc_cmd->add_option("--failure-out", sc.failure_out, "Write the first failing case here");
    sc_cmd->add_option("--out", sc.out, "Report path; standard output when omitted");
    sc_cmd->add_option("--format", sc.format, "Report format")->check(CLI::IsMember({"json", "text"}));

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? exit_success : exit_input_error;
    }

    try {
        if (fit_cmd->parsed()) return run_model(resolve_config(fit_opts, false), out);
        if (test_cmd->parsed()) return run_model(resolve_config(test_opts, true), out);
        return run_selfcheck_command(sc, out);
    } catch (const InputError& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_not_converged;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_input_error;
    }
}

} // namespace monoglm::cli
