#include "monoglm_cli/selfcheck.hpp"

#include "monoglm/diagnostics/finite_difference.hpp"
#include "monoglm/diagnostics/oracles.hpp"
#include "monoglm/diagnostics/random_problems.hpp"
#include "monoglm/error.hpp"
#include "monoglm/inference.hpp"
#include "monoglm/rng.hpp"
#include "monoglm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace monoglm::cli {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

constexpr double oracle_tolerance = 1e-7;
constexpr double derivative_tolerance = 1e-5;
constexpr double monotone_slack = 1e-10;
constexpr double feasibility_slack = 1e-12;
constexpr std::size_t max_reported_failures = 5;

constexpr FamilyKind all_families[] = {FamilyKind::gaussian, FamilyKind::logistic, FamilyKind::cox};

Family family_of(FamilyKind kind) {
    switch (kind) {
    case FamilyKind::gaussian: return Family::gaussian();
    case FamilyKind::logistic: return Family::logistic();
    case FamilyKind::cox: return Family::cox();
    }
    return Family::gaussian();
}

std::uint64_t case_seed(std::uint64_t base, std::uint64_t suite, std::uint64_t family, std::uint64_t i) {
    auto rng = make_rng(base, (suite << 40) | (family << 32) | i);
    return rng();
}

ordered_json vector_json(const Eigen::VectorXd& v) {
    ordered_json out = ordered_json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
    return out;
}

Eigen::VectorXd vector_from(const json& v, const char* what) {
    if (!v.is_array()) throw InputError(std::string("replay case: '") + what + "' must be a list");
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    for (std::size_t i = 0; i < v.size(); ++i) out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
    return out;
}

ordered_json serialize_problem(std::string_view suite, const Family& family, const DesignSystem& design,
                               const Response& response, std::uint64_t seed) {
    ordered_json c;
    c["suite"] = std::string(suite);
    c["family"] = std::string(to_string(family.kind));
    c["seed"] = seed;
    ordered_json rows = ordered_json::array();
    for (Eigen::Index i = 0; i < design.rows(); ++i) rows.push_back(vector_json(design.matrix().row(i).transpose()));
    c["matrix"] = std::move(rows);
    c["constrained"] = design.constrained();
    if (family.kind == FamilyKind::cox) {
        c["time"] = vector_json(response.time);
        c["event"] = vector_json(response.event);
    } else {
        c["y"] = vector_json(response.y);
    }
    return c;
}

ordered_json oracle_check(const Family& family, const DesignSystem& design, const Response& response,
                          std::uint64_t seed, double kkt_tolerance) {
    const auto result = fit(family, design, response);
    const auto oracle = diagnostics::brute_force(family, design, response);
    ordered_json e;
    e["suite"] = "oracle";
    e["family"] = std::string(to_string(family.kind));
    e["seed"] = seed;
    e["n"] = design.rows();
    e["p"] = design.cols();
    e["m"] = design.constrained().size();
    e["status"] = std::string(to_string(result.status));
    e["loglik_fit"] = result.loglik;
    e["loglik_oracle"] = oracle.best_loglik;
    const double diff = std::abs(result.loglik - oracle.best_loglik);
    e["abs_diff"] = diff;

    bool kkt_pass = false;
    double max_free = std::numeric_limits<double>::quiet_NaN(), max_bound = max_free;
    double min_constrained = std::numeric_limits<double>::infinity();
    for (const auto j : design.constrained()) min_constrained = std::min(min_constrained, result.beta[j]);
    const bool feasible = min_constrained >= -feasibility_slack;
    if (feasible) {
        const auto kkt = verify_kkt(family, design, response, result.beta, kkt_tolerance);
        kkt_pass = kkt.pass;
        max_free = kkt.max_free_gradient;
        max_bound = kkt.max_bound_gradient;
    }
    bool monotone = true;
    for (std::size_t t = 1; t < result.trace.size(); ++t)
        if (result.trace[t].objective < result.trace[t - 1].objective - monotone_slack) monotone = false;
    e["kkt_pass"] = kkt_pass;
    e["max_free_gradient"] = std::isfinite(max_free) ? ordered_json(max_free) : ordered_json(nullptr);
    e["max_bound_gradient"] = std::isfinite(max_bound) ? ordered_json(max_bound) : ordered_json(nullptr);
    e["objective_monotone"] = monotone;
    e["feasible"] = feasible;
    e["pass"] = result.converged() && diff <= oracle_tolerance && kkt_pass && monotone && feasible;
    return e;
}

ordered_json gradient_check(const Family& family, const DesignSystem& design, const Response& response,
                            const Eigen::VectorXd& beta, std::uint64_t seed) {
    const auto& x = design.matrix();
    const auto f = [&](const Eigen::VectorXd& b) { return evaluate(family, x, response, b, Derivatives::value).loglik; };
    const auto g = [&](const Eigen::VectorXd& b) {
        return evaluate(family, x, response, b, Derivatives::gradient).gradient;
    };
    const auto obj = evaluate(family, x, response, beta);
    const double grad_err = diagnostics::relative_error(obj.gradient, diagnostics::fd_gradient(f, beta));
    const double hess_err = diagnostics::relative_error(obj.hessian, diagnostics::fd_jacobian(g, beta));
    ordered_json e;
    e["suite"] = "gradient";
    e["family"] = std::string(to_string(family.kind));
    e["seed"] = seed;
    e["n"] = design.rows();
    e["p"] = design.cols();
    e["gradient_rel_error"] = grad_err;
    e["hessian_rel_error"] = hess_err;
    e["pass"] = grad_err < derivative_tolerance && hess_err < derivative_tolerance;
    return e;
}

// Gaussian, n = 30, one two-level factor, known unit variance, true null.
ordered_json calibration_check(std::uint64_t seed, std::size_t replicates) {
    constexpr Eigen::Index n = 30;
    constexpr double nominal = 0.05;
    Eigen::MatrixXd x(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        x(i, 0) = 1.0;
        x(i, 1) = i < n / 2 ? 0.0 : 1.0;
    }
    const auto design = DesignSystem::from_matrix(x, {1});
    const auto family = Family::gaussian();
    LrtOptions options;
    options.n_sim = 1000;
    options.sigma2 = 1.0;

    std::size_t rejections = 0;
    for (std::size_t r = 0; r < replicates; ++r) {
        auto rng = make_rng(seed, r);
        std::normal_distribution<double> normal;
        Eigen::VectorXd y(n);
        for (Eigen::Index i = 0; i < n; ++i) y[i] = 1.0 + normal(rng);
        options.seed = rng();
        const auto result = lrt(family, design, Response::outcome(y), NullSpec::zero_columns({1}), options);
        if (result.p_value <= nominal) ++rejections;
    }
    const double rate = replicates ? static_cast<double>(rejections) / static_cast<double>(replicates) : 0.0;
    const double se = std::sqrt(nominal * (1.0 - nominal) / static_cast<double>(std::max<std::size_t>(replicates, 1)));
    ordered_json e;
    e["suite"] = "calibration";
    e["seed"] = seed;
    e["replicates"] = replicates;
    e["n"] = n;
    e["nominal"] = nominal;
    e["rejections"] = rejections;
    e["rate"] = rate;
    e["lower"] = std::max(0.0, nominal - 4.0 * se);
    e["upper"] = nominal + 4.0 * se;
    e["pass"] = rate >= nominal - 4.0 * se && rate <= nominal + 4.0 * se;
    return e;
}

struct SuiteTally {
    std::string name;
    std::size_t cases = 0;
    std::size_t failures = 0;
    double worst = 0.0;

    ordered_json to_json() const {
        ordered_json s;
        s["name"] = name;
        s["cases"] = cases;
        s["failures"] = failures;
        s["worst"] = worst;
        return s;
    }
};

void record_failure(SelfcheckResult& out, ordered_json c, ordered_json diagnostics) {
    out.pass = false;
    if (out.failures.size() >= max_reported_failures) return;
    ordered_json f;
    f["case"] = std::move(c);
    f["diagnostics"] = std::move(diagnostics);
    out.failures.push_back(std::move(f));
}

Eigen::VectorXd random_beta(std::uint64_t seed, Eigen::Index p) {
    auto rng = make_rng(seed, 1);
    std::normal_distribution<double> normal(0.0, 0.3);
    Eigen::VectorXd beta(p);
    for (auto& b : beta) b = normal(rng);
    return beta;
}

} // namespace

SelfcheckResult run_selfcheck(const SelfcheckOptions& options) {
    SelfcheckResult out;
    ordered_json suites = ordered_json::array();
    const std::size_t calibration = options.calibration.value_or(8 * options.size);

    if (options.size > 0) {
        SuiteTally oracle{"oracle"}, gradient{"gradient"};
        for (std::uint64_t fi = 0; fi < 3; ++fi) {
            const auto kind = all_families[fi];
            const auto family = family_of(kind);
            for (std::size_t i = 0; i < options.size; ++i) {
                const auto seed = case_seed(options.seed, 0, fi, i);
                const auto problem = diagnostics::random_problem(kind, seed);
                auto e = oracle_check(family, problem.design, problem.response, seed, options.kkt_tolerance);
                ++oracle.cases;
                oracle.worst = std::max(oracle.worst, e["abs_diff"].get<double>());
                if (!e["pass"].get<bool>()) {
                    ++oracle.failures;
                    auto c = serialize_problem("oracle", family, problem.design, problem.response, seed);
                    c["kkt_tolerance"] = options.kkt_tolerance;
                    record_failure(out, std::move(c), std::move(e));
                }
            }
            for (std::size_t i = 0; i < options.size; ++i) {
                const auto seed = case_seed(options.seed, 1, fi, i);
                const auto problem = diagnostics::random_problem(kind, seed);
                const auto beta = random_beta(seed, problem.design.cols());
                auto e = gradient_check(family, problem.design, problem.response, beta, seed);
                ++gradient.cases;
                gradient.worst = std::max({gradient.worst, e["gradient_rel_error"].get<double>(),
                                           e["hessian_rel_error"].get<double>()});
                if (!e["pass"].get<bool>()) {
                    ++gradient.failures;
                    auto c = serialize_problem("gradient", family, problem.design, problem.response, seed);
                    c["beta"] = vector_json(beta);
                    record_failure(out, std::move(c), std::move(e));
                }
            }
        }
        suites.push_back(oracle.to_json());
        suites.push_back(gradient.to_json());
    }
    if (calibration > 0) {
        const auto seed = case_seed(options.seed, 2, 0, 0);
        auto e = calibration_check(seed, calibration);
        SuiteTally tally{"calibration", 1, 0, e["rate"].get<double>()};
        if (!e["pass"].get<bool>()) {
            tally.failures = 1;
            ordered_json c;
            c["suite"] = "calibration";
            c["seed"] = seed;
            c["replicates"] = calibration;
            record_failure(out, std::move(c), std::move(e));
        }
        suites.push_back(tally.to_json());
    }

    out.report["seed"] = options.seed;
    out.report["size"] = options.size;
    out.report["calibration_replicates"] = calibration;
    out.report["suites"] = std::move(suites);
    out.report["pass"] = out.pass;
    out.report["failures"] = out.failures;
    return out;
}

ordered_json replay_case(const json& input) {
    const json& c = input.contains("case") ? input["case"] : input;
    if (!c.is_object() || !c.contains("suite")) throw InputError("replay case: missing 'suite'");
    const auto suite = c["suite"].get<std::string>();
    const auto seed = c.at("seed").get<std::uint64_t>();
    if (suite == "calibration") return calibration_check(seed, c.at("replicates").get<std::size_t>());
    if (suite != "oracle" && suite != "gradient") throw InputError("replay case: unknown suite '" + suite + "'");

    const auto family = family_of(parse_family(c.at("family").get<std::string>()));
    const auto& rows = c.at("matrix");
    if (!rows.is_array() || rows.empty()) throw InputError("replay case: 'matrix' must be a nonempty list of rows");
    const auto n = static_cast<Eigen::Index>(rows.size());
    const auto p = static_cast<Eigen::Index>(rows[0].size());
    Eigen::MatrixXd x(n, p);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto row = vector_from(rows[static_cast<std::size_t>(i)], "matrix");
        if (row.size() != p) throw InputError("replay case: ragged 'matrix'");
        x.row(i) = row.transpose();
    }
    const auto design = DesignSystem::from_matrix(std::move(x), c.at("constrained").get<std::vector<Eigen::Index>>());
    const auto response = family.kind == FamilyKind::cox
                              ? Response::survival(vector_from(c.at("time"), "time"), vector_from(c.at("event"), "event"))
                              : Response::outcome(vector_from(c.at("y"), "y"));
    validate(family, response);
    if (suite == "oracle") return oracle_check(family, design, response, seed, c.value("kkt_tolerance", 1e-7));
    return gradient_check(family, design, response, vector_from(c.at("beta"), "beta"), seed);
}

} // namespace monoglm::cli
