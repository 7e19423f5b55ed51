#include "monoglm/inference.hpp"

#include "monoglm/error.hpp"
#include "monoglm/rng.hpp"

#include <boost/math/special_functions/gamma.hpp>

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

namespace monoglm {

namespace {

// Runs fn(begin, end) over [0, count) split into contiguous ranges, one per worker.
template <class Fn>
void parallel_ranges(std::size_t count, unsigned threads, Fn&& fn) {
    const std::size_t workers = std::max<std::size_t>(1, std::min<std::size_t>(threads, count));
    if (workers == 1) {
        fn(std::size_t{0}, count);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        const std::size_t begin = count * w / workers;
        const std::size_t end = count * (w + 1) / workers;
        pool.emplace_back([&fn, &errors, w, begin, end] {
            try {
                fn(begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto& t : pool) t.join();
    for (const auto& e : errors)
        if (e) std::rethrow_exception(e);
}

Eigen::VectorXd expand(const Eigen::VectorXd& reduced, std::span<const Eigen::Index> removed, Eigen::Index p) {
    Eigen::VectorXd full = Eigen::VectorXd::Zero(p);
    Eigen::Index k = 0;
    for (Eigen::Index j = 0; j < p; ++j) {
        if (std::find(removed.begin(), removed.end(), j) != removed.end()) continue;
        full[j] = reduced[k++];
    }
    return full;
}

struct FitPair {
    FitResult null_fit;
    FitResult alt_fit;
};

FitPair fit_both(const Family& family, const DesignSystem& design, const DesignSystem& null_design,
                 const Response& response, std::span<const Eigen::Index> tested, const SolverOptions& options) {
    FitPair out{fit(family, null_design, response, options), fit(family, design, response, options)};
    std::vector<Eigen::Index> full_index;
    for (Eigen::Index j = 0; j < design.cols(); ++j)
        if (std::find(tested.begin(), tested.end(), j) == tested.end()) full_index.push_back(j);
    auto& nf = out.null_fit;
    nf.beta = expand(nf.beta, tested, design.cols());
    std::vector<Eigen::Index> active;
    for (const auto j : nf.active.members()) active.push_back(full_index[static_cast<std::size_t>(j)]);
    nf.active = ActiveSet(std::move(active));
    for (auto& e : nf.kkt.entries) e.index = full_index[static_cast<std::size_t>(e.index)];
    for (auto& t : nf.trace)
        if (t.coordinate) t.coordinate = full_index[static_cast<std::size_t>(*t.coordinate)];
    return out;
}

constexpr std::size_t chibar_chunk = 256;

} // namespace

NullSpec NullSpec::no_effect(std::string factor_name) {
    NullSpec n;
    n.factor = std::move(factor_name);
    return n;
}

NullSpec NullSpec::zero_columns(std::vector<Eigen::Index> columns) {
    NullSpec n;
    n.columns = std::move(columns);
    return n;
}

std::string_view to_string(TestMethod method) {
    return method == TestMethod::chibar_weights ? "chibar_weights" : "parametric_bootstrap";
}

TestMethod parse_test_method(std::string_view name) {
    if (name == "chibar_weights" || name == "chibar") return TestMethod::chibar_weights;
    if (name == "parametric_bootstrap" || name == "bootstrap") return TestMethod::parametric_bootstrap;
    throw InputError("unknown test method '" + std::string(name) + "' (expected chibar or bootstrap)");
}

std::vector<Eigen::Index> resolve_null(const DesignSystem& design, const NullSpec& null) {
    std::vector<Eigen::Index> columns;
    if (null.factor) {
        const auto f = design.factor_index(*null.factor);
        if (!f) throw InputError("null hypothesis names unknown factor '" + *null.factor + "'");
        columns = design.factor_columns(*f);
    }
    columns.insert(columns.end(), null.columns.begin(), null.columns.end());
    std::sort(columns.begin(), columns.end());
    columns.erase(std::unique(columns.begin(), columns.end()), columns.end());
    if (columns.empty()) throw InputError("null hypothesis fixes no coefficients");
    for (const auto j : columns) {
        if (j < 0 || j >= design.cols() || !design.is_constrained(j)) {
            throw InputError("null hypothesis is not nested in the constrained model: column " + std::to_string(j) +
                             " is not an order-constrained increment");
        }
    }
    return columns;
}

double lrt_statistic(const Family& family, Eigen::Index n, double loglik_null, double loglik_alt,
                     std::optional<double> sigma2) {
    double stat = 0.0;
    if (family.kind == FamilyKind::gaussian) {
        const double rss_null = -2.0 * loglik_null;
        const double rss_alt = -2.0 * loglik_alt;
        if (sigma2) {
            stat = (rss_null - rss_alt) / *sigma2;
        } else if (rss_alt <= 0.0) {
            stat = rss_null <= 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
        } else {
            stat = static_cast<double>(n) * std::log(rss_null / rss_alt);
        }
    } else {
        stat = 2.0 * (loglik_alt - loglik_null);
    }
    return std::max(stat, 0.0);
}

std::vector<double> chibar_weights(const Eigen::MatrixXd& cov, std::size_t n_sim, std::uint64_t seed,
                                   unsigned threads) {
    if (n_sim < 1000) throw InputError("chi-bar-square weights need at least 1000 simulations");
    const auto m = cov.rows();
    if (m == 0 || cov.cols() != m) throw InputError("covariance must be a nonempty square matrix");
    if (!cov.isApprox(cov.transpose(), 1e-10)) throw InputError("covariance is not symmetric");
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) throw InputError("covariance is not positive definite");

    // With cov = L L^T and Z = L e, projecting Z onto the orthant in the cov^{-1} metric is
    // nonnegative least squares of e on L^{-1}.
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::MatrixXd whiten = lower.triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
    std::vector<Eigen::Index> all(static_cast<std::size_t>(m));
    for (Eigen::Index j = 0; j < m; ++j) all[static_cast<std::size_t>(j)] = j;
    const auto design = DesignSystem::from_matrix(whiten, all);
    const auto family = Family::gaussian();

    const std::size_t chunks = (n_sim + chibar_chunk - 1) / chibar_chunk;
    std::vector<std::vector<std::size_t>> counts(chunks, std::vector<std::size_t>(static_cast<std::size_t>(m) + 1, 0));
    parallel_ranges(chunks, threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t c = begin; c < end; ++c) {
            auto rng = make_rng(seed, c);
            std::normal_distribution<double> normal;
            const std::size_t draws = std::min(chibar_chunk, n_sim - c * chibar_chunk);
            for (std::size_t s = 0; s < draws; ++s) {
                Eigen::VectorXd e(m);
                for (Eigen::Index j = 0; j < m; ++j) e[j] = normal(rng);
                const auto projected = fit(family, design, Response::outcome(std::move(e)));
                if (!projected.converged()) throw NumericalError("orthant projection did not converge");
                std::size_t positive = 0;
                for (Eigen::Index j = 0; j < m; ++j)
                    if (!projected.active.contains(j) && projected.beta[j] > 0.0) ++positive;
                ++counts[c][positive];
            }
        }
    });

    std::vector<double> weights(static_cast<std::size_t>(m) + 1, 0.0);
    for (const auto& chunk : counts)
        for (std::size_t k = 0; k < chunk.size(); ++k) weights[k] += static_cast<double>(chunk[k]);
    for (auto& w : weights) w /= static_cast<double>(n_sim);
    return weights;
}

double chibar_pvalue(std::span<const double> weights, double stat) {
    if (!(stat > 0.0)) return 1.0;
    if (std::isinf(stat)) return 0.0;
    double p = 0.0;
    for (std::size_t k = 1; k < weights.size(); ++k) {
        p += weights[k] * boost::math::gamma_q(0.5 * static_cast<double>(k), 0.5 * stat);
    }
    return std::clamp(p, 0.0, 1.0);
}

double bootstrap_pvalue(std::span<const double> replicate_stats, double observed) {
    const double tol = 1e-12 * std::max(1.0, std::abs(observed));
    const auto exceed = std::count_if(replicate_stats.begin(), replicate_stats.end(),
                                      [&](double s) { return s >= observed - tol; });
    return (1.0 + static_cast<double>(exceed)) / (static_cast<double>(replicate_stats.size()) + 1.0);
}

BootstrapSample parametric_bootstrap(const Family& family, const DesignSystem& design, const Response& response,
                                     std::span<const Eigen::Index> tested, const FitResult& null_fit,
                                     const LrtOptions& options) {
    if (options.n_sim == 0) throw InputError("parametric bootstrap needs at least one replicate");
    if (!null_fit.converged()) throw InputError("parametric bootstrap needs a converged null fit");
    const auto p = design.cols();
    const auto n = design.rows();
    const Eigen::VectorXd beta0 =
        null_fit.beta.size() == p ? null_fit.beta : expand(null_fit.beta, tested, p);
    const Eigen::VectorXd eta = design.linear_predictor(beta0);
    const auto null_design = design.without_columns(tested);

    double sigma = 1.0;
    if (family.kind == FamilyKind::gaussian) {
        if (options.sigma2) {
            sigma = std::sqrt(*options.sigma2);
        } else {
            const double rss = (response.y - eta).squaredNorm();
            const auto dof = n - null_design.cols();
            sigma = std::sqrt(rss / static_cast<double>(dof > 0 ? dof : n));
        }
    }
    double censored = 0.0;
    if (family.kind == FamilyKind::cox) censored = 1.0 - response.event.mean();

    std::vector<double> stats(options.n_sim, 0.0);
    std::vector<char> ok(options.n_sim, 0);
    parallel_ranges(options.n_sim, options.threads, [&](std::size_t begin, std::size_t end) {
        for (std::size_t b = begin; b < end; ++b) {
            auto rng = make_rng(options.seed, b);
            Response replicate;
            switch (family.kind) {
            case FamilyKind::gaussian: {
                std::normal_distribution<double> normal(0.0, sigma);
                Eigen::VectorXd y(n);
                for (Eigen::Index i = 0; i < n; ++i) y[i] = eta[i] + normal(rng);
                replicate = Response::outcome(std::move(y));
                break;
            }
            case FamilyKind::logistic: {
                std::uniform_real_distribution<double> unif;
                Eigen::VectorXd y(n);
                for (Eigen::Index i = 0; i < n; ++i) y[i] = unif(rng) < logistic(eta[i]) ? 1.0 : 0.0;
                replicate = Response::outcome(std::move(y));
                break;
            }
            case FamilyKind::cox: {
                // Exponential baseline; independent exponential censoring matching the observed
                // censored fraction in expectation.
                Eigen::VectorXd time(n), event(n);
                for (Eigen::Index i = 0; i < n; ++i) {
                    const double rate = std::exp(eta[i]);
                    const double t = std::exponential_distribution<double>(rate)(rng);
                    double c = std::numeric_limits<double>::infinity();
                    if (censored > 0.0) c = std::exponential_distribution<double>(rate * censored / (1.0 - censored))(rng);
                    time[i] = std::min(t, c);
                    event[i] = t <= c ? 1.0 : 0.0;
                }
                if (event.sum() == 0.0) continue;
                replicate = Response::survival(std::move(time), std::move(event));
                break;
            }
            }
            try {
                const auto fits = fit_both(family, design, null_design, replicate, tested, options.solver);
                if (!fits.null_fit.converged() || !fits.alt_fit.converged()) continue;
                stats[b] = lrt_statistic(family, n, fits.null_fit.loglik, fits.alt_fit.loglik, options.sigma2);
                ok[b] = 1;
            } catch (const Error&) {
                continue;
            }
        }
    });

    BootstrapSample sample;
    for (std::size_t b = 0; b < options.n_sim; ++b) {
        if (ok[b]) sample.stats.push_back(stats[b]);
        else ++sample.failures;
    }
    if (static_cast<double>(sample.failures) > 0.05 * static_cast<double>(options.n_sim)) {
        throw Error("parametric bootstrap: " + std::to_string(sample.failures) + " of " +
                    std::to_string(options.n_sim) + " replicates failed to converge");
    }
    return sample;
}

LrtResult lrt(const Family& family, const DesignSystem& design, const Response& response, const NullSpec& null,
              const LrtOptions& options) {
    if (options.sigma2 && family.kind != FamilyKind::gaussian)
        throw InputError("a known variance only applies to the gaussian family");
    if (options.sigma2 && !(*options.sigma2 > 0.0)) throw InputError("known variance must be positive");

    LrtResult result;
    result.method = options.method;
    result.n_sim = options.n_sim;
    result.seed = options.seed;
    result.tested = resolve_null(design, null);
    result.df = result.tested.size();

    const auto null_design = design.without_columns(result.tested);
    auto fits = fit_both(family, design, null_design, response, result.tested, options.solver);
    if (!fits.null_fit.converged() || !fits.alt_fit.converged()) {
        throw Error("likelihood ratio test needs converged fits (null: " +
                    std::string(to_string(fits.null_fit.status)) +
                    ", alternative: " + std::string(to_string(fits.alt_fit.status)) + ")");
    }
    result.stat = lrt_statistic(family, design.rows(), fits.null_fit.loglik, fits.alt_fit.loglik, options.sigma2);

    if (options.method == TestMethod::chibar_weights) {
        const Eigen::MatrixXd information =
            -evaluate(family, design.matrix(), response, fits.null_fit.beta, Derivatives::hessian).hessian;
        Eigen::LDLT<Eigen::MatrixXd> ldlt(information);
        if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
            throw NumericalError("information matrix at the null fit is not positive definite");
        const Eigen::MatrixXd inverse = ldlt.solve(Eigen::MatrixXd::Identity(design.cols(), design.cols()));
        const auto m = static_cast<Eigen::Index>(result.tested.size());
        Eigen::MatrixXd block(m, m);
        for (Eigen::Index a = 0; a < m; ++a)
            for (Eigen::Index b = 0; b < m; ++b)
                block(a, b) = inverse(result.tested[static_cast<std::size_t>(a)], result.tested[static_cast<std::size_t>(b)]);
        block = 0.5 * (block + block.transpose()).eval();
        result.weights = chibar_weights(block, options.n_sim, options.seed, options.threads);
        result.p_value = chibar_pvalue(*result.weights, result.stat);
    } else {
        auto sample = parametric_bootstrap(family, design, response, result.tested, fits.null_fit, options);
        result.bootstrap_failures = sample.failures;
        result.null_sample = std::move(sample.stats);
        result.p_value = bootstrap_pvalue(result.null_sample, result.stat);
    }
    result.null_fit = std::move(fits.null_fit);
    result.alt_fit = std::move(fits.alt_fit);
    return result;
}

} // namespace monoglm
