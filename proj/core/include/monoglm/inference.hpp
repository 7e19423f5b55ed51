#pragma once

#include "monoglm/design.hpp"
#include "monoglm/families.hpp"
#include "monoglm/solver.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace monoglm {

/// The restricted null: either every increment of a named factor is zero, or an explicit
/// subset of constrained columns is fixed at zero.
struct NullSpec {
    std::optional<std::string> factor;
    std::vector<Eigen::Index> columns;

    static NullSpec no_effect(std::string factor_name);
    static NullSpec zero_columns(std::vector<Eigen::Index> columns);
};

/// Columns fixed to zero under the null. Throws InputError if the null is not nested in the
/// constrained alternative.
std::vector<Eigen::Index> resolve_null(const DesignSystem& design, const NullSpec& null);

enum class TestMethod { chibar_weights, parametric_bootstrap };

std::string_view to_string(TestMethod method);
TestMethod parse_test_method(std::string_view name);

struct LrtOptions {
    TestMethod method = TestMethod::chibar_weights;
    std::size_t n_sim = 10000;
    std::uint64_t seed = 0;
    std::optional<double> sigma2;  // gaussian: known error variance
    unsigned threads = 1;
    SolverOptions solver;
};

struct LrtResult {
    double stat = 0.0;
    double p_value = 1.0;
    TestMethod method = TestMethod::chibar_weights;
    std::optional<std::vector<double>> weights;  // w_0..w_m
    std::size_t n_sim = 0;
    std::uint64_t seed = 0;
    std::size_t df = 0;                          // m, number of columns fixed under the null
    std::vector<Eigen::Index> tested;
    FitResult null_fit;                          // beta expanded to the full design
    FitResult alt_fit;
    std::size_t bootstrap_failures = 0;
    std::vector<double> null_sample;             // bootstrap replicate statistics
};

/// Likelihood ratio test of the null against the order-constrained alternative.
LrtResult lrt(const Family& family,
              const DesignSystem& design,
              const Response& response,
              const NullSpec& null,
              const LrtOptions& options);

/// Likelihood ratio statistic from two fits. Gaussian: n log(RSS0/RSS1), or
/// (RSS0 - RSS1)/sigma2 when the variance is known. Clipped at zero.
double lrt_statistic(const Family& family,
                     Eigen::Index n,
                     double loglik_null,
                     double loglik_alt,
                     std::optional<double> sigma2);

/**
 * Simulated chi-bar-square weights for the nonnegative orthant: w_k is the fraction of draws
 * Z ~ N(0, cov) whose projection onto the orthant in the cov^{-1} metric has exactly k positive
 * coordinates. Requires n_sim >= 1000 and a positive definite cov.
 */
std::vector<double> chibar_weights(const Eigen::MatrixXd& cov,
                                   std::size_t n_sim,
                                   std::uint64_t seed,
                                   unsigned threads = 1);

/// Sum_k w_k P(chi2_k >= stat); equals 1 at stat <= 0.
double chibar_pvalue(std::span<const double> weights, double stat);

struct BootstrapSample {
    std::vector<double> stats;
    std::size_t failures = 0;
};

/**
 * Simulates responses from the null fit, refits null and alternative on each replicate and
 * returns the replicate statistics. Throws InputError for n_sim == 0 and Error when more than
 * 5% of replicates fail to converge.
 */
BootstrapSample parametric_bootstrap(const Family& family,
                                     const DesignSystem& design,
                                     const Response& response,
                                     std::span<const Eigen::Index> tested,
                                     const FitResult& null_fit,
                                     const LrtOptions& options);

/// (1 + #{stat* >= stat}) / (n + 1).
double bootstrap_pvalue(std::span<const double> replicate_stats, double observed);

} // namespace monoglm
