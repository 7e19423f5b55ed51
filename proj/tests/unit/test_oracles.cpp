#include "monoglm/diagnostics/oracles.hpp"
#include "monoglm/diagnostics/random_problems.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace monoglm;
using namespace monoglm::diagnostics;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
    Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
    Eigen::Index i = 0;
    for (double x : v) out[i++] = x;
    return out;
}

DesignSystem three_level_design() {
    Eigen::MatrixXd x(3, 3);
    x << 1, 0, 0, 1, 1, 0, 1, 1, 1;
    return DesignSystem::from_matrix(x, {1, 2});
}

} // namespace

TEST(Pava, PoolsAdjacentViolators) {
    const std::vector<double> v{3, 1, 2}, w{1, 1, 1};
    EXPECT_EQ(pava(v, w), vec({2, 2, 2}));
}

TEST(Pava, IdentityOnMonotoneInput) {
    const std::vector<double> v{-1, 0, 0, 4}, w{1, 2, 3, 4};
    EXPECT_EQ(pava(v, w), vec({-1, 0, 0, 4}));
}

TEST(Pava, WeightedMean) {
    const std::vector<double> v{2, 1}, w{1, 3};
    EXPECT_EQ(pava(v, w), vec({1.25, 1.25}));
}

TEST(Pava, RejectsBadWeights) {
    const std::vector<double> v{1, 2}, w{1, 0};
    EXPECT_THROW(pava(v, w), InputError);
    EXPECT_THROW(pava(std::vector<double>{}, std::vector<double>{}), InputError);
}

TEST(Pava, MonotoneAndBlockMeanPreserving) {
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> small(1, 4);
    for (int rep = 0; rep < 200; ++rep) {
        const int k = 1 + rep % 12;
        std::vector<double> v(static_cast<std::size_t>(k)), w(static_cast<std::size_t>(k));
        for (int i = 0; i < k; ++i) {
            v[static_cast<std::size_t>(i)] = std::round(normal(rng) * 4.0);  // ties on purpose
            w[static_cast<std::size_t>(i)] = small(rng);
        }
        const auto fitted = pava(v, w);
        for (int i = 1; i < k; ++i) EXPECT_LE(fitted[i - 1], fitted[i]);
        // each maximal run of equal fitted values has the weighted mean of its inputs
        int start = 0;
        for (int i = 1; i <= k; ++i) {
            if (i == k || fitted[i] != fitted[start]) {
                double sw = 0.0, swv = 0.0;
                for (int j = start; j < i; ++j) {
                    sw += w[static_cast<std::size_t>(j)];
                    swv += w[static_cast<std::size_t>(j)] * v[static_cast<std::size_t>(j)];
                }
                EXPECT_NEAR(fitted[start], swv / sw, 1e-12);
                start = i;
            }
        }
    }
}

TEST(BruteForce, ToyExampleHandEnumeration) {
    const auto report = brute_force(Family::gaussian(), three_level_design(), Response::outcome(vec({3, 1, 2})));
    EXPECT_EQ(report.per_subset.size(), 4u);
    EXPECT_NEAR(report.best_loglik, -1.0, 1e-12);
    EXPECT_EQ(report.best_active, (std::vector<Eigen::Index>{1, 2}));
    double best = -1e300;
    for (const auto& e : report.per_subset)
        if (e.feasible) best = std::max(best, e.loglik);
    EXPECT_EQ(best, report.best_loglik);
}

TEST(BruteForce, PerfectMonotoneFit) {
    const auto report = brute_force(Family::gaussian(), three_level_design(), Response::outcome(vec({1, 2, 3})));
    EXPECT_TRUE(report.best_active.empty());
    EXPECT_NEAR(report.best_loglik, 0.0, 1e-12);
}

TEST(BruteForce, NoConstraintsSingleEntry) {
    Eigen::MatrixXd x(3, 2);
    x << 1, 0, 1, 1, 1, 3;
    const auto d = DesignSystem::from_matrix(x, {});
    const auto report = brute_force(Family::gaussian(), d, Response::outcome(vec({1, 0, 2})));
    ASSERT_EQ(report.per_subset.size(), 1u);
    EXPECT_TRUE(report.per_subset[0].feasible);
}

TEST(BruteForce, EnumerationGuard) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Identity(18, 17);
    std::vector<Eigen::Index> all(17);
    for (int j = 0; j < 17; ++j) all[static_cast<std::size_t>(j)] = j;
    const auto d = DesignSystem::from_matrix(x, all);
    EXPECT_THROW(brute_force(Family::gaussian(), d, Response::outcome(Eigen::VectorXd::Zero(18))), InputError);
}

TEST(Irls, InterceptOnlyIsLogitOfMean) {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Ones(8, 1);
    const auto beta = irls(x, vec({1, 0, 0, 0, 1, 0, 0, 0}));
    EXPECT_NEAR(beta[0], std::log(1.0 / 3.0), 1e-12);
}

TEST(Irls, SeparatedDataReported) {
    Eigen::MatrixXd x(4, 2);
    x << 1, -2, 1, -1, 1, 1, 1, 2;
    EXPECT_THROW(irls(x, vec({0, 0, 1, 1})), SeparationError);
}

TEST(Irls, AgreesWithUnconstrainedFit) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto p = random_problem(FamilyKind::logistic, seed);
        const auto unconstrained = DesignSystem::from_matrix(p.design.matrix(), {});
        const auto result = fit(p.family, unconstrained, p.response);
        ASSERT_TRUE(result.converged());
        EXPECT_LT((result.beta - irls(p.design.matrix(), p.response.y)).lpNorm<Eigen::Infinity>(), 1e-8);
    }
}

TEST(RandomProblems, DeterministicInSeed) {
    for (auto kind : {FamilyKind::gaussian, FamilyKind::logistic, FamilyKind::cox}) {
        const auto a = random_problem(kind, 42);
        const auto b = random_problem(kind, 42);
        EXPECT_EQ(a.design.matrix(), b.design.matrix());
        EXPECT_LE(a.design.cols(), 10);
        EXPECT_LE(a.design.rows(), 50);
        EXPECT_LE(a.design.constrained().size(), 8u);
    }
}
