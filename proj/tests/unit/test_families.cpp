#include "fd_oracle.hpp"

#include "monoglm/error.hpp"
#include "monoglm/families.hpp"

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include <cmath>
#include <random>

using namespace monoglm;
using monoglm::testing::fd_gradient;
using monoglm::testing::fd_jacobian;
using monoglm::testing::relative_error;

namespace {

struct Instance {
    Eigen::MatrixXd x;
    Response response;
    Family family;
};

Instance random_instance(FamilyKind kind, std::mt19937_64& rng) {
    std::normal_distribution<double> normal;
    std::uniform_int_distribution<int> pick_n(4, 12), pick_p(1, 4);
    const int n = pick_n(rng);
    const int p = pick_p(rng);
    Instance inst;
    inst.x.resize(n, p);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < p; ++j) inst.x(i, j) = normal(rng);
    switch (kind) {
    case FamilyKind::gaussian: {
        Eigen::VectorXd y(n);
        for (auto& v : y) v = 2.0 * normal(rng);
        inst.response = Response::outcome(y);
        inst.family = Family::gaussian();
        break;
    }
    case FamilyKind::logistic: {
        Eigen::VectorXd y(n);
        for (auto& v : y) v = std::bernoulli_distribution(0.4)(rng) ? 1.0 : 0.0;
        inst.response = Response::outcome(y);
        inst.family = Family::logistic();
        break;
    }
    case FamilyKind::cox: {
        Eigen::VectorXd t(n), e(n);
        for (int i = 0; i < n; ++i) {
            t[i] = std::ceil(std::exponential_distribution<double>(1.0)(rng) * 4.0) / 4.0;  // induce ties
            e[i] = std::bernoulli_distribution(0.7)(rng) ? 1.0 : 0.0;
        }
        e[0] = 1.0;
        inst.response = Response::survival(t, e);
        inst.family = Family::cox();
        break;
    }
    }
    return inst;
}

Eigen::VectorXd random_beta(Eigen::Index p, std::mt19937_64& rng) {
    std::normal_distribution<double> normal(0.0, 0.5);
    Eigen::VectorXd b(p);
    for (auto& v : b) v = normal(rng);
    return b;
}

} // namespace

TEST(Gaussian, ZeroResidual) {
    Eigen::MatrixXd x(3, 2);
    x << 1, 0, 1, 1, 1, 2;
    Eigen::VectorXd beta(2);
    beta << 0.5, -1.0;
    const auto obj = eval_gaussian(x, x * beta, beta);
    EXPECT_DOUBLE_EQ(obj.loglik, 0.0);
    EXPECT_NEAR(obj.gradient.norm(), 0.0, 1e-15);
}

TEST(Gaussian, HalfResidualSumOfSquares) {
    Eigen::MatrixXd x(2, 1);
    x << 1, -1;
    const auto obj = eval_gaussian(x, Eigen::VectorXd::Zero(2), Eigen::VectorXd::Ones(1));
    EXPECT_DOUBLE_EQ(obj.loglik, -1.0);
    EXPECT_DOUBLE_EQ(obj.hessian(0, 0), -2.0);
}

TEST(Gaussian, DimensionMismatch) {
    EXPECT_THROW(eval_gaussian(Eigen::MatrixXd::Ones(2, 2), Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(2)),
                 std::invalid_argument);
}

TEST(Logistic, ZeroCoefficients) {
    Eigen::MatrixXd x(4, 2);
    x << 1, 0.5, 1, -1, 1, 2, 1, 0;
    Eigen::VectorXd y(4);
    y << 1, 0, 0, 1;
    const auto obj = eval_logistic(x, y, Eigen::VectorXd::Zero(2));
    EXPECT_NEAR(obj.loglik, 4.0 * std::log(0.5), 1e-15);
    const Eigen::VectorXd expected = x.transpose() * (y - Eigen::VectorXd::Constant(4, 0.5));
    EXPECT_NEAR((obj.gradient - expected).norm(), 0.0, 1e-15);
}

TEST(Logistic, RejectsNonBinary) {
    Eigen::VectorXd y(2);
    y << 0, 0.5;
    EXPECT_THROW(eval_logistic(Eigen::MatrixXd::Ones(2, 1), y, Eigen::VectorXd::Zero(1)), InputError);
}

TEST(Logistic, OverflowSafe) {
    Eigen::MatrixXd x(2, 1);
    x << 1, -1;
    Eigen::VectorXd y(2);
    y << 0, 0;
    const auto obj = eval_logistic(x, y, Eigen::VectorXd::Constant(1, 700.0));
    EXPECT_TRUE(std::isfinite(obj.loglik));
    EXPECT_NEAR(obj.loglik, -700.0, 1e-9);
    EXPECT_TRUE(obj.gradient.allFinite());
    EXPECT_TRUE(obj.hessian.allFinite());
    EXPECT_NEAR(log1p_exp(-700.0), 0.0, 1e-300);
    EXPECT_DOUBLE_EQ(logistic(-800.0), 0.0);
}

TEST(Cox, DistinctTimesAllEvents) {
    Eigen::MatrixXd x(3, 1);
    x << 0.3, -1.2, 2.0;
    Eigen::VectorXd t(3), e(3);
    t << 2, 1, 3;
    e << 1, 1, 1;
    const auto obj = eval_cox(x, t, e, Eigen::VectorXd::Zero(1));
    EXPECT_NEAR(obj.loglik, -std::log(6.0), 1e-15);
}

TEST(Cox, BreslowTiesShareRiskSet) {
    Eigen::MatrixXd x(3, 1);
    x << 0.3, -1.2, 2.0;
    Eigen::VectorXd t(3), e(3);
    t << 1, 1, 2;
    e << 1, 1, 1;
    const auto obj = eval_cox(x, t, e, Eigen::VectorXd::Zero(1));
    EXPECT_NEAR(obj.loglik, -2.0 * std::log(3.0), 1e-15);
}

TEST(Cox, RejectsNoEventsAndBadTimes) {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(2, 1);
    Eigen::VectorXd t(2), e(2);
    t << 1, 2;
    e << 0, 0;
    EXPECT_THROW(eval_cox(x, t, e, Eigen::VectorXd::Zero(1)), InputError);
    t << 0, 2;
    e << 1, 0;
    EXPECT_THROW(eval_cox(x, t, e, Eigen::VectorXd::Zero(1)), InputError);
}

class FamilyProperty : public ::testing::TestWithParam<FamilyKind> {};

TEST_P(FamilyProperty, DerivativesMatchFiniteDifferences) {
    std::mt19937_64 rng(1000 + static_cast<int>(GetParam()));
    for (int rep = 0; rep < 60; ++rep) {
        const auto inst = random_instance(GetParam(), rng);
        const auto beta = random_beta(inst.x.cols(), rng);
        const auto f = [&](const Eigen::VectorXd& b) { return loglik(inst.family, inst.x, inst.response, b); };
        const auto g = [&](const Eigen::VectorXd& b) {
            return evaluate(inst.family, inst.x, inst.response, b, Derivatives::gradient).gradient;
        };
        const auto obj = evaluate(inst.family, inst.x, inst.response, beta);
        EXPECT_LT(relative_error(obj.gradient, fd_gradient(f, beta)), 1e-6) << "rep " << rep;
        EXPECT_LT(relative_error(obj.hessian, fd_jacobian(g, beta)), 1e-5) << "rep " << rep;
        EXPECT_LE((obj.hessian - obj.hessian.transpose()).lpNorm<Eigen::Infinity>(),
                  1e-12 * std::max(1.0, obj.hessian.lpNorm<Eigen::Infinity>()));
        EXPECT_EQ(obj.gradient.size(), inst.x.cols());
    }
}

TEST_P(FamilyProperty, ConcaveAlongSegments) {
    std::mt19937_64 rng(2000 + static_cast<int>(GetParam()));
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int rep = 0; rep < 100; ++rep) {
        const auto inst = random_instance(GetParam(), rng);
        const auto b1 = random_beta(inst.x.cols(), rng);
        const auto b2 = random_beta(inst.x.cols(), rng);
        const double t = unif(rng);
        const auto f = [&](const Eigen::VectorXd& b) { return loglik(inst.family, inst.x, inst.response, b); };
        EXPECT_GE(f(t * b1 + (1.0 - t) * b2), t * f(b1) + (1.0 - t) * f(b2) - 1e-9);
    }
}

TEST_P(FamilyProperty, HessianNegativeSemidefinite) {
    std::mt19937_64 rng(3000 + static_cast<int>(GetParam()));
    for (int rep = 0; rep < 30; ++rep) {
        const auto inst = random_instance(GetParam(), rng);
        const auto obj = evaluate(inst.family, inst.x, inst.response, random_beta(inst.x.cols(), rng));
        const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(obj.hessian);
        EXPECT_LE(eig.eigenvalues().maxCoeff(), 1e-10 * std::max(1.0, obj.hessian.norm()));
    }
}

INSTANTIATE_TEST_SUITE_P(AllFamilies, FamilyProperty,
                         ::testing::Values(FamilyKind::gaussian, FamilyKind::logistic, FamilyKind::cox),
                         [](const auto& info) { return std::string(to_string(info.param)); });
