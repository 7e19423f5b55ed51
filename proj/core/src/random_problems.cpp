#include "monoglm/diagnostics/random_problems.hpp"

#include "monoglm/diagnostics/oracles.hpp"
#include "monoglm/error.hpp"
#include "monoglm/rng.hpp"
#include "monoglm/solver.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace monoglm::diagnostics {

namespace {

int uniform_int(std::mt19937_64& rng, int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
}

// Level assignment with unequal group probabilities; every level appears at least once.
std::vector<int> draw_levels(std::mt19937_64& rng, int n, int k) {
    std::gamma_distribution<double> gamma(1.0, 1.0);
    std::vector<double> prob(static_cast<std::size_t>(k));
    for (auto& q : prob) q = 0.2 + gamma(rng);
    std::discrete_distribution<int> pick(prob.begin(), prob.end());
    std::vector<int> level(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) level[static_cast<std::size_t>(i)] = i < k ? i : pick(rng);
    std::shuffle(level.begin(), level.end(), rng);
    return level;
}

bool attempt(FamilyKind kind, std::mt19937_64& rng, const ProblemLimits& limits, RandomProblem& out) {
    std::normal_distribution<double> normal;
    const bool intercept = kind != FamilyKind::cox;
    const int base = intercept ? 1 : 0;

    const int max_constrained = std::min(limits.max_constrained, limits.max_cols - base);
    if (max_constrained < 1) return false;
    const int factors = max_constrained >= 2 ? uniform_int(rng, 1, 2) : 1;
    std::vector<int> levels;
    int constrained = 0;
    for (int f = 0; f < factors; ++f) {
        const int room = max_constrained - constrained - (factors - f - 1);
        if (room < 1) break;
        const int k = uniform_int(rng, 2, std::min(room, 5) + 1);
        levels.push_back(k);
        constrained += k - 1;
    }
    const int covariates = uniform_int(rng, 0, std::min(2, limits.max_cols - base - constrained));
    const int p = base + constrained + covariates;

    int min_rows = 0;
    switch (kind) {
    case FamilyKind::gaussian: min_rows = std::max(2 * p + 5, 12); break;
    case FamilyKind::logistic: min_rows = std::max(5 * p, 30); break;
    case FamilyKind::cox: min_rows = std::max(4 * p, 20); break;
    }
    if (min_rows > limits.max_rows) min_rows = limits.max_rows;
    const int n = uniform_int(rng, min_rows, limits.max_rows);
    if (n <= p) return false;

    Eigen::MatrixXd x(n, p);
    std::vector<Eigen::Index> cj;
    int col = 0;
    if (intercept) x.col(col++).setOnes();
    for (const int k : levels) {
        const auto level = draw_levels(rng, n, k);
        const double sign = std::bernoulli_distribution(0.25)(rng) ? -1.0 : 1.0;
        for (int j = 1; j < k; ++j) {
            for (int i = 0; i < n; ++i) x(i, col) = level[static_cast<std::size_t>(i)] >= j ? sign : 0.0;
            cj.push_back(col++);
        }
    }
    for (int c = 0; c < covariates; ++c, ++col)
        for (int i = 0; i < n; ++i) x(i, col) = normal(rng);

    Eigen::VectorXd beta(p);
    for (int j = 0; j < p; ++j) beta[j] = 0.7 * normal(rng);
    if (kind != FamilyKind::gaussian) beta *= 0.6;
    const Eigen::VectorXd eta = x * beta;

    try {
        out.design = DesignSystem::from_matrix(x, cj);
    } catch (const InputError&) {
        return false;
    }

    switch (kind) {
    case FamilyKind::gaussian: {
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = eta[i] + normal(rng);
        out.response = Response::outcome(std::move(y));
        out.family = Family::gaussian();
        return true;
    }
    case FamilyKind::logistic: {
        std::uniform_real_distribution<double> unif;
        Eigen::VectorXd y(n);
        for (int i = 0; i < n; ++i) y[i] = unif(rng) < logistic(eta[i]) ? 1.0 : 0.0;
        if (y.sum() < 3.0 || y.sum() > n - 3.0) return false;
        try {
            const auto b = irls(x, y);
            if (b.lpNorm<Eigen::Infinity>() > 15.0) return false;
        } catch (const NumericalError&) {
            return false;
        }
        out.response = Response::outcome(std::move(y));
        out.family = Family::logistic();
        return true;
    }
    case FamilyKind::cox: {
        const bool ties = std::bernoulli_distribution(0.5)(rng);
        Eigen::VectorXd time(n), event(n);
        for (int i = 0; i < n; ++i) {
            const double t = std::exponential_distribution<double>(std::exp(eta[i]))(rng);
            const double c = std::exponential_distribution<double>(0.4)(rng);
            double observed = std::min(t, c);
            if (ties) observed = std::max(0.1, std::round(observed * 10.0) / 10.0);
            time[i] = observed;
            event[i] = t <= c ? 1.0 : 0.0;
        }
        if (event.sum() < 3.0) return false;
        out.response = Response::survival(std::move(time), std::move(event));
        out.family = Family::cox();
        // Reject monotone likelihood: the unconstrained partial likelihood must have a finite maximizer.
        const auto unconstrained = DesignSystem::from_matrix(x, {});
        try {
            const auto f = fit(out.family, unconstrained, out.response);
            if (!f.converged() || !f.kkt.pass || f.beta.lpNorm<Eigen::Infinity>() > 15.0) return false;
        } catch (const Error&) {
            return false;
        }
        return true;
    }
    }
    return false;
}

} // namespace

RandomProblem random_problem(FamilyKind kind, std::uint64_t seed, const ProblemLimits& limits) {
    auto rng = make_rng(seed, 0x5eedULL + static_cast<std::uint64_t>(kind));
    RandomProblem problem;
    problem.seed = seed;
    for (int tries = 0; tries < 1000; ++tries) {
        if (attempt(kind, rng, limits, problem)) return problem;
    }
    throw Error("could not draw a well-posed random problem for seed " + std::to_string(seed));
}

IsotonicProblem random_isotonic_problem(std::uint64_t seed, int max_levels) {
    auto rng = make_rng(seed, 0x150ULL);
    std::normal_distribution<double> normal;
    const int k = uniform_int(rng, 2, std::max(2, max_levels));

    IsotonicProblem prob;
    prob.counts.assign(static_cast<std::size_t>(k), 0.0);
    for (int r = 0; r < k; ++r) {
        const int size = uniform_int(rng, 1, 6);
        for (int s = 0; s < size; ++s) prob.level.push_back(r);
        prob.counts[static_cast<std::size_t>(r)] = size;
    }
    std::shuffle(prob.level.begin(), prob.level.end(), rng);
    const auto n = static_cast<Eigen::Index>(prob.level.size());

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, k);
    Eigen::VectorXd y(n);
    std::vector<Eigen::Index> cj;
    x.col(0).setOnes();
    for (int j = 1; j < k; ++j) cj.push_back(j);
    prob.means.assign(static_cast<std::size_t>(k), 0.0);
    for (Eigen::Index i = 0; i < n; ++i) {
        const int r = prob.level[static_cast<std::size_t>(i)];
        for (int j = 1; j <= r; ++j) x(i, j) = 1.0;
        y[i] = 0.3 * r + normal(rng);
        prob.means[static_cast<std::size_t>(r)] += y[i];
    }
    for (int r = 0; r < k; ++r) prob.means[static_cast<std::size_t>(r)] /= prob.counts[static_cast<std::size_t>(r)];
    prob.design = DesignSystem::from_matrix(std::move(x), std::move(cj));
    prob.response = Response::outcome(std::move(y));
    return prob;
}

} // namespace monoglm::diagnostics
