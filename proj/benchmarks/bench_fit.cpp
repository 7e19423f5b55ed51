#include "monoglm/inference.hpp"
#include "monoglm/rng.hpp"
#include "monoglm/solver.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace monoglm;

namespace {

// Intercept plus one k-level factor in cumulative coding, n rows, flat truth so constraints bind.
struct Problem {
    DesignSystem design;
    Response response;
};

Problem make_problem(FamilyKind kind, Eigen::Index n, Eigen::Index k) {
    auto rng = make_rng(42, static_cast<std::uint64_t>(n * 100 + k));
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    const bool cox = kind == FamilyKind::cox;
    const Eigen::Index offset = cox ? 0 : 1;
    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(n, k - 1 + offset);
    std::vector<Eigen::Index> constrained;
    for (Eigen::Index j = 0; j < k - 1; ++j) constrained.push_back(j + offset);
    Eigen::VectorXd y(n), time(n), event(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const auto level = i % k;
        if (!cox) x(i, 0) = 1.0;
        for (Eigen::Index j = 1; j <= level; ++j) x(i, j - 1 + offset) = 1.0;
        const double e = normal(rng);
        y[i] = kind == FamilyKind::logistic ? (unif(rng) < 0.5 ? 1.0 : 0.0) : e;
        time[i] = -std::log(unif(rng));
        event[i] = unif(rng) < 0.8 ? 1.0 : 0.0;
    }
    event[0] = 1.0;
    return {DesignSystem::from_matrix(std::move(x), std::move(constrained)),
            cox ? Response::survival(time, event) : Response::outcome(y)};
}

Family family_of(FamilyKind kind) {
    switch (kind) {
    case FamilyKind::gaussian: return Family::gaussian();
    case FamilyKind::logistic: return Family::logistic();
    case FamilyKind::cox: return Family::cox();
    }
    return Family::gaussian();
}

template <FamilyKind Kind>
void BM_Fit(benchmark::State& state) {
    const auto problem = make_problem(Kind, state.range(0), state.range(1));
    const auto family = family_of(Kind);
    for (auto _ : state) benchmark::DoNotOptimize(fit(family, problem.design, problem.response));
    state.SetComplexityN(state.range(0));
}

void fit_sizes(benchmark::internal::Benchmark* b) {
    for (const int n : {50, 500, 5000})
        for (const int k : {4, 10}) b->Args({n, k});
}

BENCHMARK(BM_Fit<FamilyKind::gaussian>)->Apply(fit_sizes);
BENCHMARK(BM_Fit<FamilyKind::logistic>)->Apply(fit_sizes);
BENCHMARK(BM_Fit<FamilyKind::cox>)->Apply(fit_sizes);

void BM_ChibarWeights(benchmark::State& state) {
    const auto m = state.range(0);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Constant(m, m, 0.3);
    cov.diagonal().setOnes();
    for (auto _ : state) benchmark::DoNotOptimize(chibar_weights(cov, 10000, 7));
}
BENCHMARK(BM_ChibarWeights)->Arg(1)->Arg(3)->Arg(6)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
