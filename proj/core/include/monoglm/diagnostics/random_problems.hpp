#pragma once

#include "monoglm/design.hpp"
#include "monoglm/families.hpp"
#include "monoglm/model_spec.hpp"

#include <Eigen/Core>

#include <cstdint>
#include <vector>

namespace monoglm::diagnostics {

struct ProblemLimits {
    int max_rows = 50;
    int max_cols = 10;
    int max_constrained = 8;
};

/// A randomly generated, full-rank, fit-ready problem.
struct RandomProblem {
    Family family;
    DesignSystem design;
    Response response;
    std::uint64_t seed = 0;
};

/**
 * Draws a problem of the given family: an intercept (except Cox), one or two ordered factors
 * in cumulative coding and Gaussian covariates, with some true increments negative so that
 * constraints bind. Logistic draws are rejected until the unconstrained fit exists.
 * Deterministic in seed.
 */
RandomProblem random_problem(FamilyKind kind, std::uint64_t seed, const ProblemLimits& limits = {});

/// Single ordered factor with k levels and unequal group sizes, Gaussian response.
struct IsotonicProblem {
    DesignSystem design;
    Response response;
    std::vector<int> level;       // level rank of each row
    std::vector<double> means;    // per-level sample means
    std::vector<double> counts;   // per-level group sizes
};

IsotonicProblem random_isotonic_problem(std::uint64_t seed, int max_levels = 8);

} // namespace monoglm::diagnostics
