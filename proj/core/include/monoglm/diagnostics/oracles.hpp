#pragma once

// Reference solvers used to validate the active set method. Deliberately simple and
// exponential in |J|; only built with MONOGLM_DIAGNOSTICS.

#include "monoglm/design.hpp"
#include "monoglm/error.hpp"
#include "monoglm/families.hpp"
#include "monoglm/solver.hpp"

#include <Eigen/Core>

#include <span>
#include <vector>

namespace monoglm::diagnostics {

class SeparationError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

struct SubsetEntry {
    std::vector<Eigen::Index> active;
    bool feasible = false;
    double loglik = 0.0;  // NaN when the subproblem failed
};

struct OracleReport {
    double best_loglik = 0.0;
    std::vector<Eigen::Index> best_active;
    Eigen::VectorXd best_beta;
    std::vector<SubsetEntry> per_subset;
};

inline constexpr std::size_t max_brute_force_constraints = 16;

/// Solves the equality-restricted subproblem for every subset of J and keeps the best
/// feasible one. Throws InputError when |J| exceeds max_brute_force_constraints.
OracleReport brute_force(const Family& family,
                         const DesignSystem& design,
                         const Response& response,
                         const SolverOptions& options = {});

/// Weighted isotonic (nondecreasing) least squares by pool-adjacent-violators.
Eigen::VectorXd pava(std::span<const double> values, std::span<const double> weights);

/// Unconstrained logistic regression by iteratively reweighted least squares.
/// Throws SeparationError when the iteration diverges.
Eigen::VectorXd irls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

/// Unconstrained least squares via column-pivoted QR.
Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y);

} // namespace monoglm::diagnostics
