#pragma once

#include "monoglm/design.hpp"
#include "monoglm/families.hpp"
#include "monoglm/model_spec.hpp"

#include <Eigen/Core>

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace monoglm {

/// Constrained coordinates currently clamped to zero. Kept sorted.
class ActiveSet {
  public:
    ActiveSet() = default;
    explicit ActiveSet(std::vector<Eigen::Index> members);

    const std::vector<Eigen::Index>& members() const { return members_; }
    std::size_t size() const { return members_.size(); }
    bool empty() const { return members_.empty(); }
    bool contains(Eigen::Index j) const;
    void insert(Eigen::Index j);
    void erase(Eigen::Index j);

    bool operator==(const ActiveSet&) const = default;

  private:
    std::vector<Eigen::Index> members_;
};

enum class FitStatus { converged, max_iterations, numerical_failure };
enum class StepAction { add, drop, converge };

std::string_view to_string(FitStatus status);
std::string_view to_string(StepAction action);

/// One outer iteration: the objective at the feasible iterate and what was done with it.
struct TraceEntry {
    StepAction action = StepAction::converge;
    double objective = 0.0;
    std::size_t active_size = 0;
    std::optional<Eigen::Index> coordinate;  // added or dropped coordinate
};

struct KktEntry {
    Eigen::Index index = 0;
    bool constrained = false;
    bool at_bound = false;     // constrained and beta_j <= 1e-10
    bool degenerate = false;   // at bound with a vanishing multiplier
    double beta = 0.0;
    double gradient = 0.0;
    bool pass = false;
};

/**
 * First-order conditions for maximizing a concave log-likelihood over {beta_J >= 0}: the
 * gradient vanishes on free coordinates and is nonpositive on coordinates held at zero.
 */
struct KktReport {
    std::vector<KktEntry> entries;
    double tolerance = 1e-7;
    double max_free_gradient = 0.0;   // max |g_j| over free coordinates
    double max_bound_gradient = 0.0;  // max g_j over coordinates at the bound (may be negative)
    bool pass = false;
};

struct FitResult {
    Eigen::VectorXd beta;
    double loglik = 0.0;
    ActiveSet active;
    KktReport kkt;
    std::vector<TraceEntry> trace;
    FitStatus status = FitStatus::numerical_failure;
    std::size_t iterations = 0;
    std::string message;

    bool converged() const { return status == FitStatus::converged; }
};

/**
 * Maximizes the log-likelihood over {beta : beta_j = 0 for j in active}, ignoring the sign
 * constraints on the remaining coordinates. Gaussian uses the normal equations; logistic and
 * Cox use damped Newton with Armijo backtracking. Throws NumericalError on a singular reduced
 * Hessian or when no step can be accepted.
 */
Eigen::VectorXd solve_subproblem(const Family& family,
                                 const DesignSystem& design,
                                 const Response& response,
                                 const ActiveSet& active,
                                 const Eigen::VectorXd& start,
                                 const SolverOptions& options = {});

/// Primal active set maximization of the log-likelihood subject to beta_j >= 0 for j in J.
FitResult fit(const Family& family,
              const DesignSystem& design,
              const Response& response,
              const SolverOptions& options = {});

/// Checks the optimality conditions at beta. Throws InputError if beta is infeasible.
KktReport verify_kkt(const Family& family,
                     const DesignSystem& design,
                     const Response& response,
                     const Eigen::VectorXd& beta,
                     double tolerance = 1e-7);

} // namespace monoglm
