#include "monoglm/solver.hpp"

#include "monoglm/error.hpp"

#include <Eigen/Cholesky>

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace monoglm {

ActiveSet::ActiveSet(std::vector<Eigen::Index> members) : members_(std::move(members)) {
    std::sort(members_.begin(), members_.end());
    members_.erase(std::unique(members_.begin(), members_.end()), members_.end());
}

bool ActiveSet::contains(Eigen::Index j) const {
    return std::binary_search(members_.begin(), members_.end(), j);
}

void ActiveSet::insert(Eigen::Index j) {
    const auto it = std::lower_bound(members_.begin(), members_.end(), j);
    if (it == members_.end() || *it != j) members_.insert(it, j);
}

void ActiveSet::erase(Eigen::Index j) {
    const auto it = std::lower_bound(members_.begin(), members_.end(), j);
    if (it != members_.end() && *it == j) members_.erase(it);
}

std::string_view to_string(FitStatus status) {
    switch (status) {
    case FitStatus::converged: return "converged";
    case FitStatus::max_iterations: return "max_iterations";
    case FitStatus::numerical_failure: return "numerical_failure";
    }
    return "unknown";
}

std::string_view to_string(StepAction action) {
    switch (action) {
    case StepAction::add: return "add";
    case StepAction::drop: return "drop";
    case StepAction::converge: return "converge";
    }
    return "unknown";
}

namespace {

std::vector<Eigen::Index> free_coordinates(Eigen::Index p, const ActiveSet& active) {
    std::vector<Eigen::Index> free;
    free.reserve(static_cast<std::size_t>(p));
    for (Eigen::Index j = 0; j < p; ++j)
        if (!active.contains(j)) free.push_back(j);
    return free;
}

Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<Eigen::Index>& columns) {
    Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t k = 0; k < columns.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = x.col(columns[k]);
    return out;
}

Eigen::VectorXd least_squares(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    const Eigen::MatrixXd gram = x.transpose() * x;
    Eigen::LLT<Eigen::MatrixXd> llt(gram);
    if (llt.info() != Eigen::Success) throw NumericalError("singular reduced Hessian in least squares subproblem");
    Eigen::VectorXd beta = llt.solve(x.transpose() * y);
    // one step of iterative refinement on the normal equations
    beta += llt.solve(x.transpose() * (y - x * beta));
    if (!beta.allFinite()) throw NumericalError("non-finite least squares solution");
    return beta;
}

Eigen::VectorXd newton(const Family& family, const Eigen::MatrixXd& x, const Response& response,
                       Eigen::VectorXd beta, const SolverOptions& options) {
    auto obj = evaluate(family, x, response, beta, Derivatives::hessian);
    if (!std::isfinite(obj.loglik)) throw NumericalError("non-finite log-likelihood at the starting point");
    for (std::size_t it = 0; it < options.max_inner_iterations; ++it) {
        if (obj.gradient.lpNorm<Eigen::Infinity>() <= options.inner_gradient_tol) break;
        Eigen::LLT<Eigen::MatrixXd> llt(-obj.hessian);
        if (llt.info() != Eigen::Success) throw NumericalError("singular reduced Hessian in Newton subproblem");
        const Eigen::VectorXd direction = llt.solve(obj.gradient);
        const double slope = obj.gradient.dot(direction);
        if (!std::isfinite(slope)) throw NumericalError("non-finite Newton direction");

        const double slack = 4.0 * std::numeric_limits<double>::epsilon() * (1.0 + std::abs(obj.loglik));
        double step = 1.0;
        bool accepted = false;
        for (std::size_t h = 0; h <= options.max_halvings; ++h, step *= 0.5) {
            const Eigen::VectorXd trial = beta + step * direction;
            const double value = loglik(family, x, response, trial);
            if (std::isfinite(value) && value >= obj.loglik + options.armijo * step * slope - slack) {
                beta = trial;
                accepted = true;
                break;
            }
            // Full step rejected with a predicted gain below roundoff in the log-likelihood.
            if (h == 0 && slope <= slack) break;
        }
        if (!accepted) {
            // The predicted gain is at roundoff level: the point is optimal to working precision.
            if (slope <= slack || slope <= 1e-10 * (1.0 + std::abs(obj.loglik))) break;
            throw NumericalError("line search found no acceptable step");
        }
        obj = evaluate(family, x, response, beta, Derivatives::hessian);
    }
    return beta;
}

} // namespace

Eigen::VectorXd solve_subproblem(const Family& family, const DesignSystem& design, const Response& response,
                                 const ActiveSet& active, const Eigen::VectorXd& start,
                                 const SolverOptions& options) {
    const auto p = design.cols();
    if (start.size() != p) throw std::invalid_argument("start vector has the wrong length");
    const auto free = free_coordinates(p, active);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    if (free.empty()) return beta;

    const Eigen::MatrixXd x = free.size() == static_cast<std::size_t>(p) ? design.matrix()
                                                                        : select_columns(design.matrix(), free);
    Eigen::VectorXd reduced(static_cast<Eigen::Index>(free.size()));
    for (std::size_t k = 0; k < free.size(); ++k) reduced[static_cast<Eigen::Index>(k)] = start[free[k]];

    if (family.kind == FamilyKind::gaussian) {
        reduced = least_squares(x, response.y);
    } else {
        reduced = newton(family, x, response, std::move(reduced), options);
    }
    for (std::size_t k = 0; k < free.size(); ++k) beta[free[k]] = reduced[static_cast<Eigen::Index>(k)];
    return beta;
}

KktReport verify_kkt(const Family& family, const DesignSystem& design, const Response& response,
                     const Eigen::VectorXd& beta, double tolerance) {
    constexpr double bound_tol = 1e-10;
    if (beta.size() != design.cols()) throw std::invalid_argument("coefficient length does not match design");
    for (const auto j : design.constrained()) {
        if (beta[j] < -1e-12)
            throw InputError("coefficient " + std::to_string(j) + " violates its sign constraint");
    }
    const auto obj = evaluate(family, design.matrix(), response, beta, Derivatives::gradient);

    KktReport report;
    report.tolerance = tolerance;
    report.pass = true;
    double max_free = 0.0;
    double max_bound = -std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < design.cols(); ++j) {
        KktEntry e;
        e.index = j;
        e.constrained = design.is_constrained(j);
        e.beta = beta[j];
        e.gradient = obj.gradient[j];
        e.at_bound = e.constrained && beta[j] <= bound_tol;
        if (e.at_bound) {
            e.pass = e.gradient <= tolerance;
            e.degenerate = std::abs(e.gradient) <= tolerance;
            max_bound = std::max(max_bound, e.gradient);
        } else {
            e.pass = std::abs(e.gradient) <= tolerance;
            max_free = std::max(max_free, std::abs(e.gradient));
        }
        report.pass = report.pass && e.pass;
        report.entries.push_back(e);
    }
    report.max_free_gradient = max_free;
    report.max_bound_gradient = std::isfinite(max_bound) ? max_bound : 0.0;
    return report;
}

FitResult fit(const Family& family, const DesignSystem& design, const Response& response,
              const SolverOptions& options) {
    validate(family, response);
    if (design.rows() != response.size()) throw InputError("design rows do not match the response length");

    const auto p = design.cols();
    const auto& constrained = design.constrained();
    const std::size_t max_outer =
        options.max_outer_iterations > 0 ? options.max_outer_iterations : static_cast<std::size_t>(10 * std::max<Eigen::Index>(p, 1));

    FitResult result;
    ActiveSet active(constrained);
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    auto objective = [&](const Eigen::VectorXd& b) { return loglik(family, design.matrix(), response, b); };

    auto finish = [&](FitStatus status) {
        result.beta = beta;
        result.loglik = objective(beta);
        result.active = active;
        result.status = status;
        result.kkt = verify_kkt(family, design, response, beta);
        return result;
    };

    Eigen::VectorXd candidate;
    try {
        candidate = solve_subproblem(family, design, response, active, beta, options);
    } catch (const NumericalError& e) {
        result.message = e.what();
        return finish(FitStatus::numerical_failure);
    }

    for (std::size_t iter = 1; iter <= max_outer; ++iter) {
        result.iterations = iter;
        if (iter > 1) {
            try {
                candidate = solve_subproblem(family, design, response, active, beta, options);
            } catch (const NumericalError& e) {
                result.message = e.what();
                return finish(FitStatus::numerical_failure);
            }
        }

        // Blocking constraint: smallest step ratio among violated free constrained coordinates.
        std::optional<Eigen::Index> blocking;
        double step = 1.0;
        for (const auto j : constrained) {
            if (active.contains(j) || candidate[j] >= -options.feasibility_tol) continue;
            const double ratio = beta[j] / (beta[j] - candidate[j]);
            if (!blocking || ratio < step) {
                blocking = j;
                step = ratio;
            }
        }

        if (blocking) {
            step = std::clamp(step, 0.0, 1.0);
            beta += step * (candidate - beta);
            beta[*blocking] = 0.0;
            for (const auto j : constrained)
                if (beta[j] < 0.0) beta[j] = 0.0;
            active.insert(*blocking);
            result.trace.push_back({StepAction::add, objective(beta), active.size(), *blocking});
            continue;
        }

        beta = candidate;
        for (const auto j : constrained)
            if (beta[j] < 0.0 && !active.contains(j)) beta[j] = 0.0;

        const double value = objective(beta);
        if (active.empty()) {
            result.trace.push_back({StepAction::converge, value, 0, std::nullopt});
            return finish(FitStatus::converged);
        }
        const auto gradient = evaluate(family, design.matrix(), response, beta, Derivatives::gradient).gradient;
        std::optional<Eigen::Index> drop;
        double largest = options.kkt_tol;
        for (const auto j : active.members()) {
            if (gradient[j] > largest) {
                largest = gradient[j];
                drop = j;
            }
        }
        if (!drop) {
            result.trace.push_back({StepAction::converge, value, active.size(), std::nullopt});
            return finish(FitStatus::converged);
        }
        active.erase(*drop);
        result.trace.push_back({StepAction::drop, value, active.size(), *drop});
    }

    result.message = "outer iteration limit reached";
    return finish(FitStatus::max_iterations);
}

} // namespace monoglm
