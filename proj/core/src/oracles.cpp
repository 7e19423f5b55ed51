#include "monoglm/diagnostics/oracles.hpp"

#include <Eigen/QR>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace monoglm::diagnostics {

OracleReport brute_force(const Family& family, const DesignSystem& design, const Response& response,
                         const SolverOptions& options) {
    validate(family, response);
    const auto& constrained = design.constrained();
    const auto m = constrained.size();
    if (m > max_brute_force_constraints)
        throw InputError("brute force enumeration is limited to " + std::to_string(max_brute_force_constraints) +
                         " constrained coordinates");

    OracleReport report;
    report.best_loglik = -std::numeric_limits<double>::infinity();
    const Eigen::VectorXd zero = Eigen::VectorXd::Zero(design.cols());
    for (std::uint64_t mask = 0; mask < (std::uint64_t{1} << m); ++mask) {
        SubsetEntry entry;
        for (std::size_t b = 0; b < m; ++b)
            if (mask & (std::uint64_t{1} << b)) entry.active.push_back(constrained[b]);
        const ActiveSet active(entry.active);
        try {
            const auto beta = solve_subproblem(family, design, response, active, zero, options);
            entry.loglik = loglik(family, design.matrix(), response, beta);
            entry.feasible = std::isfinite(entry.loglik);
            for (const auto j : constrained)
                if (!active.contains(j) && beta[j] < -options.feasibility_tol) entry.feasible = false;
            // near-ties (degenerate coordinates) go to the larger active set
            const double slack = 1e-12 * (1.0 + std::abs(report.best_loglik));
            const bool better = !std::isfinite(report.best_loglik) || entry.loglik > report.best_loglik + slack ||
                                (entry.loglik >= report.best_loglik - slack &&
                                 entry.active.size() > report.best_active.size());
            if (entry.feasible && better) {
                report.best_loglik = entry.loglik;
                report.best_active = entry.active;
                report.best_beta = beta;
            }
        } catch (const NumericalError&) {
            entry.loglik = std::numeric_limits<double>::quiet_NaN();
            entry.feasible = false;
        }
        report.per_subset.push_back(std::move(entry));
    }
    if (!std::isfinite(report.best_loglik)) throw NumericalError("brute force found no feasible subproblem");
    return report;
}

Eigen::VectorXd pava(std::span<const double> values, std::span<const double> weights) {
    if (values.empty()) throw InputError("pava needs at least one value");
    if (values.size() != weights.size()) throw std::invalid_argument("pava: values and weights differ in length");
    for (const double w : weights)
        if (!(w > 0.0) || !std::isfinite(w)) throw InputError("pava weights must be positive");

    struct Block {
        double mean;
        double weight;
        std::size_t count;
    };
    std::vector<Block> blocks;
    for (std::size_t i = 0; i < values.size(); ++i) {
        blocks.push_back({values[i], weights[i], 1});
        while (blocks.size() > 1 && blocks[blocks.size() - 2].mean > blocks.back().mean) {
            const auto last = blocks.back();
            blocks.pop_back();
            auto& prev = blocks.back();
            const double w = prev.weight + last.weight;
            prev.mean = (prev.weight * prev.mean + last.weight * last.mean) / w;
            prev.weight = w;
            prev.count += last.count;
        }
    }
    Eigen::VectorXd out(static_cast<Eigen::Index>(values.size()));
    Eigen::Index i = 0;
    for (const auto& b : blocks)
        for (std::size_t c = 0; c < b.count; ++c) out[i++] = b.mean;
    return out;
}

Eigen::VectorXd irls(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw std::invalid_argument("irls: dimension mismatch");
    validate(Family::logistic(), Response::outcome(y));
    const auto n = x.rows();
    Eigen::VectorXd beta = Eigen::VectorXd::Zero(x.cols());
    for (int it = 0; it < 100; ++it) {
        const Eigen::VectorXd eta = x * beta;
        Eigen::VectorXd mu(n), w(n);
        for (Eigen::Index i = 0; i < n; ++i) {
            mu[i] = logistic(eta[i]);
            w[i] = mu[i] * (1.0 - mu[i]);
        }
        const Eigen::VectorXd gradient = x.transpose() * (y - mu);
        if (gradient.lpNorm<Eigen::Infinity>() <= 1e-10) {
            if (w.minCoeff() < 1e-10)
                throw SeparationError("irls: fitted probabilities at 0 or 1, data are separated");
            return beta;
        }
        if (w.minCoeff() <= 0.0) throw SeparationError("irls: zero working weight, data are separated");
        const Eigen::VectorXd sw = w.cwiseSqrt();
        const Eigen::VectorXd z = eta + (y - mu).cwiseQuotient(w);
        beta = (sw.asDiagonal() * x).colPivHouseholderQr().solve(sw.cwiseProduct(z));
        if (!beta.allFinite() || beta.norm() > 1e6)
            throw SeparationError("irls: coefficients diverge, data are separated");
    }
    throw SeparationError("irls: no convergence in 100 iterations, data are likely separated");
}

Eigen::VectorXd ols(const Eigen::MatrixXd& x, const Eigen::VectorXd& y) {
    if (x.rows() != y.size()) throw std::invalid_argument("ols: dimension mismatch");
    return x.colPivHouseholderQr().solve(y);
}

} // namespace monoglm::diagnostics
