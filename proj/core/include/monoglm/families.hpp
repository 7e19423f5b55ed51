#pragma once

#include "monoglm/model_spec.hpp"

#include <Eigen/Core>

#include <vector>

namespace monoglm {

/**
 * Outcome data for one fit. Gaussian and logistic models use y; Cox models use time and
 * event together with a precomputed ordering of subjects by decreasing time.
 */
struct Response {
    Eigen::VectorXd y;
    Eigen::VectorXd time;
    Eigen::VectorXd event;
    std::vector<Eigen::Index> order;  // cox: indices by decreasing time, ties by index

    static Response outcome(Eigen::VectorXd y);
    static Response survival(Eigen::VectorXd time, Eigen::VectorXd event);

    Eigen::Index size() const { return y.size() > 0 ? y.size() : time.size(); }
};

/// Checks that the response lies in the family's support: binary y for logistic, positive
/// times and at least one event for Cox. Throws InputError.
void validate(const Family& family, const Response& response);

enum class Derivatives { value, gradient, hessian };

/// Log-likelihood with its gradient and Hessian. The Hessian is negative semidefinite.
struct Objective {
    double loglik = 0.0;
    Eigen::VectorXd gradient;
    Eigen::MatrixXd hessian;
};

// Unchecked evaluation for the solver's inner loops: the response must already have passed
// validate() and dimensions must agree. Only the requested derivative orders are filled.
Objective evaluate(const Family& family,
                   const Eigen::MatrixXd& x,
                   const Response& response,
                   const Eigen::VectorXd& beta,
                   Derivatives order = Derivatives::hessian);

double loglik(const Family& family,
              const Eigen::MatrixXd& x,
              const Response& response,
              const Eigen::VectorXd& beta);

/// Least squares with unit variance: -RSS/2.
Objective eval_gaussian(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

/// Bernoulli log-likelihood with logit link, overflow-safe for large |eta|.
Objective eval_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta);

/// Breslow partial log-likelihood. Risk set at t is {j : time_j >= t}.
Objective eval_cox(const Eigen::MatrixXd& x,
                   const Eigen::VectorXd& time,
                   const Eigen::VectorXd& event,
                   const Eigen::VectorXd& beta);

/// log(1 + exp(eta)) without overflow.
double log1p_exp(double eta);
/// 1 / (1 + exp(-eta)) without overflow.
double logistic(double eta);

} // namespace monoglm
