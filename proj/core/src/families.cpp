#include "monoglm/families.hpp"

#include "monoglm/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

namespace monoglm {

double log1p_exp(double eta) {
    return eta > 0.0 ? eta + std::log1p(std::exp(-eta)) : std::log1p(std::exp(eta));
}

double logistic(double eta) {
    if (eta >= 0.0) return 1.0 / (1.0 + std::exp(-eta));
    const double e = std::exp(eta);
    return e / (1.0 + e);
}

Response Response::outcome(Eigen::VectorXd y) {
    Response r;
    r.y = std::move(y);
    return r;
}

Response Response::survival(Eigen::VectorXd time, Eigen::VectorXd event) {
    if (time.size() != event.size()) throw std::invalid_argument("time and event lengths differ");
    Response r;
    r.time = std::move(time);
    r.event = std::move(event);
    r.order.resize(static_cast<std::size_t>(r.time.size()));
    std::iota(r.order.begin(), r.order.end(), Eigen::Index{0});
    std::stable_sort(r.order.begin(), r.order.end(),
                     [&t = r.time](Eigen::Index a, Eigen::Index b) { return t[a] > t[b]; });
    return r;
}

void validate(const Family& family, const Response& response) {
    switch (family.kind) {
    case FamilyKind::gaussian:
        if (response.y.size() == 0) throw InputError("gaussian model requires a response");
        if (!response.y.allFinite()) throw InputError("response contains non-finite values");
        return;
    case FamilyKind::logistic:
        if (response.y.size() == 0) throw InputError("logistic model requires a response");
        for (Eigen::Index i = 0; i < response.y.size(); ++i) {
            if (response.y[i] != 0.0 && response.y[i] != 1.0)
                throw InputError("logistic response must be 0 or 1 (row " + std::to_string(i + 1) + ")");
        }
        return;
    case FamilyKind::cox:
        if (family.tie_rule != TieRule::breslow) throw InputError("Cox model requires the Breslow tie rule");
        if (response.time.size() == 0) throw InputError("Cox model requires survival times");
        if (response.order.size() != static_cast<std::size_t>(response.time.size()))
            throw InputError("Cox response was not built with Response::survival");
        for (Eigen::Index i = 0; i < response.time.size(); ++i) {
            if (!(response.time[i] > 0.0) || !std::isfinite(response.time[i]))
                throw InputError("survival times must be positive (row " + std::to_string(i + 1) + ")");
            if (response.event[i] != 0.0 && response.event[i] != 1.0)
                throw InputError("event indicator must be 0 or 1 (row " + std::to_string(i + 1) + ")");
        }
        if (response.event.sum() == 0.0) throw InputError("Cox partial likelihood needs at least one event");
        return;
    }
}

namespace {

Objective gaussian_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                             Derivatives order) {
    Objective obj;
    const Eigen::VectorXd residual = y - x * beta;
    obj.loglik = -0.5 * residual.squaredNorm();
    if (order != Derivatives::value) obj.gradient = x.transpose() * residual;
    if (order == Derivatives::hessian) obj.hessian = -(x.transpose() * x);
    return obj;
}

Objective logistic_objective(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta,
                             Derivatives order) {
    Objective obj;
    const Eigen::VectorXd eta = x * beta;
    const auto n = eta.size();
    double ll = 0.0;
    Eigen::VectorXd residual(n);
    Eigen::VectorXd weight(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        ll += y[i] * eta[i] - log1p_exp(eta[i]);
        residual[i] = y[i] - logistic(eta[i]);
        const double e = std::exp(-std::abs(eta[i]));
        weight[i] = e / ((1.0 + e) * (1.0 + e));
    }
    obj.loglik = ll;
    if (order != Derivatives::value) obj.gradient = x.transpose() * residual;
    if (order == Derivatives::hessian) obj.hessian = -(x.transpose() * weight.asDiagonal() * x);
    return obj;
}

// Single pass over subjects by decreasing time, accumulating risk-set sums. Subjects with tied
// times enter the risk set together before any of their events contribute (Breslow).
Objective cox_objective(const Eigen::MatrixXd& x, const Response& r, const Eigen::VectorXd& beta,
                        Derivatives order) {
    const Eigen::VectorXd eta = x * beta;
    const auto n = eta.size();
    const auto p = x.cols();
    const double shift = n > 0 ? eta.maxCoeff() : 0.0;
    const bool want_grad = order != Derivatives::value;
    const bool want_hess = order == Derivatives::hessian;

    double s0 = 0.0;
    Eigen::VectorXd s1 = Eigen::VectorXd::Zero(want_grad ? p : 0);
    Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(want_hess ? p : 0, want_hess ? p : 0);

    Objective obj;
    obj.loglik = 0.0;
    if (want_grad) obj.gradient = Eigen::VectorXd::Zero(p);
    if (want_hess) obj.hessian = Eigen::MatrixXd::Zero(p, p);

    std::size_t k = 0;
    const auto& idx = r.order;
    while (k < idx.size()) {
        std::size_t end = k;
        const double t = r.time[idx[k]];
        double events = 0.0;
        double eta_events = 0.0;
        Eigen::VectorXd x_events = Eigen::VectorXd::Zero(want_grad ? p : 0);
        while (end < idx.size() && r.time[idx[end]] == t) {
            const auto i = idx[end];
            const double w = std::exp(eta[i] - shift);
            s0 += w;
            if (want_grad) s1.noalias() += w * x.row(i).transpose();
            if (want_hess) s2.noalias() += w * x.row(i).transpose() * x.row(i);
            if (r.event[i] != 0.0) {
                events += 1.0;
                eta_events += eta[i];
                if (want_grad) x_events.noalias() += x.row(i).transpose();
            }
            ++end;
        }
        if (events > 0.0) {
            obj.loglik += eta_events - events * (shift + std::log(s0));
            if (want_grad) {
                const Eigen::VectorXd mean = s1 / s0;
                obj.gradient.noalias() += x_events - events * mean;
                if (want_hess) obj.hessian.noalias() -= events * (s2 / s0 - mean * mean.transpose());
            }
        }
        k = end;
    }
    if (want_hess) obj.hessian = 0.5 * (obj.hessian + obj.hessian.transpose()).eval();
    return obj;
}

void check_dimensions(const Eigen::MatrixXd& x, Eigen::Index n, const Eigen::VectorXd& beta) {
    if (x.rows() != n) throw std::invalid_argument("design rows do not match the response length");
    if (x.cols() != beta.size()) throw std::invalid_argument("coefficient length does not match design columns");
}

} // namespace

Objective evaluate(const Family& family, const Eigen::MatrixXd& x, const Response& response,
                   const Eigen::VectorXd& beta, Derivatives order) {
    switch (family.kind) {
    case FamilyKind::gaussian: return gaussian_objective(x, response.y, beta, order);
    case FamilyKind::logistic: return logistic_objective(x, response.y, beta, order);
    case FamilyKind::cox: return cox_objective(x, response, beta, order);
    }
    throw std::invalid_argument("unknown family");
}

double loglik(const Family& family, const Eigen::MatrixXd& x, const Response& response,
              const Eigen::VectorXd& beta) {
    return evaluate(family, x, response, beta, Derivatives::value).loglik;
}

Objective eval_gaussian(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
    check_dimensions(x, y.size(), beta);
    return gaussian_objective(x, y, beta, Derivatives::hessian);
}

Objective eval_logistic(const Eigen::MatrixXd& x, const Eigen::VectorXd& y, const Eigen::VectorXd& beta) {
    check_dimensions(x, y.size(), beta);
    validate(Family::logistic(), Response::outcome(y));
    return logistic_objective(x, y, beta, Derivatives::hessian);
}

Objective eval_cox(const Eigen::MatrixXd& x, const Eigen::VectorXd& time, const Eigen::VectorXd& event,
                   const Eigen::VectorXd& beta) {
    check_dimensions(x, time.size(), beta);
    const auto response = Response::survival(time, event);
    validate(Family::cox(), response);
    return cox_objective(x, response, beta, Derivatives::hessian);
}

} // namespace monoglm
