#pragma once

// Central finite differences, independent of the analytic derivative code paths.

#include <Eigen/Core>

#include <algorithm>
#include <functional>

namespace monoglm::diagnostics {

inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& at, double step = 1e-5) {
    Eigen::VectorXd g(at.size());
    for (Eigen::Index j = 0; j < at.size(); ++j) {
        Eigen::VectorXd up = at, down = at;
        up[j] += step;
        down[j] -= step;
        g[j] = (f(up) - f(down)) / (2.0 * step);
    }
    return g;
}

inline Eigen::MatrixXd fd_jacobian(const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& g,
                                   const Eigen::VectorXd& at, double step = 1e-5) {
    const auto p = at.size();
    Eigen::MatrixXd h(p, p);
    for (Eigen::Index j = 0; j < p; ++j) {
        Eigen::VectorXd up = at, down = at;
        up[j] += step;
        down[j] -= step;
        h.col(j) = (g(up) - g(down)) / (2.0 * step);
    }
    return h;
}

/// max |a - b| / max(max |b|, 1)
inline double relative_error(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    return (a - b).lpNorm<Eigen::Infinity>() / std::max(b.lpNorm<Eigen::Infinity>(), 1.0);
}

} // namespace monoglm::diagnostics
