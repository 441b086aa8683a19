#ifndef BOUNDGP_LBFGS_HPP
#define BOUNDGP_LBFGS_HPP

#include <cmath>
#include <cstddef>
#include <deque>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/errors.hpp"

namespace boundgp {

struct LbfgsOptions {
    std::size_t max_iters = 1000;
    double grad_tol = 1e-6;  // on the infinity norm
    std::size_t history = 10;
    double armijo = 1e-4;
    std::size_t max_backtracks = 60;
};

struct LbfgsResult {
    Eigen::VectorXd x;
    double value = 0.0;
    double grad_norm = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// Objective after every accepted step, starting with the initial value.
    std::vector<double> trace;
};

/// Limited-memory BFGS with backtracking (Armijo) line search; every
/// accepted step strictly decreases the objective. `objective(x, grad)`
/// returns f(x) and writes the gradient.
template <class Objective>
LbfgsResult minimize_lbfgs(Objective&& objective, Eigen::VectorXd x, const LbfgsOptions& options = {}) {
    LbfgsResult result;
    Eigen::VectorXd grad(x.size());
    double f = objective(x, grad);
    if (!std::isfinite(f) || !grad.allFinite()) {
        throw ArgumentError("objective is not finite at the initial point");
    }
    result.trace.push_back(f);

    std::deque<Eigen::VectorXd> s_hist;
    std::deque<Eigen::VectorXd> y_hist;
    std::deque<double> rho_hist;

    Eigen::VectorXd trial(x.size());
    Eigen::VectorXd trial_grad(x.size());
    std::size_t iter = 0;
    for (; iter < options.max_iters; ++iter) {
        if (grad.lpNorm<Eigen::Infinity>() < options.grad_tol) {
            result.converged = true;
            break;
        }

        // two-loop recursion
        Eigen::VectorXd dir = -grad;
        std::vector<double> alpha(s_hist.size());
        for (std::size_t k = s_hist.size(); k-- > 0;) {
            alpha[k] = rho_hist[k] * s_hist[k].dot(dir);
            dir -= alpha[k] * y_hist[k];
        }
        if (!s_hist.empty()) {
            dir *= s_hist.back().dot(y_hist.back()) / y_hist.back().squaredNorm();
        } else {
            dir /= std::max(1.0, grad.norm());
        }
        for (std::size_t k = 0; k < s_hist.size(); ++k) {
            const double beta = rho_hist[k] * y_hist[k].dot(dir);
            dir += (alpha[k] - beta) * s_hist[k];
        }
        double slope = grad.dot(dir);
        if (!(slope < 0.0)) {
            s_hist.clear();
            y_hist.clear();
            rho_hist.clear();
            dir = -grad / std::max(1.0, grad.norm());
            slope = grad.dot(dir);
        }

        double step = 1.0;
        bool accepted = false;
        double f_trial = f;
        for (std::size_t bt = 0; bt < options.max_backtracks; ++bt) {
            trial = x + step * dir;
            f_trial = objective(trial, trial_grad);
            if (std::isfinite(f_trial) && trial_grad.allFinite() && f_trial <= f + options.armijo * step * slope &&
                f_trial < f) {
                accepted = true;
                break;
            }
            step *= 0.5;
        }
        if (!accepted) {
            break;  // no further decrease representable
        }

        Eigen::VectorXd s = trial - x;
        Eigen::VectorXd y = trial_grad - grad;
        const double sy = s.dot(y);
        if (sy > 1e-12 * s.norm() * y.norm()) {
            if (s_hist.size() == options.history) {
                s_hist.pop_front();
                y_hist.pop_front();
                rho_hist.pop_front();
            }
            s_hist.push_back(std::move(s));
            y_hist.push_back(std::move(y));
            rho_hist.push_back(1.0 / sy);
        }
        x = trial;
        grad = trial_grad;
        f = f_trial;
        result.trace.push_back(f);
    }
    if (!result.converged && grad.lpNorm<Eigen::Infinity>() < options.grad_tol) {
        result.converged = true;
    }
    result.x = std::move(x);
    result.value = f;
    result.grad_norm = grad.lpNorm<Eigen::Infinity>();
    result.iterations = iter;
    return result;
}

}  // namespace boundgp

#endif
