#ifndef BOUNDGP_TESTS_SUPPORT_HPP
#define BOUNDGP_TESTS_SUPPORT_HPP

#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/boundgp.hpp"

namespace boundgp::support {

inline Eigen::MatrixXd random_matrix(std::mt19937_64& rng, Eigen::Index rows, Eigen::Index cols, double sd = 1.0) {
    std::normal_distribution<double> normal(0.0, sd);
    Eigen::MatrixXd a(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
        for (Eigen::Index r = 0; r < rows; ++r) {
            a(r, c) = normal(rng);
        }
    }
    return a;
}

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
}

/// Random lower-triangular factor with diagonal in [0.3, 1.3].
inline Eigen::MatrixXd random_lower(std::mt19937_64& rng, Eigen::Index m, double scale = 0.3) {
    Eigen::MatrixXd l = random_matrix(rng, m, m, scale).triangularView<Eigen::Lower>();
    for (Eigen::Index k = 0; k < m; ++k) {
        l(k, k) = uniform(rng, 0.3, 1.3);
    }
    return l;
}

/// Relative agreement used for finite-difference checks.
inline double rel_diff(double a, double b, double floor = 1e-6) {
    return std::abs(a - b) / std::max({std::abs(a), std::abs(b), floor});
}

/// Central difference of f along coordinate k of x.
template <class Fn>
double central_difference(Fn&& f, Eigen::VectorXd x, Eigen::Index k, double step = 1e-5) {
    const double x0 = x[k];
    x[k] = x0 + step;
    const double up = f(x);
    x[k] = x0 - step;
    const double down = f(x);
    return (up - down) / (2.0 * step);
}

}  // namespace boundgp::support

#endif
