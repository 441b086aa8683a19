#ifndef BOUNDGP_QUADRATURE_HPP
#define BOUNDGP_QUADRATURE_HPP

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/errors.hpp"

namespace boundgp {

/// Gauss-Hermite rule for int exp(-t^2) g(t) dt. Nodes ascend and are
/// exactly antisymmetric (t[k] == -t[n-1-k]) with mirrored weights.
struct GaussHermite {
    std::vector<double> nodes;
    std::vector<double> weights;

    /// E[g(f)] for f ~ N(mean, var).
    template <class Fn>
    [[nodiscard]] double expectation(double mean, double var, Fn&& g) const {
        const double scale = std::sqrt(2.0 * std::max(var, 0.0));
        double acc = 0.0;
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            acc += weights[k] * g(mean + scale * nodes[k]);
        }
        return acc / std::sqrt(std::numbers::pi);
    }
};

/// Golub-Welsch: nodes are the eigenvalues of the symmetric Jacobi matrix
/// with off-diagonal sqrt(k/2); weights are sqrt(pi) times the squared first
/// eigenvector components.
inline GaussHermite gauss_hermite(std::size_t n) {
    if (n == 0) {
        throw ArgumentError("Gauss-Hermite rule needs at least one node");
    }
    const auto size = static_cast<Eigen::Index>(n);
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(size, size);
    for (Eigen::Index k = 1; k < size; ++k) {
        jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(0.5 * static_cast<double>(k));
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    GaussHermite rule;
    rule.nodes.resize(n);
    rule.weights.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto c = static_cast<Eigen::Index>(k);
        rule.nodes[k] = eig.eigenvalues()[c];
        const double v = eig.eigenvectors()(0, c);
        rule.weights[k] = std::sqrt(std::numbers::pi) * v * v;
    }
    for (std::size_t k = 0; k < n / 2; ++k) {
        const std::size_t r = n - 1 - k;
        const double t = 0.5 * (rule.nodes[r] - rule.nodes[k]);
        const double w = 0.5 * (rule.weights[k] + rule.weights[r]);
        rule.nodes[k] = -t;
        rule.nodes[r] = t;
        rule.weights[k] = rule.weights[r] = w;
    }
    if (n % 2 == 1) {
        rule.nodes[n / 2] = 0.0;
    }
    return rule;
}

/// The 20-node rule used for likelihood expectations.
inline const GaussHermite& default_gauss_hermite() {
    static const GaussHermite rule = gauss_hermite(20);
    return rule;
}

}  // namespace boundgp

#endif
