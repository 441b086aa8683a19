#ifndef BOUNDGP_GP_REGRESSION_HPP
#define BOUNDGP_GP_REGRESSION_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <span>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/domain_grid.hpp"
#include "boundgp/eigenbasis.hpp"
#include "boundgp/errors.hpp"
#include "boundgp/lbfgs.hpp"
#include "boundgp/spectral.hpp"

namespace boundgp {

struct Prediction {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/// Prior variances of the feature coefficients, s(lambda_j), floored at the
/// smallest normal double so that their inverses stay finite.
inline Eigen::VectorXd prior_weights(const Eigen::VectorXd& lambda_sq, const KernelSpec& kernel) {
    Eigen::VectorXd w(lambda_sq.size());
    for (Eigen::Index j = 0; j < w.size(); ++j) {
        w[j] = std::max(spectral_density(kernel, std::sqrt(lambda_sq[j])), std::numeric_limits<double>::min());
    }
    return w;
}

/// d weights / d(log sigma_f^2, log l), one row per feature.
inline Eigen::MatrixXd prior_weight_gradients(const Eigen::VectorXd& lambda_sq, const KernelSpec& kernel) {
    Eigen::MatrixXd g(lambda_sq.size(), 2);
    for (Eigen::Index j = 0; j < lambda_sq.size(); ++j) {
        const SpectralGradient d = spectral_density_grad(kernel, std::sqrt(lambda_sq[j]));
        g(j, 0) = d.d_log_variance;
        g(j, 1) = d.d_log_lengthscale;
    }
    return g;
}

namespace detail {

/// Cholesky of Phi^T Phi + noise * diag(1/weights); on failure retries
/// once with jitter 1e-10 * trace / m on the diagonal.
inline Eigen::LLT<Eigen::MatrixXd> factor_feature_system(const Eigen::MatrixXd& gram, const Eigen::VectorXd& weights,
                                                        double noise) {
    Eigen::MatrixXd a = gram;
    a.diagonal() += noise * weights.cwiseInverse();
    Eigen::LLT<Eigen::MatrixXd> llt(a);
    if (llt.info() == Eigen::Success && a.allFinite()) {
        return llt;
    }
    const double jitter = 1e-10 * a.trace() / static_cast<double>(a.rows());
    a.diagonal().array() += jitter;
    llt.compute(a);
    if (llt.info() != Eigen::Success || !a.allFinite()) {
        std::ostringstream msg;
        msg << "feature system factorization failed; diagonal range ratio "
            << a.diagonal().maxCoeff() / a.diagonal().minCoeff();
        throw NumericalError(msg.str());
    }
    return llt;
}

}  // namespace detail

struct NlmlGradient {
    double value = 0.0;
    /// d/d(log sigma_f^2, log l, log sigma_n^2)
    Eigen::Vector3d grad = Eigen::Vector3d::Zero();
};

struct HyperparameterFit {
    Eigen::Vector3d theta;  // (log sigma_f^2, log l, log sigma_n^2)
    double nlml = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    std::vector<double> trace;
};

/// Reduced-rank GP regression on harmonic features, K ~ Phi Lambda Phi^T.
///
/// Binding data caches Phi^T Phi and Phi^T y at O(n m^2); predictions and
/// marginal-likelihood evaluations then cost O(m^3). The basis must outlive
/// the model.
class ReducedRankModel {
public:
    ReducedRankModel(const HarmonicBasis& basis, KernelSpec kernel, double noise_variance)
        : basis_(&basis), kernel_(kernel), noise_(noise_variance) {
        kernel_.dim = 2;
        validate_hyperparameters();
        weights_ = prior_weights(basis_->lambda_sq(), kernel_);
        bind_features(Eigen::MatrixXd::Zero(0, static_cast<Eigen::Index>(basis_->size())), Eigen::VectorXd());
    }

    [[nodiscard]] const HarmonicBasis& basis() const noexcept { return *basis_; }
    [[nodiscard]] const KernelSpec& kernel() const noexcept { return kernel_; }
    [[nodiscard]] double noise_variance() const noexcept { return noise_; }
    [[nodiscard]] const Eigen::VectorXd& weights() const noexcept { return weights_; }
    [[nodiscard]] const Eigen::MatrixXd& features() const noexcept { return features_; }
    [[nodiscard]] std::size_t data_count() const noexcept { return static_cast<std::size_t>(targets_.size()); }

    void bind(std::span<const Point2> inputs, std::span<const double> targets) {
        if (inputs.size() != targets.size()) {
            throw ArgumentError("bind: input and target counts differ");
        }
        for (std::size_t i = 0; i < inputs.size(); ++i) {
            if (!std::isfinite(inputs[i].x) || !std::isfinite(inputs[i].y) || !std::isfinite(targets[i])) {
                throw ArgumentError("bind: non-finite input or target at row " + std::to_string(i));
            }
        }
        bind_features(basis_->evaluate(inputs),
                      Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size())));
    }

    /// Binds a precomputed feature matrix (n x m).
    void bind_features(Eigen::MatrixXd features, Eigen::VectorXd targets) {
        if (features.cols() != weights_.size() || features.rows() != targets.size()) {
            throw ArgumentError("bind_features: dimension mismatch");
        }
        if (!features.allFinite() || !targets.allFinite()) {
            throw ArgumentError("bind_features: non-finite values");
        }
        features_ = std::move(features);
        targets_ = std::move(targets);
        gram_ = features_.transpose() * features_;
        proj_ = features_.transpose() * targets_;
        yty_ = targets_.squaredNorm();
    }

    /// theta = (log sigma_f^2, log l, log sigma_n^2)
    [[nodiscard]] Eigen::Vector3d theta() const {
        return {std::log(kernel_.variance), std::log(kernel_.lengthscale), std::log(noise_)};
    }

    void set_theta(const Eigen::Vector3d& theta) {
        KernelSpec k = kernel_;
        k.variance = std::exp(theta[0]);
        k.lengthscale = std::exp(theta[1]);
        const double noise = std::exp(theta[2]);
        if (!std::isfinite(k.variance) || !std::isfinite(k.lengthscale) || !std::isfinite(noise) || !(noise > 0.0) ||
            !(k.variance > 0.0) || !(k.lengthscale > 0.0)) {
            throw ArgumentError("set_theta: hyperparameters out of range");
        }
        kernel_ = k;
        noise_ = noise;
        weights_ = prior_weights(basis_->lambda_sq(), kernel_);
    }

    [[nodiscard]] double approx_covariance(Point2 a, Point2 b) const {
        const std::vector<Point2> pts{a, b};
        const Eigen::MatrixXd f = basis_->evaluate(pts);
        return (f.row(0).array() * weights_.transpose().array() * f.row(1).array()).sum();
    }

    [[nodiscard]] Prediction predict(std::span<const Point2> test) const {
        return predict_features(basis_->evaluate(test));
    }

    /// mean = Phi* A^{-1} Phi^T y, var = sigma_n^2 diag(Phi* A^{-1} Phi*^T),
    /// A = Phi^T Phi + sigma_n^2 Lambda^{-1}.
    [[nodiscard]] Prediction predict_features(const Eigen::MatrixXd& test_features) const {
        if (test_features.cols() != weights_.size()) {
            throw ArgumentError("predict: feature column count mismatch");
        }
        const Eigen::LLT<Eigen::MatrixXd> llt = detail::factor_feature_system(gram_, weights_, noise_);
        const Eigen::VectorXd alpha = llt.solve(proj_);
        Prediction out;
        out.mean = test_features * alpha;
        const Eigen::MatrixXd half = llt.matrixL().solve(test_features.transpose());
        out.variance = noise_ * half.colwise().squaredNorm().transpose();
        return out;
    }

    /// Negative log marginal likelihood
    ///   (n-m)/2 log sigma_n^2 + 1/2 sum log Lambda_jj + 1/2 log|A| + n/2 log 2pi
    ///   + (y^T y - y^T Phi A^{-1} Phi^T y) / (2 sigma_n^2).
    [[nodiscard]] double nlml() const { return nlml_impl(false).value; }

    [[nodiscard]] NlmlGradient nlml_with_gradient() const { return nlml_impl(true); }

    /// Minimizes the NLML over theta with L-BFGS (analytic gradients through
    /// Lambda and sigma_n^2; Phi stays fixed). Leaves the model at the
    /// optimum.
    HyperparameterFit fit_hyperparameters(std::size_t max_iters = 1000, double grad_tol = 1e-6) {
        if (data_count() < 2) {
            throw ArgumentError("fit_hyperparameters needs at least two observations");
        }
        const Eigen::Vector3d init = theta();
        {
            const double f0 = nlml();
            if (!std::isfinite(f0)) {
                throw ArgumentError("NLML is not finite at the initial hyperparameters");
            }
        }
        ReducedRankModel work = *this;
        const auto objective = [&work](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
            try {
                work.set_theta(x);
                const NlmlGradient g = work.nlml_with_gradient();
                grad = g.grad;
                return g.value;
            } catch (const std::exception&) {
                grad.setZero();
                return std::numeric_limits<double>::infinity();
            }
        };
        LbfgsOptions opts;
        opts.max_iters = max_iters;
        opts.grad_tol = grad_tol;
        const LbfgsResult r = minimize_lbfgs(objective, Eigen::VectorXd(init), opts);
        set_theta(r.x);
        return {r.x, r.value, r.iterations, r.converged, r.trace};
    }

private:
    void validate_hyperparameters() const {
        kernel_.validate();
        if (!(noise_ > 0.0) || !std::isfinite(noise_)) {
            throw ArgumentError("noise variance must be positive");
        }
    }

    [[nodiscard]] NlmlGradient nlml_impl(bool with_gradient) const {
        const double n = static_cast<double>(targets_.size());
        const double m = static_cast<double>(weights_.size());
        if (targets_.size() == 0) {
            throw ArgumentError("nlml needs at least one observation");
        }
        const Eigen::LLT<Eigen::MatrixXd> llt = detail::factor_feature_system(gram_, weights_, noise_);
        const Eigen::VectorXd alpha = llt.solve(proj_);
        const Eigen::MatrixXd lower = llt.matrixL();
        const double logdet_a = 2.0 * lower.diagonal().array().log().sum();
        const double fit = yty_ - proj_.dot(alpha);

        NlmlGradient out;
        out.value = 0.5 * (n - m) * std::log(noise_) + 0.5 * weights_.array().log().sum() + 0.5 * logdet_a +
                    0.5 * n * std::log(2.0 * std::numbers::pi) + fit / (2.0 * noise_);
        if (!with_gradient) {
            return out;
        }
        const Eigen::MatrixXd a_inv = llt.solve(Eigen::MatrixXd::Identity(weights_.size(), weights_.size()));
        const Eigen::ArrayXd w = weights_.array();
        const Eigen::ArrayXd a_inv_diag = a_inv.diagonal().array();
        const Eigen::ArrayXd d_weight = 0.5 / w - 0.5 * noise_ * a_inv_diag / (w * w) - 0.5 * alpha.array().square() / (w * w);
        const Eigen::MatrixXd dw = prior_weight_gradients(basis_->lambda_sq(), kernel_);
        out.grad[0] = (d_weight * dw.col(0).array()).sum();
        out.grad[1] = (d_weight * dw.col(1).array()).sum();
        const double d_noise = 0.5 * (n - m) / noise_ + 0.5 * (a_inv_diag / w).sum() - fit / (2.0 * noise_ * noise_) +
                               (alpha.array().square() / w).sum() / (2.0 * noise_);
        out.grad[2] = noise_ * d_noise;
        return out;
    }

    const HarmonicBasis* basis_;
    KernelSpec kernel_;
    double noise_;
    Eigen::VectorXd weights_;
    Eigen::MatrixXd features_;
    Eigen::VectorXd targets_;
    Eigen::MatrixXd gram_;
    Eigen::VectorXd proj_;
    double yty_ = 0.0;
};

/// Standard-normal coefficients scaled by sqrt(Lambda): one prior draw in
/// feature space, deterministic per seed.
inline Eigen::VectorXd prior_coefficients(const Eigen::VectorXd& weights, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    Eigen::VectorXd c(weights.size());
    for (Eigen::Index j = 0; j < c.size(); ++j) {
        c[j] = std::sqrt(weights[j]) * normal(rng);
    }
    return c;
}

/// A prior function draw on the interior nodes (interior-index order);
/// Dirichlet nodes are identically zero.
inline Eigen::VectorXd prior_draw(const HarmonicBasis& basis, KernelSpec kernel, std::uint64_t seed) {
    kernel.dim = 2;
    return basis.phi() * prior_coefficients(prior_weights(basis.lambda_sq(), kernel), seed);
}

}  // namespace boundgp

#endif
