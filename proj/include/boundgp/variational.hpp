#ifndef BOUNDGP_VARIATIONAL_HPP
#define BOUNDGP_VARIATIONAL_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <numbers>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/errors.hpp"
#include "boundgp/gp_regression.hpp"
#include "boundgp/lbfgs.hpp"
#include "boundgp/quadrature.hpp"
#include "boundgp/spectral.hpp"

namespace boundgp {

enum class LikelihoodKind { gaussian, bernoulli, poisson };
enum class Link { logit, probit };

/// Observation model. Poisson uses a log link with a per-point exposure
/// (bin area); an empty exposure vector means unit exposure everywhere.
struct Likelihood {
    LikelihoodKind kind = LikelihoodKind::gaussian;
    double noise_variance = 1.0;
    Link link = Link::logit;
    std::vector<double> exposure;

    static Likelihood gaussian(double noise_variance) {
        if (!(noise_variance > 0.0)) {
            throw ArgumentError("Gaussian likelihood needs positive noise variance");
        }
        return {LikelihoodKind::gaussian, noise_variance, Link::logit, {}};
    }
    static Likelihood bernoulli(Link link = Link::logit) { return {LikelihoodKind::bernoulli, 1.0, link, {}}; }
    static Likelihood poisson(std::vector<double> exposure = {}) {
        for (const double a : exposure) {
            if (!(a > 0.0)) {
                throw ArgumentError("Poisson exposure must be positive");
            }
        }
        return {LikelihoodKind::poisson, 1.0, Link::logit, std::move(exposure)};
    }

    [[nodiscard]] double exposure_at(std::size_t i) const { return exposure.empty() ? 1.0 : exposure.at(i); }
};

/// q(u) = N(mean, L L^T) over feature coefficients; L lower triangular with
/// positive diagonal.
struct GaussianVariational {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov_factor;

    [[nodiscard]] Eigen::MatrixXd covariance() const { return cov_factor * cov_factor.transpose(); }

    /// The prior N(0, Lambda).
    static GaussianVariational prior(const Eigen::VectorXd& weights) {
        return {Eigen::VectorXd::Zero(weights.size()), Eigen::MatrixXd(weights.cwiseSqrt().asDiagonal())};
    }
};

namespace detail {

struct PointTerms {
    double value = 0.0;
    double d_mean = 0.0;
    double d_var = 0.0;
};

inline double softplus(double x) { return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x)); }
inline double sigmoid(double x) {
    if (x >= 0.0) {
        return 1.0 / (1.0 + std::exp(-x));
    }
    const double e = std::exp(x);
    return e / (1.0 + e);
}

inline double log_normal_cdf(double z) {
    if (z > -37.0) {
        return std::log(0.5 * std::erfc(-z / std::numbers::sqrt2));
    }
    return -0.5 * z * z - std::log(-z) - 0.5 * std::log(2.0 * std::numbers::pi) + std::log1p(-1.0 / (z * z));
}

// phi(z) / Phi(z)
inline double inverse_mills(double z) {
    if (z > -37.0) {
        return std::exp(-0.5 * z * z - 0.5 * std::log(2.0 * std::numbers::pi) - log_normal_cdf(z));
    }
    const double z2 = z * z;
    return -z / (1.0 - 1.0 / z2 + 3.0 / (z2 * z2));
}

struct Derivs {
    double value;
    double first;
    double second;
};

// log p(y | f) for labels y in {0,1}, with first and second f-derivatives
inline Derivs bernoulli_log_prob(Link link, double y, double f) {
    const double s = y > 0.5 ? 1.0 : -1.0;
    const double z = s * f;
    if (link == Link::logit) {
        return {-softplus(-z), s * sigmoid(-z), -sigmoid(z) * sigmoid(-z)};
    }
    const double rho = inverse_mills(z);
    return {log_normal_cdf(z), s * rho, -rho * (z + rho)};
}

inline void check_observation(const Likelihood& lik, double y) {
    if (!std::isfinite(y)) {
        throw ArgumentError("observation is not finite");
    }
    if (lik.kind == LikelihoodKind::poisson && (y < 0.0 || y != std::floor(y))) {
        throw ArgumentError("Poisson observations must be non-negative integers");
    }
    if (lik.kind == LikelihoodKind::bernoulli && y != 0.0 && y != 1.0) {
        throw ArgumentError("Bernoulli labels must be 0 or 1");
    }
}

/// E_{N(f|mu,v)}[log p(y|f)] and its partials in mu and v.
inline PointTerms point_expectation(const Likelihood& lik, double y, double mu, double v, double exposure) {
    switch (lik.kind) {
        case LikelihoodKind::gaussian: {
            const double s2 = lik.noise_variance;
            const double r = y - mu;
            return {-0.5 * std::log(2.0 * std::numbers::pi * s2) - (r * r + v) / (2.0 * s2), r / s2, -0.5 / s2};
        }
        case LikelihoodKind::poisson: {
            const double rate = exposure * std::exp(mu + 0.5 * v);
            return {y * (mu + std::log(exposure)) - rate - std::lgamma(y + 1.0), y - rate, -0.5 * rate};
        }
        case LikelihoodKind::bernoulli: {
            const GaussHermite& gh = default_gauss_hermite();
            const double scale = std::sqrt(2.0 * std::max(v, 0.0));
            PointTerms t;
            for (std::size_t k = 0; k < gh.nodes.size(); ++k) {
                const Derivs d = bernoulli_log_prob(lik.link, y, mu + scale * gh.nodes[k]);
                t.value += gh.weights[k] * d.value;
                t.d_mean += gh.weights[k] * d.first;
                t.d_var += gh.weights[k] * d.second;
            }
            const double norm = 1.0 / std::sqrt(std::numbers::pi);
            t.value *= norm;
            t.d_mean *= norm;
            t.d_var *= 0.5 * norm;
            return t;
        }
    }
    return {};
}

}  // namespace detail

/// Pointwise log p(y | f).
inline double log_likelihood(const Likelihood& lik, double y, double f, double exposure = 1.0) {
    detail::check_observation(lik, y);
    switch (lik.kind) {
        case LikelihoodKind::gaussian:
            return -0.5 * std::log(2.0 * std::numbers::pi * lik.noise_variance) -
                   (y - f) * (y - f) / (2.0 * lik.noise_variance);
        case LikelihoodKind::poisson:
            return y * (f + std::log(exposure)) - exposure * std::exp(f) - std::lgamma(y + 1.0);
        case LikelihoodKind::bernoulli:
            return detail::bernoulli_log_prob(lik.link, y, f).value;
    }
    return 0.0;
}

/// E[log p(y|f)] for f ~ N(mu, v) by Gauss-Hermite quadrature, whatever the
/// likelihood.
inline double expected_loglik_quadrature(const Likelihood& lik, double y, double mu, double v, double exposure = 1.0,
                                         const GaussHermite& rule = default_gauss_hermite()) {
    return rule.expectation(mu, v, [&](double f) { return log_likelihood(lik, y, f, exposure); });
}

struct LatentMarginals {
    Eigen::VectorXd mean;
    Eigen::VectorXd variance;
};

/// Marginals of f = Phi u under q: mu = Phi m, v_i = ||Phi_i L||^2.
inline LatentMarginals latent_marginals(const GaussianVariational& q, const Eigen::MatrixXd& features) {
    if (features.cols() != q.mean.size() || q.cov_factor.rows() != q.mean.size() ||
        q.cov_factor.cols() != q.mean.size()) {
        throw ArgumentError("latent_marginals: dimension mismatch");
    }
    const Eigen::MatrixXd half = features * q.cov_factor.triangularView<Eigen::Lower>();
    return {features * q.mean, half.rowwise().squaredNorm()};
}

/// Sum over points of E_q[log p(y_i | f_i)]. Gaussian and Poisson terms are
/// closed form; Bernoulli uses 20-node Gauss-Hermite.
inline double expected_loglik(const Likelihood& lik, const Eigen::VectorXd& y, const Eigen::VectorXd& mu,
                              const Eigen::VectorXd& var) {
    if (y.size() != mu.size() || y.size() != var.size()) {
        throw ArgumentError("expected_loglik: dimension mismatch");
    }
    double acc = 0.0;
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        detail::check_observation(lik, y[i]);
        if (!(var[i] >= 0.0)) {
            throw ArgumentError("expected_loglik: negative variance");
        }
        acc += detail::point_expectation(lik, y[i], mu[i], var[i], lik.exposure_at(static_cast<std::size_t>(i))).value;
    }
    return acc;
}

/// KL(q || N(0, Lambda)).
inline double kl_to_prior(const GaussianVariational& q, const Eigen::VectorXd& weights) {
    const Eigen::Index m = weights.size();
    if (q.mean.size() != m || q.cov_factor.rows() != m || q.cov_factor.cols() != m) {
        throw ArgumentError("kl_to_prior: dimension mismatch");
    }
    const Eigen::MatrixXd lower = q.cov_factor.triangularView<Eigen::Lower>();
    const Eigen::ArrayXd inv_w = weights.cwiseInverse().array();
    const double trace = (lower.rowwise().squaredNorm().array() * inv_w).sum();
    const double maha = (q.mean.array().square() * inv_w).sum();
    const double logdet_prior = weights.array().log().sum();
    const double logdet_q = 2.0 * lower.diagonal().array().abs().log().sum();
    return 0.5 * (trace + maha - static_cast<double>(m) + logdet_prior - logdet_q);
}

inline double elbo(const GaussianVariational& q, const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                   const Likelihood& lik, const Eigen::VectorXd& weights) {
    const LatentMarginals marg = latent_marginals(q, features);
    return expected_loglik(lik, y, marg.mean, marg.variance) - kl_to_prior(q, weights);
}

struct ElboGradient {
    double value = 0.0;
    Eigen::VectorXd d_mean;
    /// Lower triangle only.
    Eigen::MatrixXd d_factor;
    /// d/d(log sigma_f^2, log l)
    Eigen::Vector2d d_theta = Eigen::Vector2d::Zero();
};

/// ELBO with exact gradients w.r.t. the mean, the lower-triangular factor
/// and the log kernel hyperparameters (through Lambda = s(sqrt(lambda_sq))).
inline ElboGradient elbo_with_gradient(const GaussianVariational& q, const Eigen::MatrixXd& features,
                                       const Eigen::VectorXd& y, const Likelihood& lik,
                                       const Eigen::VectorXd& lambda_sq, const KernelSpec& kernel) {
    const Eigen::VectorXd weights = prior_weights(lambda_sq, kernel);
    const Eigen::MatrixXd lower = q.cov_factor.triangularView<Eigen::Lower>();
    const LatentMarginals marg = latent_marginals(q, features);
    const Eigen::Index n = y.size();
    if (features.rows() != n) {
        throw ArgumentError("elbo: feature rows do not match observation count");
    }
    Eigen::VectorXd g_mean(n);
    Eigen::VectorXd g_var(n);
    double ell = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        detail::check_observation(lik, y[i]);
        const detail::PointTerms t = detail::point_expectation(lik, y[i], marg.mean[i], marg.variance[i],
                                                               lik.exposure_at(static_cast<std::size_t>(i)));
        ell += t.value;
        g_mean[i] = t.d_mean;
        g_var[i] = t.d_var;
    }

    ElboGradient out;
    out.value = ell - kl_to_prior(q, weights);
    const Eigen::ArrayXd inv_w = weights.cwiseInverse().array();
    out.d_mean = features.transpose() * g_mean - (q.mean.array() * inv_w).matrix();
    const Eigen::MatrixXd half = features * lower;
    Eigen::MatrixXd d_factor = 2.0 * features.transpose() * (g_var.asDiagonal() * half);
    d_factor -= inv_w.matrix().asDiagonal() * lower;
    d_factor.diagonal() += lower.diagonal().cwiseInverse();
    out.d_factor = d_factor.triangularView<Eigen::Lower>();

    const Eigen::ArrayXd sigma_diag = lower.rowwise().squaredNorm().array();
    const Eigen::ArrayXd d_kl_d_w = 0.5 * (inv_w - (sigma_diag + q.mean.array().square()) * inv_w.square());
    const Eigen::MatrixXd dw = prior_weight_gradients(lambda_sq, kernel);
    out.d_theta[0] = -(d_kl_d_w * dw.col(0).array()).sum();
    out.d_theta[1] = -(d_kl_d_w * dw.col(1).array()).sum();
    return out;
}

/// Closed-form optimum for a Gaussian likelihood:
/// Sigma = (Lambda^{-1} + Phi^T Phi / s2)^{-1}, m = Sigma Phi^T y / s2.
inline GaussianVariational optimal_gaussian_q(const Eigen::MatrixXd& features, const Eigen::VectorXd& y,
                                              double noise_variance, const Eigen::VectorXd& weights) {
    if (!(noise_variance > 0.0)) {
        throw ArgumentError("optimal_gaussian_q: noise variance must be positive");
    }
    if (features.cols() != weights.size() || features.rows() != y.size()) {
        throw ArgumentError("optimal_gaussian_q: dimension mismatch");
    }
    // A = Phi^T Phi + s2 Lambda^{-1} = U U^T (U upper, via the reversed
    // Cholesky), so Sigma = s2 A^{-1} = (sigma U^{-T})(sigma U^{-T})^T.
    Eigen::MatrixXd a = features.transpose() * features;
    a.diagonal() += noise_variance * weights.cwiseInverse();
    const Eigen::MatrixXd reversed = a.reverse();
    Eigen::LLT<Eigen::MatrixXd> llt(reversed);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("optimal_gaussian_q: factorization failed");
    }
    const Eigen::MatrixXd upper = Eigen::MatrixXd(llt.matrixL()).reverse();
    const Eigen::Index m = weights.size();
    GaussianVariational q;
    q.cov_factor = std::sqrt(noise_variance) *
                   upper.transpose().triangularView<Eigen::Lower>().solve(Eigen::MatrixXd::Identity(m, m));
    const Eigen::VectorXd rhs = features.transpose() * y;
    // A^{-1} b = U^{-T} U^{-1} b
    const Eigen::VectorXd tmp = upper.triangularView<Eigen::Upper>().solve(rhs);
    q.mean = upper.transpose().triangularView<Eigen::Lower>().solve(tmp);
    return q;
}

/// Collapsed bound log N(y | 0, Q + s2 I) - tr(K - Q)/(2 s2) with
/// K_uu = Lambda, K_fu = Phi Lambda. Here K_ff equals Q_ff, so the trace
/// term vanishes; evaluated densely as an independent check.
inline double collapsed_bound(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, double noise_variance,
                              const Eigen::VectorXd& weights) {
    if (features.rows() != y.size() || features.cols() != weights.size()) {
        throw ArgumentError("collapsed_bound: dimension mismatch");
    }
    const Eigen::Index n = y.size();
    Eigen::MatrixXd cov = features * weights.asDiagonal() * features.transpose();
    cov.diagonal().array() += noise_variance;
    Eigen::LLT<Eigen::MatrixXd> llt(cov);
    if (llt.info() != Eigen::Success) {
        throw NumericalError("collapsed_bound: covariance not positive definite");
    }
    const Eigen::MatrixXd lower = llt.matrixL();
    const Eigen::VectorXd white = lower.triangularView<Eigen::Lower>().solve(y);
    return -0.5 * white.squaredNorm() - lower.diagonal().array().log().sum() -
           0.5 * static_cast<double>(n) * std::log(2.0 * std::numbers::pi);
}

/// Latent posterior at test features: mean Phi* m, variance ||Phi*_i L||^2.
inline Prediction predict_latent(const GaussianVariational& q, const Eigen::MatrixXd& test_features) {
    const LatentMarginals m = latent_marginals(q, test_features);
    return {m.mean, m.variance};
}

/// P(y = 1) under f ~ N(mu, v). Logit uses Gauss-Hermite with mirrored node
/// pairs summed together, so mu = 0 yields exactly 1/2.
inline double predictive_probability(Link link, double mu, double v) {
    if (link == Link::probit) {
        return 0.5 * std::erfc(-mu / std::sqrt(2.0 * (1.0 + std::max(v, 0.0))));
    }
    if (v <= 0.0) {
        return 0.5 + 0.5 * std::tanh(0.5 * mu);
    }
    const GaussHermite& gh = default_gauss_hermite();
    const double scale = std::sqrt(2.0 * v);
    const std::size_t n = gh.nodes.size();
    double acc = 0.0;
    for (std::size_t k = 0; k < n / 2; ++k) {
        const std::size_t r = n - 1 - k;
        acc += gh.weights[k] *
               (std::tanh(0.5 * (mu + scale * gh.nodes[k])) + std::tanh(0.5 * (mu + scale * gh.nodes[r])));
    }
    if (n % 2 == 1) {
        acc += gh.weights[n / 2] * std::tanh(0.5 * mu);
    }
    return 0.5 + 0.5 * acc / std::sqrt(std::numbers::pi);
}

struct VariationalOptions {
    std::size_t max_iters = 1000;
    double grad_tol = 1e-5;
    /// Train (log sigma_f^2, log l) jointly with q.
    bool optimize_kernel = false;
};

struct VariationalFit {
    GaussianVariational q;
    KernelSpec kernel;
    double elbo = 0.0;
    std::size_t iterations = 0;
    bool converged = false;
    /// ELBO after every accepted step (non-decreasing).
    std::vector<double> trace;
};

namespace detail {

// Optimizer coordinates: mean = D a, L = D B with D = sqrt(Lambda_init)
// fixed, B lower triangular with softplus diagonal, then optionally theta.
struct VariationalLayout {
    Eigen::Index m;
    bool with_theta;
    Eigen::VectorXd scale;

    [[nodiscard]] Eigen::Index size() const { return m + m * (m + 1) / 2 + (with_theta ? 2 : 0); }

    static double inv_softplus(double x) { return x > 30.0 ? x : std::log(std::expm1(x)); }

    [[nodiscard]] Eigen::VectorXd pack(const GaussianVariational& q, const KernelSpec& kernel) const {
        Eigen::VectorXd x(size());
        x.head(m) = q.mean.cwiseQuotient(scale);
        Eigen::Index k = m;
        for (Eigen::Index c = 0; c < m; ++c) {
            for (Eigen::Index r = c; r < m; ++r) {
                const double b = q.cov_factor(r, c) / scale[r];
                x[k++] = r == c ? inv_softplus(b) : b;
            }
        }
        if (with_theta) {
            x[k++] = std::log(kernel.variance);
            x[k++] = std::log(kernel.lengthscale);
        }
        return x;
    }

    void unpack(const Eigen::VectorXd& x, GaussianVariational& q, KernelSpec& kernel) const {
        q.mean = x.head(m).cwiseProduct(scale);
        q.cov_factor = Eigen::MatrixXd::Zero(m, m);
        Eigen::Index k = m;
        for (Eigen::Index c = 0; c < m; ++c) {
            for (Eigen::Index r = c; r < m; ++r) {
                const double b = r == c ? softplus(x[k]) : x[k];
                q.cov_factor(r, c) = scale[r] * b;
                ++k;
            }
        }
        if (with_theta) {
            kernel.variance = std::exp(x[k++]);
            kernel.lengthscale = std::exp(x[k++]);
        }
    }

    [[nodiscard]] Eigen::VectorXd chain(const Eigen::VectorXd& x, const ElboGradient& g) const {
        Eigen::VectorXd out(size());
        out.head(m) = g.d_mean.cwiseProduct(scale);
        Eigen::Index k = m;
        for (Eigen::Index c = 0; c < m; ++c) {
            for (Eigen::Index r = c; r < m; ++r) {
                const double d = g.d_factor(r, c) * scale[r];
                out[k] = r == c ? d * sigmoid(x[k]) : d;
                ++k;
            }
        }
        if (with_theta) {
            out[k++] = g.d_theta[0];
            out[k++] = g.d_theta[1];
        }
        return out;
    }
};

}  // namespace detail

/// Maximizes the ELBO over q (and optionally the kernel hyperparameters)
/// with L-BFGS, starting from q = prior. Phi stays fixed.
inline VariationalFit fit_variational(const Eigen::MatrixXd& features, const Eigen::VectorXd& y, const Likelihood& lik,
                                      const Eigen::VectorXd& lambda_sq, KernelSpec kernel,
                                      const VariationalOptions& options = {}) {
    if (y.size() < 1) {
        throw ArgumentError("fit_variational needs at least one observation");
    }
    if (features.rows() != y.size() || features.cols() != lambda_sq.size()) {
        throw ArgumentError("fit_variational: dimension mismatch");
    }
    kernel.validate();
    for (Eigen::Index i = 0; i < y.size(); ++i) {
        detail::check_observation(lik, y[i]);
    }
    const Eigen::VectorXd init_weights = prior_weights(lambda_sq, kernel);
    const detail::VariationalLayout layout{lambda_sq.size(), options.optimize_kernel, init_weights.cwiseSqrt()};
    const GaussianVariational q0 = GaussianVariational::prior(init_weights);
    const double elbo0 = elbo_with_gradient(q0, features, y, lik, lambda_sq, kernel).value;
    if (!std::isfinite(elbo0)) {
        throw ArgumentError("ELBO is not finite at the initial point");
    }

    GaussianVariational q = q0;
    KernelSpec k = kernel;
    const auto objective = [&](const Eigen::VectorXd& x, Eigen::VectorXd& grad) {
        layout.unpack(x, q, k);
        if (!(k.variance > 0.0) || !(k.lengthscale > 0.0) || !std::isfinite(k.variance) ||
            !std::isfinite(k.lengthscale) || !(q.cov_factor.diagonal().array() > 0.0).all()) {
            grad.setZero(layout.size());
            return std::numeric_limits<double>::infinity();
        }
        const ElboGradient g = elbo_with_gradient(q, features, y, lik, lambda_sq, k);
        grad = -layout.chain(x, g);
        return -g.value;
    };
    LbfgsOptions opts;
    opts.max_iters = options.max_iters;
    opts.grad_tol = options.grad_tol;
    const LbfgsResult r = minimize_lbfgs(objective, layout.pack(q0, kernel), opts);

    VariationalFit fit;
    layout.unpack(r.x, fit.q, k);
    fit.kernel = k;
    fit.elbo = -r.value;
    fit.iterations = r.iterations;
    fit.converged = r.converged;
    fit.trace.reserve(r.trace.size());
    for (const double v : r.trace) {
        fit.trace.push_back(-v);
    }
    return fit;
}

}  // namespace boundgp

#endif
