#ifndef BOUNDGP_SPECTRAL_HPP
#define BOUNDGP_SPECTRAL_HPP

#include <cmath>
#include <numbers>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "boundgp/errors.hpp"

namespace boundgp {

enum class KernelFamily { se, matern12, matern32, matern52 };

inline KernelFamily parse_kernel_family(std::string_view name) {
    if (name == "se") return KernelFamily::se;
    if (name == "matern12") return KernelFamily::matern12;
    if (name == "matern32") return KernelFamily::matern32;
    if (name == "matern52") return KernelFamily::matern52;
    throw ArgumentError("unknown kernel '" + std::string(name) + "' (expected se|matern12|matern32|matern52)");
}

inline std::string_view to_string(KernelFamily family) {
    switch (family) {
        case KernelFamily::se: return "se";
        case KernelFamily::matern12: return "matern12";
        case KernelFamily::matern32: return "matern32";
        case KernelFamily::matern52: return "matern52";
    }
    return "?";
}

/// Smoothness nu of a Matern family; 0 for the squared exponential.
inline double matern_nu(KernelFamily family) {
    switch (family) {
        case KernelFamily::matern12: return 0.5;
        case KernelFamily::matern32: return 1.5;
        case KernelFamily::matern52: return 2.5;
        case KernelFamily::se: break;
    }
    return 0.0;
}

/// Stationary isotropic covariance with magnitude sigma_f^2 (`variance`)
/// and lengthscale l.
struct KernelSpec {
    KernelFamily family = KernelFamily::matern32;
    double variance = 1.0;
    double lengthscale = 1.0;
    int dim = 2;

    void validate() const {
        if (!(variance > 0.0) || !std::isfinite(variance)) {
            throw ArgumentError("kernel variance must be positive");
        }
        if (!(lengthscale > 0.0) || !std::isfinite(lengthscale)) {
            throw ArgumentError("kernel lengthscale must be positive");
        }
        if (dim != 1 && dim != 2) {
            throw ArgumentError("kernel input dimension must be 1 or 2");
        }
    }
};

/// kappa(r) as a function of the distance ||r||.
inline double covariance(const KernelSpec& k, double distance) {
    const double r = std::abs(distance) / k.lengthscale;
    switch (k.family) {
        case KernelFamily::se:
            return k.variance * std::exp(-0.5 * r * r);
        case KernelFamily::matern12:
            return k.variance * std::exp(-r);
        case KernelFamily::matern32: {
            const double a = std::sqrt(3.0) * r;
            return k.variance * (1.0 + a) * std::exp(-a);
        }
        case KernelFamily::matern52: {
            const double a = std::sqrt(5.0) * r;
            return k.variance * (1.0 + a + a * a / 3.0) * std::exp(-a);
        }
    }
    return 0.0;
}

inline double covariance(const KernelSpec& k, const Eigen::Ref<const Eigen::VectorXd>& displacement) {
    return covariance(k, displacement.norm());
}

namespace detail {

inline double matern_constant(double nu, int d) {
    const double half_d = 0.5 * d;
    return std::tgamma(nu + half_d) / std::tgamma(nu) * std::pow(2.0, d) *
           std::pow(std::numbers::pi, half_d) * std::pow(2.0 * nu, nu);
}

}  // namespace detail

/// Spectral density s(omega) at radial frequency omega >= 0, under the
/// Fourier convention s = int kappa(r) exp(-i w.r) dr.
inline double spectral_density(const KernelSpec& k, double omega) {
    if (!(omega >= 0.0)) {
        throw ArgumentError("spectral density needs omega >= 0");
    }
    const double l = k.lengthscale;
    const int d = k.dim;
    if (k.family == KernelFamily::se) {
        return k.variance * std::pow(2.0 * std::numbers::pi * l * l, 0.5 * d) * std::exp(-0.5 * omega * omega * l * l);
    }
    const double nu = matern_nu(k.family);
    return k.variance * detail::matern_constant(nu, d) * std::pow(l, -2.0 * nu) *
           std::pow(2.0 * nu / (l * l) + omega * omega, -(2.0 * nu + d) / 2.0);
}

struct SpectralGradient {
    double d_log_variance = 0.0;
    double d_log_lengthscale = 0.0;
};

/// Partial derivatives of s(omega) w.r.t. log sigma_f^2 and log l.
inline SpectralGradient spectral_density_grad(const KernelSpec& k, double omega) {
    const double s = spectral_density(k, omega);
    const double l = k.lengthscale;
    const int d = k.dim;
    double dlog_dlogl = 0.0;
    if (k.family == KernelFamily::se) {
        dlog_dlogl = d - omega * omega * l * l;
    } else {
        const double nu = matern_nu(k.family);
        const double a = 2.0 * nu / (l * l);
        dlog_dlogl = -2.0 * nu + (2.0 * nu + d) * a / (a + omega * omega);
    }
    return {s, s * dlog_dlogl};
}

}  // namespace boundgp

#endif
