#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "boundgp/spectral.hpp"

using namespace boundgp;

namespace {

constexpr double pi = std::numbers::pi;

// Radial inverse transform: kappa(0) = (2 pi)^-d int s(w) dw.
double integrate_density(const KernelSpec& k) {
    const double upper = 400.0 / k.lengthscale;
    const int steps = 400000;
    const double dw = upper / steps;
    double acc = 0.0;
    for (int i = 0; i < steps; ++i) {
        const double w = (i + 0.5) * dw;
        const double shell = k.dim == 2 ? 2.0 * pi * w : 2.0;
        acc += spectral_density(k, w) * shell * dw;
    }
    return acc / std::pow(2.0 * pi, k.dim);
}

}  // namespace

TEST(Kernel, ParseAndNames) {
    EXPECT_EQ(parse_kernel_family("se"), KernelFamily::se);
    EXPECT_EQ(parse_kernel_family("matern12"), KernelFamily::matern12);
    EXPECT_EQ(parse_kernel_family("matern32"), KernelFamily::matern32);
    EXPECT_EQ(parse_kernel_family("matern52"), KernelFamily::matern52);
    EXPECT_THROW(parse_kernel_family("rbf"), ArgumentError);
    EXPECT_EQ(to_string(KernelFamily::matern32), "matern32");
    EXPECT_EQ(matern_nu(KernelFamily::matern52), 2.5);
}

TEST(Kernel, CovarianceValues) {
    const KernelSpec se{KernelFamily::se, 2.0, 0.5};
    EXPECT_DOUBLE_EQ(covariance(se, 0.0), 2.0);
    EXPECT_DOUBLE_EQ(covariance(se, 0.5), 2.0 * std::exp(-0.5));
    const KernelSpec m12{KernelFamily::matern12, 1.0, 2.0};
    EXPECT_DOUBLE_EQ(covariance(m12, 2.0), std::exp(-1.0));
    const KernelSpec m32{KernelFamily::matern32, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(covariance(m32, 1.0), (1.0 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0)));
    const KernelSpec m52{KernelFamily::matern52, 1.0, 1.0};
    EXPECT_DOUBLE_EQ(covariance(m52, 1.0), (1.0 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0)));
    Eigen::Vector2d r(0.3, 0.4);
    EXPECT_DOUBLE_EQ(covariance(se, r), covariance(se, 0.5));
}

TEST(Kernel, Validation) {
    EXPECT_THROW((KernelSpec{KernelFamily::se, 0.0, 1.0}.validate()), ArgumentError);
    EXPECT_THROW((KernelSpec{KernelFamily::se, 1.0, -1.0}.validate()), ArgumentError);
    EXPECT_THROW((KernelSpec{KernelFamily::se, 1.0, 1.0, 3}.validate()), ArgumentError);
    EXPECT_THROW(spectral_density(KernelSpec{}, -1.0), ArgumentError);
}

TEST(SpectralDensity, ClosedFormsAtZero) {
    const KernelSpec se{KernelFamily::se, 1.5, 0.3};
    EXPECT_NEAR(spectral_density(se, 0.0), 1.5 * 2.0 * pi * 0.09, 1e-14);
    // Matern 1/2 in 2D: 2 pi l^2 sigma^2 / (1 + l^2 w^2)^(3/2)
    const KernelSpec m12{KernelFamily::matern12, 1.0, 0.7};
    EXPECT_NEAR(spectral_density(m12, 2.0), 2.0 * pi * 0.49 / std::pow(1.0 + 0.49 * 4.0, 1.5), 1e-12);
    // 1D Matern 1/2: 2 l sigma^2 / (1 + l^2 w^2)
    const KernelSpec m12_1d{KernelFamily::matern12, 1.0, 0.7, 1};
    EXPECT_NEAR(spectral_density(m12_1d, 2.0), 2.0 * 0.7 / (1.0 + 0.49 * 4.0), 1e-12);
}

TEST(SpectralDensity, InvertsToKernelVariance) {
    for (const KernelFamily f :
         {KernelFamily::se, KernelFamily::matern12, KernelFamily::matern32, KernelFamily::matern52}) {
        for (const int d : {1, 2}) {
            const KernelSpec k{f, 1.3, 0.2, d};
            const double tol = f == KernelFamily::matern12 ? 1e-2 : 1e-4;
            EXPECT_NEAR(integrate_density(k), 1.3, tol * 1.3) << to_string(f) << " d=" << d;
        }
    }
}

TEST(SpectralDensity, GradientMatchesFiniteDifferences) {
    for (const KernelFamily f :
         {KernelFamily::se, KernelFamily::matern12, KernelFamily::matern32, KernelFamily::matern52}) {
        for (const double w : {0.0, 1.0, 7.0, 30.0}) {
            const KernelSpec k{f, 0.8, 0.15};
            const SpectralGradient g = spectral_density_grad(k, w);
            const double e = 1e-5;
            KernelSpec up = k;
            KernelSpec dn = k;
            up.variance *= std::exp(e);
            dn.variance *= std::exp(-e);
            const double fd_v = (spectral_density(up, w) - spectral_density(dn, w)) / (2 * e);
            up = k;
            dn = k;
            up.lengthscale *= std::exp(e);
            dn.lengthscale *= std::exp(-e);
            const double fd_l = (spectral_density(up, w) - spectral_density(dn, w)) / (2 * e);
            EXPECT_NEAR(g.d_log_variance, fd_v, 1e-6 * std::abs(fd_v) + 1e-300);
            EXPECT_NEAR(g.d_log_lengthscale, fd_l, 1e-6 * std::max(std::abs(fd_l), spectral_density(k, w)));
        }
    }
}
