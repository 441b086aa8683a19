#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "boundgp/full_gp.hpp"
#include "boundgp/synthetic.hpp"
#include "support.hpp"

using namespace boundgp;

TEST(DenseGP, SinglePointPosterior) {
    const KernelSpec k{KernelFamily::se, 2.0, 1.0};
    const DenseGPModel model{k, 0.0};
    const std::vector<Point2> x{{0.0, 0.0}};
    const std::vector<double> y{1.0};
    const std::vector<double> noise{0.5};
    const std::vector<Point2> test{{0.0, 0.0}, {1.0, 0.0}};
    const Prediction p = gp_predict_full(model, x, y, noise, test);
    EXPECT_NEAR(p.mean[0], 2.0 / 2.5, 1e-14);
    EXPECT_NEAR(p.variance[0], 2.0 - 4.0 / 2.5, 1e-14);
    const double kx = 2.0 * std::exp(-0.5);
    EXPECT_NEAR(p.mean[1], kx / 2.5, 1e-14);
    EXPECT_NEAR(p.variance[1], 2.0 - kx * kx / 2.5, 1e-14);
    const double nlml = 0.5 * std::log(2.5) + 0.5 / 2.5 + 0.5 * std::log(2.0 * std::numbers::pi);
    EXPECT_NEAR(nlml_full(model, x, y, noise), nlml, 1e-14);
}

TEST(DenseGP, NoiseFreePointsAreInterpolated) {
    const KernelSpec k{KernelFamily::matern32, 1.0, 0.3};
    const DenseGPModel model = DenseGPModel::with_default_jitter(k);
    const std::vector<Point2> x{{0.1, 0.1}, {0.5, 0.2}, {0.3, 0.8}};
    const std::vector<double> y{0.3, -1.0, 0.0};
    const std::vector<double> noise(3, 0.0);
    const Prediction p = gp_predict_full(model, x, y, noise, x);
    for (int i = 0; i < 3; ++i) {
        EXPECT_NEAR(p.mean[i], y[static_cast<std::size_t>(i)], 1e-6);
        EXPECT_NEAR(p.variance[i], 0.0, 1e-6);
    }
}

TEST(DenseGP, EmptyDataReturnsPrior) {
    const KernelSpec k{KernelFamily::matern12, 0.7, 0.3};
    const std::vector<Point2> test{{0.0, 0.0}, {3.0, 1.0}};
    const Prediction p = gp_predict_full(DenseGPModel{k}, {}, {}, {}, test);
    EXPECT_EQ(p.mean.cwiseAbs().maxCoeff(), 0.0);
    EXPECT_DOUBLE_EQ(p.variance[1], 0.7);
}

TEST(DenseGP, ArgumentChecks) {
    const DenseGPModel model{KernelSpec{}};
    const std::vector<Point2> x{{0.0, 0.0}};
    const std::vector<double> y{1.0};
    EXPECT_THROW(gp_predict_full(model, x, y, std::vector<double>{}, x), ArgumentError);
    EXPECT_THROW(gp_predict_full(model, x, std::vector<double>{}, std::vector<double>{0.1}, x), ArgumentError);
    EXPECT_THROW(gp_predict_full(model, x, y, std::vector<double>{-0.1}, x), ArgumentError);
    EXPECT_THROW(nlml_full(model, {}, {}, {}), ArgumentError);
}

TEST(DenseGP, DuplicateNoiseFreePointsNeedJitter) {
    const KernelSpec k{KernelFamily::se, 1.0, 1.0};
    const std::vector<Point2> x(4, Point2{0.2, 0.2});
    const std::vector<double> y(4, 1.0);
    const std::vector<double> noise(4, 0.0);
    const Prediction p = gp_predict_full(DenseGPModel{k, 1e-10}, x, y, noise, x);
    EXPECT_NEAR(p.mean[0], 1.0, 1e-6);
}

TEST(BoundaryContours, RectangleIsOneLoop) {
    const DomainGrid g(5, 4, 0.5, {0.0, 0.0}, std::vector<std::uint8_t>(20, 1));
    const auto loops = boundary_contours(g);
    ASSERT_EQ(loops.size(), 1u);
    // nodes -1..5 by -1..4 outline: 2*(6+5) unit edges, plus the closing point
    EXPECT_EQ(loops[0].size(), 23u);
    EXPECT_EQ(loops[0].front(), loops[0].back());
    double area = 0.0;
    for (std::size_t k = 0; k + 1 < loops[0].size(); ++k) {
        area += loops[0][k].x * loops[0][k + 1].y - loops[0][k + 1].x * loops[0][k].y;
    }
    EXPECT_NEAR(0.5 * area, 3.0 * 2.5, 1e-12);  // counter-clockwise
}

TEST(BoundaryContours, HoleGivesSecondLoop) {
    // a 3x3 block of exterior nodes leaves 2x2 cells without support
    std::vector<std::uint8_t> mask(121, 1);
    for (int j = 4; j <= 6; ++j) {
        for (int i = 4; i <= 6; ++i) {
            mask[static_cast<std::size_t>(j * 11 + i)] = 0;
        }
    }
    const DomainGrid g(11, 11, 1.0, {0.0, 0.0}, mask);
    const auto loops = boundary_contours(g);
    ASSERT_EQ(loops.size(), 2u);
    EXPECT_GT(loops[0].size(), loops[1].size());
    EXPECT_EQ(loops[1].size(), 9u);
}

TEST(BoundaryPoints, LieOnZeroSet) {
    const DomainGrid g = star_mask(50);
    const auto pts = boundary_points(g, 73);
    ASSERT_EQ(pts.size(), 73u);
    std::vector<double> values(g.interior_count(), 1.0);
    for (const Point2& p : pts) {
        EXPECT_EQ(g.interpolate(values, p), 0.0);
        EXPECT_FALSE(contains(g, p));
    }
    EXPECT_TRUE(boundary_points(g, 0).empty());
}
