#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "boundgp/eigenbasis.hpp"
#include "boundgp/full_gp.hpp"
#include "boundgp/synthetic.hpp"

using namespace boundgp;

namespace {

constexpr double pi = std::numbers::pi;

// Exact eigenvalues of the nine-point operator on an nx-by-ny rectangle.
std::vector<double> discrete_rectangle_spectrum(std::size_t nx, std::size_t ny, double h) {
    std::vector<double> out;
    for (std::size_t p = 1; p <= nx; ++p) {
        for (std::size_t q = 1; q <= ny; ++q) {
            const double ca = std::cos(static_cast<double>(p) * pi / static_cast<double>(nx + 1));
            const double cb = std::cos(static_cast<double>(q) * pi / static_cast<double>(ny + 1));
            out.push_back((10.0 / 3.0 - (4.0 / 3.0) * (ca + cb) - (2.0 / 3.0) * ca * cb) / (h * h));
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

}  // namespace

TEST(EigenvalueCorrection, InvertsStencilBias) {
    for (const double c : {1.0, 20.0, 300.0, 2000.0}) {
        const double h = 0.02;
        const double d = c - h * h * c * c / 12.0;
        EXPECT_NEAR(correct_eigenvalue(d, h), c, 1e-10 * c);
    }
    EXPECT_EQ(correct_eigenvalue(7.5, 0.0), 7.5);
    EXPECT_EQ(correct_eigenvalue(0.0, 0.1), 0.0);
    // beyond grid resolution the correction saturates at twice the input
    EXPECT_DOUBLE_EQ(correct_eigenvalue(400.0, 0.1), 800.0);
    EXPECT_THROW(correct_eigenvalue(-1.0, 0.1), ArgumentError);
    EXPECT_THROW(correct_eigenvalue(1.0, -0.1), ArgumentError);
    const std::vector<double> raw{1.0, 2.0};
    EXPECT_EQ(correct_eigenvalues(raw, 0.0), raw);
}

TEST(Eigensolver, MatchesDiscreteRectangleSpectrum) {
    const DomainGrid g = DomainGrid::rectangle(41, 20, 2.1, 1.05);
    const SparseSymmetric a = assemble_stencil(g);
    EigenOptions opts;
    opts.dense_limit = 1;  // force the Krylov path
    const EigenSolution s = solve_eigen(a, 12, opts);
    EXPECT_FALSE(s.dense);
    const auto exact = discrete_rectangle_spectrum(41, 20, g.h());
    for (Eigen::Index k = 0; k < 12; ++k) {
        EXPECT_NEAR(s.values[k], exact[static_cast<std::size_t>(k)], 1e-9 * exact[static_cast<std::size_t>(k)]);
    }
    EXPECT_LE(s.max_relative_residual, opts.tol);
}

TEST(Eigensolver, KrylovAgreesWithDense) {
    const DomainGrid g = star_mask(34);
    const SparseSymmetric a = assemble_stencil(g);
    EigenOptions dense;
    dense.dense_limit = a.n;
    const EigenSolution d = solve_eigen(a, 30, dense);
    ASSERT_TRUE(d.dense);
    // the star is symmetric, so pick a cut that does not split a degenerate pair
    Eigen::Index m = 20;
    while (d.values[m] < d.values[m - 1] * (1.0 + 1e-6)) {
        ++m;
    }
    EigenOptions krylov;
    krylov.dense_limit = 1;
    const EigenSolution k = solve_eigen(a, static_cast<std::size_t>(m), krylov);
    ASSERT_FALSE(k.dense);
    for (Eigen::Index j = 0; j < m; ++j) {
        EXPECT_NEAR(k.values[j], d.values[j], 1e-9 * d.values[j]);
    }
    const Eigen::MatrixXd pk = k.vectors * k.vectors.transpose();
    const Eigen::MatrixXd pd = d.vectors.leftCols(m) * d.vectors.leftCols(m).transpose();
    EXPECT_LT((pk - pd).norm(), 1e-6);
}

TEST(Eigensolver, ResolvesDegeneratePairsOnSquare) {
    // on a square, modes (1,2) and (2,1) share an eigenvalue
    const std::size_t n = 30;
    const DomainGrid g = DomainGrid::rectangle(n, n, 1.0, 1.0);
    EigenOptions opts;
    opts.dense_limit = 1;
    const EigenSolution s = solve_eigen(assemble_stencil(g), 6, opts);
    const auto exact = discrete_rectangle_spectrum(n, n, g.h());
    for (Eigen::Index k = 0; k < 6; ++k) {
        EXPECT_NEAR(s.values[k], exact[static_cast<std::size_t>(k)], 1e-9 * exact[static_cast<std::size_t>(k)]);
    }
    Eigen::MatrixXd analytic(static_cast<Eigen::Index>(g.interior_count()), 2);
    for (std::size_t k = 0; k < g.interior_count(); ++k) {
        const Point2 p = g.interior_position(k);
        analytic(static_cast<Eigen::Index>(k), 0) = std::sin(pi * p.x) * std::sin(2.0 * pi * p.y);
        analytic(static_cast<Eigen::Index>(k), 1) = std::sin(2.0 * pi * p.x) * std::sin(pi * p.y);
    }
    analytic.col(0).normalize();
    analytic.col(1).normalize();
    const Eigen::MatrixXd computed = s.vectors.middleCols(1, 2);
    const Eigen::MatrixXd diff = computed * computed.transpose() - analytic * analytic.transpose();
    EXPECT_LT(diff.norm(), 1e-7);
}

TEST(Eigensolver, DeterministicWithSignConvention) {
    const DomainGrid g = star_mask(30);
    const SparseSymmetric a = assemble_stencil(g);
    EigenOptions opts;
    opts.dense_limit = 1;
    const EigenSolution s1 = solve_eigen(a, 10, opts);
    const EigenSolution s2 = solve_eigen(a, 10, opts);
    EXPECT_EQ((s1.values - s2.values).cwiseAbs().maxCoeff(), 0.0);
    EXPECT_EQ((s1.vectors - s2.vectors).cwiseAbs().maxCoeff(), 0.0);
    for (Eigen::Index c = 0; c < s1.vectors.cols(); ++c) {
        Eigen::Index at = 0;
        s1.vectors.col(c).cwiseAbs().maxCoeff(&at);
        EXPECT_GT(s1.vectors(at, c), 0.0);
        EXPECT_NEAR(s1.vectors.col(c).norm(), 1.0, 1e-12);
    }
}

TEST(Eigensolver, RejectsBadModeCounts) {
    const DomainGrid g = DomainGrid::rectangle(4, 4, 1.0, 1.0);
    const SparseSymmetric a = assemble_stencil(g);
    EXPECT_THROW(solve_eigen(a, 0), ArgumentError);
    EXPECT_THROW(solve_eigen(a, 17), ArgumentError);
    EXPECT_EQ(solve_eigen(a, 16).values.size(), 16);
}

TEST(HarmonicBasis, NormalizedAndOrthogonal) {
    const HarmonicBasis b = build_basis(star_mask(40), 15);
    const double h2 = b.grid().h() * b.grid().h();
    const Eigen::MatrixXd gram = h2 * b.phi().transpose() * b.phi();
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(15, 15)).cwiseAbs().maxCoeff(), 1e-8);
    for (Eigen::Index j = 1; j < 15; ++j) {
        EXPECT_GE(b.lambda_sq()[j], b.lambda_sq()[j - 1]);
    }
}

TEST(HarmonicBasis, UnitSquareLowestMode) {
    const HarmonicBasis b = build_basis(DomainGrid::rectangle(60, 60, 1.0, 1.0), 1);
    EXPECT_NEAR(b.lambda_sq()[0], 2.0 * pi * pi, 1e-6 * 2.0 * pi * pi);
}

TEST(HarmonicBasis, ExactZeroOnBoundary) {
    const HarmonicBasis b = build_basis(star_mask(40), 12);
    const DomainGrid& g = b.grid();
    std::vector<Point2> outside;
    for (std::size_t j = 0; j < g.ny(); ++j) {
        for (std::size_t i = 0; i < g.nx(); ++i) {
            if (!g.interior(static_cast<std::int64_t>(i), static_cast<std::int64_t>(j))) {
                outside.push_back(g.position(i, j));
            }
        }
    }
    const auto contour = boundary_points(g, 200);
    outside.insert(outside.end(), contour.begin(), contour.end());
    outside.push_back({-3.0, 0.5});
    const Eigen::MatrixXd f = b.evaluate(outside);
    EXPECT_EQ(f.cwiseAbs().maxCoeff(), 0.0);
}

TEST(HarmonicBasis, EvaluateAtNodesReturnsGridValues) {
    const HarmonicBasis b = build_basis(star_mask(30), 5);
    const Eigen::MatrixXd f = b.evaluate(b.interior_points());
    EXPECT_EQ((f - b.phi()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(HarmonicBasis, TruncationAndValidation) {
    const HarmonicBasis b = build_basis(star_mask(30), 8);
    const HarmonicBasis t = b.truncated(3);
    EXPECT_EQ(t.size(), 3u);
    EXPECT_EQ(t.lambda_sq()[2], b.lambda_sq()[2]);
    EXPECT_THROW(b.truncated(9), ArgumentError);
    EXPECT_THROW(b.truncated(0), ArgumentError);
    Eigen::VectorXd bad = b.lambda_sq();
    std::swap(bad[0], bad[1]);
    EXPECT_THROW(HarmonicBasis(b.grid(), bad, b.phi()), ArgumentError);
    EXPECT_THROW(HarmonicBasis(b.grid(), b.lambda_sq().head(3), b.phi()), ArgumentError);
}
