#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

#include "boundgp/stencil.hpp"
#include "boundgp/synthetic.hpp"
#include "support.hpp"

using namespace boundgp;

TEST(Stencil, FullyInteriorRowsSumToZero) {
    const DomainGrid g = DomainGrid::rectangle(7, 7, 1.0, 1.0);
    const SparseSymmetric a = assemble_stencil(g);
    for (std::size_t r = 0; r < a.n; ++r) {
        const Node n = g.node_of(r);
        if (n.i == 0 || n.j == 0 || n.i == 6 || n.j == 6) {
            continue;
        }
        ASSERT_EQ(a.row_offsets[r + 1] - a.row_offsets[r], 9);
        double sum = 0.0;
        for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
            sum += a.values[static_cast<std::size_t>(k)];
        }
        EXPECT_EQ(sum, 0.0);
    }
}

TEST(Stencil, WeightsAndSymmetry) {
    const DomainGrid g = star_mask(30);
    const SparseSymmetric a = assemble_stencil(g);
    const double h2 = g.h() * g.h();
    EXPECT_LE(a.nonzeros(), 9 * a.n);
    const Eigen::SparseMatrix<double> s = a.view();
    const Eigen::SparseMatrix<double> diff = s - Eigen::SparseMatrix<double>(s.transpose());
    EXPECT_EQ(diff.norm(), 0.0);
    for (std::size_t r = 0; r < a.n; ++r) {
        EXPECT_NEAR(a.diagonal(r) * h2, 10.0 / 3.0, 1e-13);
        for (int k = a.row_offsets[r]; k + 1 < a.row_offsets[r + 1]; ++k) {
            EXPECT_LT(a.col_indices[static_cast<std::size_t>(k)], a.col_indices[static_cast<std::size_t>(k) + 1]);
        }
    }
}

TEST(Stencil, ThreeByThreeByHand) {
    const DomainGrid g = DomainGrid::rectangle(3, 3, 1.0, 1.0);  // h = 1/4
    const SparseSymmetric a = assemble_stencil(g);
    EXPECT_EQ(a.nonzeros(), 4u * 4u + 4u * 6u + 9u);
    const Eigen::MatrixXd d = Eigen::MatrixXd(Eigen::SparseMatrix<double>(a.view())) / 16.0;
    // weights are rounded to a 48-bit mantissa
    EXPECT_NEAR(d(4, 4), 10.0 / 3.0, 1e-13);
    EXPECT_NEAR(d(4, 1), -2.0 / 3.0, 1e-13);
    EXPECT_NEAR(d(4, 0), -1.0 / 6.0, 1e-13);
    EXPECT_DOUBLE_EQ(d(0, 8), 0.0);
}

TEST(Stencil, ApplyMatchesEigenAndIsDeterministic) {
    const DomainGrid g = star_mask(25);
    const SparseSymmetric a = assemble_stencil(g);
    std::mt19937_64 rng(3);
    const Eigen::VectorXd x = support::random_matrix(rng, static_cast<Eigen::Index>(a.n), 1);
    const Eigen::VectorXd y1 = apply(a, x);
    const Eigen::VectorXd y2 = apply(a, x);
    EXPECT_EQ((y1 - y2).cwiseAbs().maxCoeff(), 0.0);
    const Eigen::VectorXd ref = a.view() * x;
    EXPECT_LT((y1 - ref).cwiseAbs().maxCoeff(), 1e-9 * ref.cwiseAbs().maxCoeff());
    EXPECT_THROW(apply(a, Eigen::VectorXd::Zero(3)), ArgumentError);
}

TEST(Stencil, PositiveDefinite) {
    const DomainGrid g = star_mask(20);
    const Eigen::MatrixXd d = Eigen::MatrixXd(Eigen::SparseMatrix<double>(assemble_stencil(g).view()));
    Eigen::LLT<Eigen::MatrixXd> llt(d);
    EXPECT_EQ(llt.info(), Eigen::Success);
}

TEST(Stencil, ActionOnSmoothFunctionApproximatesLaplacian) {
    // -lap of sin(pi x) sin(pi y) is 2 pi^2 times itself
    const DomainGrid g = DomainGrid::rectangle(63, 63, 1.0, 1.0);
    const SparseSymmetric a = assemble_stencil(g);
    Eigen::VectorXd u(static_cast<Eigen::Index>(a.n));
    for (std::size_t k = 0; k < a.n; ++k) {
        const Point2 p = g.interior_position(k);
        u[static_cast<Eigen::Index>(k)] = std::sin(std::numbers::pi * p.x) * std::sin(std::numbers::pi * p.y);
    }
    const Eigen::VectorXd lu = apply(a, u);
    const double ratio = lu.dot(u) / u.squaredNorm();
    EXPECT_NEAR(ratio, 2.0 * std::numbers::pi * std::numbers::pi, 2e-2);
}

TEST(Stencil, MatrixMarketOutput) {
    const DomainGrid g = DomainGrid::rectangle(3, 3, 1.0, 1.0);
    const SparseSymmetric a = assemble_stencil(g);
    std::ostringstream out;
    write_matrix_market(out, a);
    const std::string s = out.str();
    EXPECT_EQ(s.rfind("%%MatrixMarket matrix coordinate real", 0), 0u);
    EXPECT_NE(s.find("9 9"), std::string::npos);
}
