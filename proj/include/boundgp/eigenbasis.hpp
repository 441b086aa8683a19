#ifndef BOUNDGP_EIGENBASIS_HPP
#define BOUNDGP_EIGENBASIS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/domain_grid.hpp"
#include "boundgp/eigensolver.hpp"
#include "boundgp/errors.hpp"
#include "boundgp/stencil.hpp"

namespace boundgp {

/// Removes the O(h^2) bias of the nine-point stencil. The stencil computes
/// -lap(u) - (h^2/12) lap^2(u), so a discrete eigenvalue d relates to the
/// continuum one c by d = c - (h^2/12) c^2, whose smaller root is
/// c = 2d / (1 + sqrt(1 - d h^2 / 3)). Modes with d h^2 > 3 are below grid
/// resolution and saturate at 2d.
inline double correct_eigenvalue(double raw, double h) {
    if (!(raw >= 0.0) || !std::isfinite(raw)) {
        throw ArgumentError("correct_eigenvalue: eigenvalue must be non-negative and finite");
    }
    if (!(h >= 0.0)) {
        throw ArgumentError("correct_eigenvalue: spacing must be non-negative");
    }
    const double disc = std::max(0.0, 1.0 - raw * h * h / 3.0);
    return 2.0 * raw / (1.0 + std::sqrt(disc));
}

inline std::vector<double> correct_eigenvalues(std::span<const double> raw, double h) {
    std::vector<double> out;
    out.reserve(raw.size());
    for (const double r : raw) {
        out.push_back(correct_eigenvalue(r, h));
    }
    return out;
}

/// Dirichlet Laplacian eigenfunctions on a masked grid: corrected
/// eigenvalues (ascending) and L2(domain)-orthonormal grid functions
/// (h^2 * sum phi_j^2 = 1), one column per mode in interior-index order.
class HarmonicBasis {
public:
    HarmonicBasis(DomainGrid grid, Eigen::VectorXd lambda_sq, Eigen::MatrixXd phi, double residual_tol = 0.0)
        : grid_(std::move(grid)), lambda_sq_(std::move(lambda_sq)), phi_(std::move(phi)), residual_tol_(residual_tol) {
        if (phi_.cols() != lambda_sq_.size()) {
            throw ArgumentError("basis: eigenvalue count does not match eigenfunction count");
        }
        if (static_cast<std::size_t>(phi_.rows()) != grid_.interior_count()) {
            throw ArgumentError("basis: eigenfunction length does not match interior node count");
        }
        for (Eigen::Index j = 0; j < lambda_sq_.size(); ++j) {
            if (!(lambda_sq_[j] > 0.0) || (j > 0 && lambda_sq_[j] < lambda_sq_[j - 1])) {
                throw ArgumentError("basis: eigenvalues must be positive and ascending");
            }
        }
    }

    [[nodiscard]] const DomainGrid& grid() const noexcept { return grid_; }
    [[nodiscard]] std::size_t size() const noexcept { return static_cast<std::size_t>(lambda_sq_.size()); }
    [[nodiscard]] const Eigen::VectorXd& lambda_sq() const noexcept { return lambda_sq_; }
    [[nodiscard]] const Eigen::MatrixXd& phi() const noexcept { return phi_; }
    [[nodiscard]] double residual_tol() const noexcept { return residual_tol_; }

    /// The first m modes.
    [[nodiscard]] HarmonicBasis truncated(std::size_t m) const {
        if (m == 0 || m > size()) {
            throw ArgumentError("basis: truncation size out of range");
        }
        const auto k = static_cast<Eigen::Index>(m);
        return {grid_, lambda_sq_.head(k), phi_.leftCols(k), residual_tol_};
    }

    /// Feature matrix (|points| x m): bilinear interpolation of every mode,
    /// zero on and outside the boundary.
    [[nodiscard]] Eigen::MatrixXd evaluate(std::span<const Point2> points) const {
        Eigen::MatrixXd features = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(points.size()), phi_.cols());
        for (std::size_t r = 0; r < points.size(); ++r) {
            const BilinearCell cell = grid_.bilinear(points[r]);
            for (std::size_t c = 0; c < 4; ++c) {
                if (cell.interior[c] >= 0 && cell.weight[c] != 0.0) {
                    features.row(static_cast<Eigen::Index>(r)) += cell.weight[c] * phi_.row(cell.interior[c]);
                }
            }
        }
        return features;
    }

    /// Positions of all interior nodes, in interior-index order.
    [[nodiscard]] std::vector<Point2> interior_points() const {
        std::vector<Point2> pts(grid_.interior_count());
        for (std::size_t k = 0; k < pts.size(); ++k) {
            pts[k] = grid_.interior_position(k);
        }
        return pts;
    }

private:
    DomainGrid grid_;
    Eigen::VectorXd lambda_sq_;
    Eigen::MatrixXd phi_;
    double residual_tol_;
};

inline Eigen::MatrixXd evaluate_basis(const HarmonicBasis& basis, std::span<const Point2> points) {
    return basis.evaluate(points);
}

/// Scales unit-norm eigenvectors to L2(domain) normalization and sorts the
/// pairs by corrected eigenvalue.
inline HarmonicBasis normalize_and_build(const DomainGrid& grid, const Eigen::MatrixXd& eigvecs,
                                         std::span<const double> corrected, double residual_tol = 0.0) {
    if (static_cast<std::size_t>(eigvecs.cols()) != corrected.size()) {
        throw ArgumentError("normalize_and_build: eigenvalue count does not match eigenvector count");
    }
    std::vector<std::size_t> order(corrected.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return corrected[a] < corrected[b]; });
    Eigen::VectorXd lambda(static_cast<Eigen::Index>(corrected.size()));
    Eigen::MatrixXd phi(eigvecs.rows(), eigvecs.cols());
    for (std::size_t k = 0; k < order.size(); ++k) {
        const auto col = static_cast<Eigen::Index>(k);
        lambda[col] = corrected[order[k]];
        const auto src = eigvecs.col(static_cast<Eigen::Index>(order[k]));
        phi.col(col) = src / (grid.h() * src.norm());
    }
    return {grid, std::move(lambda), std::move(phi), residual_tol};
}

/// Stencil assembly, eigensolve, eigenvalue correction and normalization.
inline HarmonicBasis build_basis(const DomainGrid& grid, std::size_t m, const EigenOptions& options = {}) {
    const SparseSymmetric stencil = assemble_stencil(grid);
    const EigenSolution solution = solve_eigen(stencil, m, options);
    std::vector<double> raw(solution.values.data(), solution.values.data() + solution.values.size());
    const std::vector<double> corrected = correct_eigenvalues(raw, grid.h());
    return normalize_and_build(grid, solution.vectors, corrected, solution.max_relative_residual);
}

}  // namespace boundgp

#endif
