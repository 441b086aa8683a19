#ifndef BOUNDGP_STENCIL_HPP
#define BOUNDGP_STENCIL_HPP

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "boundgp/domain_grid.hpp"
#include "boundgp/errors.hpp"

namespace boundgp {

/// Symmetric matrix in compressed-row layout; column indices ascend within
/// each row.
struct SparseSymmetric {
    std::size_t n = 0;
    std::vector<int> row_offsets;
    std::vector<int> col_indices;
    std::vector<double> values;

    [[nodiscard]] std::size_t nonzeros() const noexcept { return values.size(); }

    /// Zero-copy view as an Eigen row-major sparse matrix.
    [[nodiscard]] Eigen::Map<const Eigen::SparseMatrix<double, Eigen::RowMajor, int>> view() const {
        return {static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(values.size()),
                row_offsets.data(), col_indices.data(), values.data()};
    }

    [[nodiscard]] double diagonal(std::size_t r) const {
        for (int k = row_offsets[r]; k < row_offsets[r + 1]; ++k) {
            if (static_cast<std::size_t>(col_indices[k]) == r) {
                return values[k];
            }
        }
        return 0.0;
    }
};

/// Nine-point discretization of -Laplacian on the interior nodes. Edge
/// neighbours weigh -2/3, diagonal neighbours -1/6 and the centre +10/3, all
/// over h^2; Dirichlet neighbours are dropped.
inline SparseSymmetric assemble_stencil(const DomainGrid& grid) {
    // weights are 20, -4, -1 times unit = 1/(6h^2); the low 5 mantissa bits
    // of unit are cleared so every partial row sum is exact
    int exponent = 0;
    const double frac = std::frexp(1.0 / (6.0 * grid.h() * grid.h()), &exponent);
    const double unit = std::ldexp(std::floor(std::ldexp(frac, 48)), exponent - 48);
    const double centre = 20.0 * unit;
    const double edge = -4.0 * unit;
    const double diag = -unit;

    SparseSymmetric a;
    a.n = grid.interior_count();
    a.row_offsets.reserve(a.n + 1);
    a.col_indices.reserve(9 * a.n);
    a.values.reserve(9 * a.n);
    a.row_offsets.push_back(0);
    for (std::size_t r = 0; r < a.n; ++r) {
        const Node node = grid.node_of(r);
        const auto i = static_cast<std::int64_t>(node.i);
        const auto j = static_cast<std::int64_t>(node.j);
        // (dj outer, di inner) visits neighbours in ascending interior index
        for (std::int64_t dj = -1; dj <= 1; ++dj) {
            for (std::int64_t di = -1; di <= 1; ++di) {
                const std::int64_t c = grid.index_of(i + di, j + dj);
                if (c < 0) {
                    continue;
                }
                double v = diag;
                if (di == 0 && dj == 0) {
                    v = centre;
                } else if (di == 0 || dj == 0) {
                    v = edge;
                }
                a.col_indices.push_back(static_cast<int>(c));
                a.values.push_back(v);
            }
        }
        a.row_offsets.push_back(static_cast<int>(a.values.size()));
    }
    return a;
}

/// y = A x with a fixed per-row summation order.
inline Eigen::VectorXd apply(const SparseSymmetric& a, const Eigen::Ref<const Eigen::VectorXd>& x) {
    if (static_cast<std::size_t>(x.size()) != a.n) {
        throw ArgumentError("apply: vector length does not match matrix dimension");
    }
    Eigen::VectorXd y(static_cast<Eigen::Index>(a.n));
    for (std::size_t r = 0; r < a.n; ++r) {
        double acc = 0.0;
        for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
            acc += a.values[k] * x[a.col_indices[k]];
        }
        y[static_cast<Eigen::Index>(r)] = acc;
    }
    return y;
}

/// Matrix Market coordinate dump (1-based, general storage).
inline void write_matrix_market(std::ostream& out, const SparseSymmetric& a) {
    out << "%%MatrixMarket matrix coordinate real general\n";
    out << a.n << ' ' << a.n << ' ' << a.nonzeros() << '\n';
    out.precision(17);
    for (std::size_t r = 0; r < a.n; ++r) {
        for (int k = a.row_offsets[r]; k < a.row_offsets[r + 1]; ++k) {
            out << r + 1 << ' ' << a.col_indices[k] + 1 << ' ' << a.values[k] << '\n';
        }
    }
}

}  // namespace boundgp

#endif
