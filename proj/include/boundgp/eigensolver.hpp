#ifndef BOUNDGP_EIGENSOLVER_HPP
#define BOUNDGP_EIGENSOLVER_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <random>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include "boundgp/errors.hpp"
#include "boundgp/stencil.hpp"

namespace boundgp {

struct EigenOptions {
    /// Required relative residual ||Av - lv|| <= tol * l.
    double tol = 1e-8;
    std::size_t max_restarts = 300;
    /// Krylov subspace dimension; 0 selects max(2m+20, 40).
    std::size_t krylov_dim = 0;
    /// Matrices with at most this many rows use a dense solver; 0 selects
    /// twice the Krylov dimension (at least 200).
    std::size_t dense_limit = 0;
    std::uint64_t seed = 0x9E3779B97F4A7C15ULL;
};

struct EigenSolution {
    Eigen::VectorXd values;   // ascending
    Eigen::MatrixXd vectors;  // unit 2-norm columns
    double max_relative_residual = 0.0;
    std::size_t restarts = 0;
    std::size_t passes = 0;
    bool dense = false;
};

namespace detail {

struct RitzPairs {
    Eigen::VectorXd theta;  // descending
    Eigen::MatrixXd vectors;
    std::size_t restarts = 0;
    double worst_estimate = 0.0;
};

inline Eigen::VectorXd random_unit_vector(std::mt19937_64& rng, Eigen::Index n) {
    std::uniform_real_distribution<double> dist(-1.0, 1.0);
    Eigen::VectorXd v(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        v[i] = dist(rng);
    }
    return v.normalized();
}

// Two passes of classical Gram-Schmidt against the first k columns of V and
// against the deflation block D. Returns the accumulated projection onto V.
inline Eigen::VectorXd orthogonalize(Eigen::VectorXd& w, const Eigen::MatrixXd& basis, Eigen::Index k,
                                     const Eigen::MatrixXd& deflation) {
    Eigen::VectorXd coeffs = Eigen::VectorXd::Zero(k);
    for (int pass = 0; pass < 2; ++pass) {
        if (deflation.cols() > 0) {
            w.noalias() -= deflation * (deflation.transpose() * w);
        }
        if (k > 0) {
            const Eigen::VectorXd c = basis.leftCols(k).transpose() * w;
            w.noalias() -= basis.leftCols(k) * c;
            coeffs += c;
        }
    }
    return coeffs;
}

/// Krylov-Schur iteration for the q largest eigenvalues of a symmetric
/// operator restricted to the orthogonal complement of `deflation`.
/// `accept(vectors, theta)` performs the final residual check on candidate
/// Ritz pairs; rejected candidates tighten the internal tolerance.
template <class Operator, class Accept>
RitzPairs krylov_schur(Operator&& op, Eigen::Index n, Eigen::Index q, Eigen::Index p, const Eigen::MatrixXd& deflation,
                       Eigen::VectorXd start, double tol, std::size_t max_restarts, std::mt19937_64& rng,
                       Accept&& accept) {
    Eigen::MatrixXd basis(n, p + 1);
    Eigen::MatrixXd projected = Eigen::MatrixXd::Zero(p, p);

    orthogonalize(start, basis, 0, deflation);
    basis.col(0) = start.normalized();

    double inner_tol = tol;
    Eigen::Index filled = 0;
    RitzPairs out;
    for (std::size_t restart = 0; restart <= max_restarts; ++restart) {
        double beta = 0.0;
        for (Eigen::Index j = filled; j < p; ++j) {
            Eigen::VectorXd w = op(basis.col(j));
            const double w_norm = w.norm();
            const Eigen::VectorXd h = orthogonalize(w, basis, j + 1, deflation);
            projected.block(0, j, j + 1, 1) = h;
            projected.block(j, 0, 1, j + 1) = h.transpose();
            beta = w.norm();
            if (beta <= 1e-12 * std::max(w_norm, 1e-300)) {
                // invariant subspace reached: continue with a fresh direction
                w = random_unit_vector(rng, n);
                orthogonalize(w, basis, j + 1, deflation);
                basis.col(j + 1) = w.normalized();
                beta = 0.0;
            } else {
                basis.col(j + 1) = w / beta;
            }
        }

        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(projected);
        if (eig.info() != Eigen::Success) {
            throw NumericalError("Krylov-Schur: projected eigenproblem failed");
        }
        // descending order
        const Eigen::VectorXd theta = eig.eigenvalues().reverse();
        const Eigen::MatrixXd schur = eig.eigenvectors().rowwise().reverse();

        bool converged = true;
        double worst = 0.0;
        for (Eigen::Index i = 0; i < q; ++i) {
            const double estimate = std::abs(beta * schur(p - 1, i));
            const double scale = std::max(std::abs(theta[i]), 1e-300);
            worst = std::max(worst, estimate / scale);
            if (estimate > inner_tol * scale) {
                converged = false;
            }
        }
        out.worst_estimate = worst;
        out.restarts = restart;

        if (converged) {
            Eigen::MatrixXd ritz = basis.leftCols(p) * schur.leftCols(q);
            for (Eigen::Index i = 0; i < q; ++i) {
                ritz.col(i).normalize();
            }
            const Eigen::VectorXd top = theta.head(q);
            if (accept(ritz, top)) {
                out.theta = top;
                out.vectors = std::move(ritz);
                return out;
            }
            inner_tol = std::max(inner_tol * 1e-2, 1e-15);
        }

        // thick restart: keep the leading Ritz vectors plus the residual direction
        const Eigen::Index keep = std::clamp<Eigen::Index>(q + (p - q) / 2, q + 1, p - 1);
        Eigen::MatrixXd kept = basis.leftCols(p) * schur.leftCols(keep);
        const Eigen::VectorXd residual_dir = basis.col(p);
        basis.leftCols(keep) = kept;
        basis.col(keep) = residual_dir;
        projected.setZero();
        for (Eigen::Index i = 0; i < keep; ++i) {
            projected(i, i) = theta[i];
        }
        filled = keep;
    }

    std::ostringstream msg;
    msg << "eigensolver did not converge within " << max_restarts
        << " restarts; worst relative residual estimate " << out.worst_estimate;
    throw NumericalError(msg.str());
}

inline void fix_signs(Eigen::MatrixXd& vectors) {
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) {
        Eigen::Index arg = 0;
        vectors.col(c).cwiseAbs().maxCoeff(&arg);
        if (vectors(arg, c) < 0.0) {
            vectors.col(c) = -vectors.col(c);
        }
    }
}

inline void sort_ascending(Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
    std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values[a] < values[b]; });
    Eigen::VectorXd v(values.size());
    Eigen::MatrixXd m(vectors.rows(), vectors.cols());
    for (std::size_t k = 0; k < order.size(); ++k) {
        v[static_cast<Eigen::Index>(k)] = values[order[k]];
        m.col(static_cast<Eigen::Index>(k)) = vectors.col(order[k]);
    }
    values = std::move(v);
    vectors = std::move(m);
}

inline double relative_residual(const SparseSymmetric& a, const Eigen::Ref<const Eigen::VectorXd>& v, double lambda) {
    return (apply(a, v) - lambda * v).norm() / std::abs(lambda);
}

}  // namespace detail

/// The m algebraically smallest eigenpairs of a symmetric positive definite
/// sparse matrix.
///
/// Large problems run shift-invert Krylov-Schur (thick-restart Lanczos with
/// full reorthogonalization) on A^{-1}, factorized by sparse LDL^T. A single
/// Krylov sequence only sees one direction per eigenspace, so after the
/// first pass further passes, deflated against everything found so far and
/// started from fresh vectors, look for missed eigenvalues below the current
/// m-th until one comes back empty.
inline EigenSolution solve_eigen(const SparseSymmetric& a, std::size_t m, const EigenOptions& options = {}) {
    const auto n = static_cast<Eigen::Index>(a.n);
    if (m == 0 || static_cast<Eigen::Index>(m) > n) {
        throw ArgumentError("solve_eigen: need 1 <= m <= n_int (m = " + std::to_string(m) +
                            ", n_int = " + std::to_string(a.n) + ")");
    }
    if (!(options.tol > 0.0)) {
        throw ArgumentError("solve_eigen: tolerance must be positive");
    }
    const auto want = static_cast<Eigen::Index>(m);
    const auto krylov = static_cast<Eigen::Index>(
        options.krylov_dim > 0 ? options.krylov_dim : std::max<std::size_t>(2 * m + 20, 40));
    const auto dense_limit = static_cast<Eigen::Index>(
        options.dense_limit > 0 ? options.dense_limit : std::max<Eigen::Index>(2 * krylov, 200));

    EigenSolution out;
    if (n <= dense_limit || krylov >= n - want) {
        const Eigen::MatrixXd dense = Eigen::MatrixXd(Eigen::SparseMatrix<double>(a.view()));
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(dense);
        if (eig.info() != Eigen::Success) {
            throw NumericalError("dense eigensolver failed");
        }
        out.values = eig.eigenvalues().head(want);
        out.vectors = eig.eigenvectors().leftCols(want);
        out.dense = true;
    } else {
        const Eigen::SparseMatrix<double> matrix(a.view());
        Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>, Eigen::Lower, Eigen::AMDOrdering<int>> factor(matrix);
        if (factor.info() != Eigen::Success) {
            throw NumericalError("shift-invert factorization failed; matrix is not positive definite");
        }
        const auto op = [&factor](const Eigen::Ref<const Eigen::VectorXd>& v) -> Eigen::VectorXd {
            return factor.solve(v);
        };
        const auto accept = [&](const Eigen::MatrixXd& vectors, const Eigen::VectorXd& theta) {
            for (Eigen::Index i = 0; i < theta.size(); ++i) {
                if (detail::relative_residual(a, vectors.col(i), 1.0 / theta[i]) > options.tol) {
                    return false;
                }
            }
            return true;
        };

        std::mt19937_64 rng(options.seed);
        detail::RitzPairs first = detail::krylov_schur(op, n, want, krylov, Eigen::MatrixXd(n, 0),
                                                       detail::random_unit_vector(rng, n), options.tol,
                                                       options.max_restarts, rng, accept);
        out.restarts = first.restarts;
        out.passes = 1;
        Eigen::VectorXd values = first.theta.cwiseInverse();
        Eigen::MatrixXd vectors = std::move(first.vectors);
        detail::sort_ascending(values, vectors);
        Eigen::MatrixXd seen = vectors;

        const Eigen::Index probe = std::max<Eigen::Index>(4, want / 8);
        const Eigen::Index probe_krylov = std::max<Eigen::Index>(2 * probe + 20, 40);
        for (std::size_t pass = 0; pass <= m; ++pass) {
            if (seen.cols() + probe_krylov + 1 >= n) {
                break;
            }
            detail::RitzPairs extra = detail::krylov_schur(op, n, probe, probe_krylov, seen,
                                                           detail::random_unit_vector(rng, n), options.tol,
                                                           options.max_restarts, rng, accept);
            out.restarts += extra.restarts;
            ++out.passes;
            const double ceiling = values[want - 1] * (1.0 - 1e-10);
            Eigen::Index added = 0;
            Eigen::VectorXd merged_values(values.size() + probe);
            Eigen::MatrixXd merged_vectors(n, values.size() + probe);
            merged_values.head(values.size()) = values;
            merged_vectors.leftCols(values.size()) = vectors;
            for (Eigen::Index i = 0; i < probe; ++i) {
                const double lambda = 1.0 / extra.theta[i];
                if (lambda < ceiling) {
                    merged_values[values.size() + added] = lambda;
                    merged_vectors.col(values.size() + added) = extra.vectors.col(i);
                    ++added;
                }
            }
            Eigen::MatrixXd grown(n, seen.cols() + probe);
            grown << seen, extra.vectors;
            seen = std::move(grown);
            if (added == 0) {
                break;
            }
            Eigen::VectorXd v = merged_values.head(values.size() + added);
            Eigen::MatrixXd x = merged_vectors.leftCols(values.size() + added);
            detail::sort_ascending(v, x);
            values = v.head(want);
            vectors = x.leftCols(want);
        }
        out.values = std::move(values);
        out.vectors = std::move(vectors);
    }

    detail::sort_ascending(out.values, out.vectors);
    detail::fix_signs(out.vectors);
    for (Eigen::Index i = 0; i < out.values.size(); ++i) {
        out.max_relative_residual =
            std::max(out.max_relative_residual, detail::relative_residual(a, out.vectors.col(i), out.values[i]));
    }
    if (out.max_relative_residual > options.tol) {
        std::ostringstream msg;
        msg << "eigensolver residual " << out.max_relative_residual << " exceeds tolerance " << options.tol;
        throw NumericalError(msg.str());
    }
    return out;
}

}  // namespace boundgp

#endif
