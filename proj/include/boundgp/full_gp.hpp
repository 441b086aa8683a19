#ifndef BOUNDGP_FULL_GP_HPP
#define BOUNDGP_FULL_GP_HPP

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/domain_grid.hpp"
#include "boundgp/errors.hpp"
#include "boundgp/gp_regression.hpp"
#include "boundgp/spectral.hpp"

namespace boundgp {

/// Dense GP baseline with per-observation noise (zero allowed).
struct DenseGPModel {
    KernelSpec kernel;
    /// Added to the diagonal; escalated x10 up to three times on failure.
    double jitter = 1e-8;

    static DenseGPModel with_default_jitter(const KernelSpec& kernel) { return {kernel, 1e-8 * kernel.variance}; }
};

namespace detail {

inline Eigen::MatrixXd cross_covariance(const KernelSpec& k, std::span<const Point2> a, std::span<const Point2> b) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(a.size()), static_cast<Eigen::Index>(b.size()));
    for (std::size_t i = 0; i < a.size(); ++i) {
        for (std::size_t j = 0; j < b.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) =
                covariance(k, std::hypot(a[i].x - b[j].x, a[i].y - b[j].y));
        }
    }
    return out;
}

inline Eigen::LLT<Eigen::MatrixXd> factor_dense(const DenseGPModel& model, std::span<const Point2> inputs,
                                                std::span<const double> noise) {
    if (noise.size() != inputs.size()) {
        throw ArgumentError("dense GP: noise count does not match input count");
    }
    Eigen::MatrixXd k = cross_covariance(model.kernel, inputs, inputs);
    for (std::size_t i = 0; i < noise.size(); ++i) {
        if (!(noise[i] >= 0.0)) {
            throw ArgumentError("dense GP: noise variances must be non-negative");
        }
        k(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) += noise[i];
    }
    double jitter = model.jitter;
    for (int attempt = 0; attempt <= 3; ++attempt) {
        Eigen::MatrixXd kj = k;
        kj.diagonal().array() += jitter;
        Eigen::LLT<Eigen::MatrixXd> llt(kj);
        if (llt.info() == Eigen::Success) {
            return llt;
        }
        jitter *= 10.0;
    }
    throw NumericalError("dense GP: covariance not positive definite after jitter escalation");
}

}  // namespace detail

inline Prediction gp_predict_full(const DenseGPModel& model, std::span<const Point2> inputs,
                                  std::span<const double> targets, std::span<const double> noise,
                                  std::span<const Point2> test) {
    model.kernel.validate();
    if (targets.size() != inputs.size()) {
        throw ArgumentError("dense GP: target count does not match input count");
    }
    Prediction out;
    const auto nt = static_cast<Eigen::Index>(test.size());
    if (inputs.empty()) {
        out.mean = Eigen::VectorXd::Zero(nt);
        out.variance = Eigen::VectorXd::Constant(nt, covariance(model.kernel, 0.0));
        return out;
    }
    const Eigen::LLT<Eigen::MatrixXd> llt = detail::factor_dense(model, inputs, noise);
    const Eigen::VectorXd alpha =
        llt.solve(Eigen::Map<const Eigen::VectorXd>(targets.data(), static_cast<Eigen::Index>(targets.size())));
    const Eigen::MatrixXd cross = detail::cross_covariance(model.kernel, inputs, test);
    out.mean = cross.transpose() * alpha;
    const Eigen::MatrixXd half = llt.matrixL().solve(cross);
    out.variance = (covariance(model.kernel, 0.0) - half.colwise().squaredNorm().array()).transpose();
    return out;
}

/// 1/2 log|K + D| + 1/2 y^T (K + D)^{-1} y + n/2 log 2pi with per-point
/// noise diagonal D.
inline double nlml_full(const DenseGPModel& model, std::span<const Point2> inputs, std::span<const double> targets,
                        std::span<const double> noise) {
    model.kernel.validate();
    if (inputs.empty() || targets.size() != inputs.size()) {
        throw ArgumentError("dense NLML needs matching, non-empty inputs and targets");
    }
    const Eigen::LLT<Eigen::MatrixXd> llt = detail::factor_dense(model, inputs, noise);
    const Eigen::Map<const Eigen::VectorXd> y(targets.data(), static_cast<Eigen::Index>(targets.size()));
    const Eigen::MatrixXd lower = llt.matrixL();
    const double logdet = 2.0 * lower.diagonal().array().log().sum();
    return 0.5 * logdet + 0.5 * y.dot(llt.solve(y)) +
           0.5 * static_cast<double>(targets.size()) * std::log(2.0 * std::numbers::pi);
}

namespace detail {

struct GridEdge {
    std::array<std::int64_t, 2> from;
    std::array<std::int64_t, 2> to;
};

}  // namespace detail

/// Closed polylines (node coordinates) bounding the union of grid cells that
/// touch an interior node. Every point on them is a zero of all harmonic
/// features. Loops are traversed with the domain on the left, longest first.
inline std::vector<std::vector<Point2>> boundary_contours(const DomainGrid& grid) {
    const auto nx = static_cast<std::int64_t>(grid.nx());
    const auto ny = static_cast<std::int64_t>(grid.ny());
    // cell (ci, cj) spans nodes ci..ci+1, cj..cj+1, for ci in [-1, nx-1]
    const auto support = [&](std::int64_t ci, std::int64_t cj) {
        if (ci < -1 || cj < -1 || ci > nx - 1 || cj > ny - 1) {
            return false;
        }
        return grid.interior(ci, cj) || grid.interior(ci + 1, cj) || grid.interior(ci, cj + 1) ||
               grid.interior(ci + 1, cj + 1);
    };
    std::vector<detail::GridEdge> edges;
    for (std::int64_t cj = -1; cj <= ny; ++cj) {
        for (std::int64_t ci = -1; ci <= nx; ++ci) {
            const bool here = support(ci, cj);
            // horizontal edge at y = cj between cells (ci, cj-1) and (ci, cj)
            const bool below = support(ci, cj - 1);
            if (here && !below) {
                edges.push_back({{ci, cj}, {ci + 1, cj}});
            } else if (!here && below) {
                edges.push_back({{ci + 1, cj}, {ci, cj}});
            }
            // vertical edge at x = ci between cells (ci-1, cj) and (ci, cj)
            const bool left = support(ci - 1, cj);
            if (left && !here) {
                edges.push_back({{ci, cj}, {ci, cj + 1}});
            } else if (!left && here) {
                edges.push_back({{ci, cj + 1}, {ci, cj}});
            }
        }
    }

    std::multimap<std::array<std::int64_t, 2>, std::size_t> outgoing;
    for (std::size_t e = 0; e < edges.size(); ++e) {
        outgoing.emplace(edges[e].from, e);
    }
    std::vector<bool> used(edges.size(), false);
    std::vector<std::vector<Point2>> loops;
    const auto to_point = [&](const std::array<std::int64_t, 2>& node) {
        return Point2{grid.origin().x + static_cast<double>(node[0]) * grid.h(),
                      grid.origin().y + static_cast<double>(node[1]) * grid.h()};
    };
    for (std::size_t start = 0; start < edges.size(); ++start) {
        if (used[start]) {
            continue;
        }
        std::vector<Point2> loop;
        std::size_t e = start;
        while (!used[e]) {
            used[e] = true;
            loop.push_back(to_point(edges[e].from));
            const auto dir = std::array<std::int64_t, 2>{edges[e].to[0] - edges[e].from[0], edges[e].to[1] - edges[e].from[1]};
            // at pinch nodes take the left-most unused turn
            std::size_t next = e;
            int best = 3;
            const auto [lo, hi] = outgoing.equal_range(edges[e].to);
            for (auto it = lo; it != hi; ++it) {
                if (used[it->second]) {
                    continue;
                }
                const auto& c = edges[it->second];
                const std::array<std::int64_t, 2> nd{c.to[0] - c.from[0], c.to[1] - c.from[1]};
                const std::int64_t cross = dir[0] * nd[1] - dir[1] * nd[0];
                const std::int64_t dot = dir[0] * nd[0] + dir[1] * nd[1];
                const int rank = cross > 0 ? 0 : (dot > 0 ? 1 : 2);
                if (rank < best) {
                    best = rank;
                    next = it->second;
                }
            }
            e = next;
        }
        loop.push_back(loop.front());
        loops.push_back(std::move(loop));
    }
    std::stable_sort(loops.begin(), loops.end(),
                     [](const auto& a, const auto& b) { return a.size() > b.size(); });
    return loops;
}

/// `count` points spaced uniformly by arc length along all boundary
/// contours, at arc positions (k + 1/2) * perimeter / count.
inline std::vector<Point2> boundary_points(const DomainGrid& grid, std::size_t count = 73) {
    const auto loops = boundary_contours(grid);
    std::vector<std::array<Point2, 2>> segments;
    for (const auto& loop : loops) {
        for (std::size_t k = 0; k + 1 < loop.size(); ++k) {
            segments.push_back({loop[k], loop[k + 1]});
        }
    }
    std::vector<Point2> out;
    if (segments.empty() || count == 0) {
        return out;
    }
    const double h = grid.h();
    const double perimeter = static_cast<double>(segments.size()) * h;
    for (std::size_t k = 0; k < count; ++k) {
        const double s = (static_cast<double>(k) + 0.5) * perimeter / static_cast<double>(count);
        const auto seg = std::min(static_cast<std::size_t>(s / h), segments.size() - 1);
        const double t = s / h - static_cast<double>(seg);
        const auto& [a, b] = segments[seg];
        out.push_back({a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)});
    }
    return out;
}

}  // namespace boundgp

#endif
