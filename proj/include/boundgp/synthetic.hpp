#ifndef BOUNDGP_SYNTHETIC_HPP
#define BOUNDGP_SYNTHETIC_HPP

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/csv.hpp"
#include "boundgp/domain_grid.hpp"
#include "boundgp/errors.hpp"

namespace boundgp {

inline bool point_in_polygon(const std::vector<Point2>& poly, Point2 p) {
    bool inside = false;
    for (std::size_t a = 0, b = poly.size() - 1; a < poly.size(); b = a++) {
        const Point2 u = poly[a];
        const Point2 v = poly[b];
        if ((u.y > p.y) != (v.y > p.y) && p.x < (v.x - u.x) * (p.y - u.y) / (v.y - u.y) + u.x) {
            inside = !inside;
        }
    }
    return inside;
}

/// Five-armed star on the unit square, one arm pointing up.
inline std::vector<Point2> star_polygon() {
    constexpr double outer = 0.45;
    constexpr double inner = 0.2;
    std::vector<Point2> poly;
    for (int k = 0; k < 10; ++k) {
        const double r = k % 2 == 0 ? outer : inner;
        const double a = std::numbers::pi / 2.0 + k * std::numbers::pi / 5.0;
        poly.push_back({0.5 + r * std::cos(a), 0.5 + r * std::sin(a)});
    }
    return poly;
}

/// Star mask rasterized on an nx-by-nx node grid of the unit square
/// (h = 1/nx, origin 0), the same geometry load_mask gives for width 1.
inline DomainGrid star_mask(std::size_t nx = 100) {
    const double h = 1.0 / static_cast<double>(nx);
    const auto poly = star_polygon();
    std::vector<std::uint8_t> mask(nx * nx, 0);
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            mask[j * nx + i] = point_in_polygon(poly, {static_cast<double>(i) * h, static_cast<double>(j) * h}) ? 1 : 0;
        }
    }
    return DomainGrid(nx, nx, h, {0.0, 0.0}, std::move(mask));
}

/// Ellipse centered in the unit square with semi-axes (0.48, 0.3): the
/// domain used for the two-moons classification data.
inline DomainGrid ellipse_mask(std::size_t nx = 80) {
    const double h = 1.0 / static_cast<double>(nx);
    std::vector<std::uint8_t> mask(nx * nx, 0);
    for (std::size_t j = 0; j < nx; ++j) {
        for (std::size_t i = 0; i < nx; ++i) {
            const double u = (static_cast<double>(i) * h - 0.5) / 0.48;
            const double v = (static_cast<double>(j) * h - 0.5) / 0.3;
            mask[j * nx + i] = u * u + v * v < 1.0 ? 1 : 0;
        }
    }
    return DomainGrid(nx, nx, h, {0.0, 0.0}, std::move(mask));
}

/// n points uniform over the domain (rejection against `contains`).
inline std::vector<Point2> uniform_points(const DomainGrid& grid, std::size_t n, std::mt19937_64& rng) {
    const Point2 o = grid.origin();
    const double wx = static_cast<double>(grid.nx() - 1) * grid.h();
    const double wy = static_cast<double>(grid.ny() - 1) * grid.h();
    std::uniform_real_distribution<double> ux(o.x, o.x + wx);
    std::uniform_real_distribution<double> uy(o.y, o.y + wy);
    std::vector<Point2> out;
    out.reserve(n);
    std::size_t attempts = 0;
    while (out.size() < n) {
        if (++attempts > 1000 * (n + 10)) {
            throw ArgumentError("uniform_points: domain too small to sample");
        }
        const Point2 p{ux(rng), uy(rng)};
        if (contains(grid, p)) {
            out.push_back(p);
        }
    }
    return out;
}

/// Two interleaved half-moons (labels 0 and 1) mapped into the ellipse
/// domain; points falling outside it are redrawn.
inline Dataset two_moons(std::size_t n, std::uint64_t seed, double noise = 0.1) {
    const DomainGrid domain = ellipse_mask();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> angle(0.0, std::numbers::pi);
    std::normal_distribution<double> jitter(0.0, noise);
    Dataset data;
    while (data.points.size() < n) {
        const bool upper = data.points.size() % 2 == 0;
        const double t = angle(rng);
        double x = upper ? std::cos(t) : 1.0 - std::cos(t);
        double y = upper ? std::sin(t) : 0.5 - std::sin(t);
        x += jitter(rng);
        y += jitter(rng);
        const Point2 p{(x + 1.5) / 4.0, (y + 1.75) / 4.0};
        if (contains(domain, p)) {
            data.points.push_back(p);
            data.targets.push_back(upper ? 1.0 : 0.0);
        }
    }
    return data;
}

/// Binned point-process counts on a fully interior width-by-width grid of
/// unit bins centered on the nodes (i, j), matching load_mask of an all-set
/// raster with the same width. The log-intensity is a smooth sinusoidal
/// surface that vanishes on the Dirichlet boundary.
struct CoxSample {
    DomainGrid grid;
    Dataset counts;
    Eigen::VectorXd log_intensity;
};

inline double cox_truth(double x, double y, double width) {
    const double s = (x + 1.0) / (width + 1.0);
    const double t = (y + 1.0) / (width + 1.0);
    const double pi = std::numbers::pi;
    return 1.5 * std::sin(pi * s) * std::sin(pi * t) + 0.8 * std::sin(2.0 * pi * s) * std::sin(3.0 * pi * t);
}

inline CoxSample cox_synthetic(std::size_t width, std::uint64_t seed) {
    DomainGrid grid(width, width, 1.0, {0.0, 0.0}, std::vector<std::uint8_t>(width * width, 1));
    std::mt19937_64 rng(seed);
    CoxSample out{grid, {}, Eigen::VectorXd(static_cast<Eigen::Index>(grid.interior_count()))};
    for (std::size_t k = 0; k < grid.interior_count(); ++k) {
        const Point2 p = grid.interior_position(k);
        const double f = cox_truth(p.x, p.y, static_cast<double>(width));
        out.log_intensity[static_cast<Eigen::Index>(k)] = f;
        std::poisson_distribution<int> draw(std::exp(f));
        out.counts.points.push_back(p);
        out.counts.targets.push_back(static_cast<double>(draw(rng)));
    }
    return out;
}

}  // namespace boundgp

#endif
