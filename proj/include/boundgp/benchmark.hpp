#ifndef BOUNDGP_BENCHMARK_HPP
#define BOUNDGP_BENCHMARK_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "boundgp/eigenbasis.hpp"
#include "boundgp/errors.hpp"
#include "boundgp/full_gp.hpp"
#include "boundgp/gp_regression.hpp"
#include "boundgp/spectral.hpp"
#include "boundgp/synthetic.hpp"

namespace boundgp {

/// Harmonic model versus dense baseline on simulated data. The truth is a
/// prior draw using `truth_m` features; observations are n uniform interior
/// points with Gaussian noise. The dense baseline additionally sees
/// `boundary_count` noise-free zeros on the boundary.
struct BenchmarkConfig {
    std::size_t trials = 10;
    std::size_t n = 100;
    double noise_sd = 0.1;
    std::size_t truth_m = 256;
    std::size_t boundary_count = 73;
    std::vector<std::size_t> m_list{4, 8, 16, 32, 64, 100};
    KernelSpec kernel{KernelFamily::matern32, 1.0, 0.1};
    double noise_variance = 0.01;
    std::uint64_t seed = 0;
};

struct BenchmarkRow {
    std::size_t trial = 0;
    std::size_t m = 0;
    double mae = 0.0;
};

struct BenchmarkResult {
    std::vector<BenchmarkRow> rows;
    /// Empirical std of the true function over interior nodes, per trial.
    std::vector<double> truth_std;
};

/// `basis` must hold at least max(truth_m, max m_list) modes.
inline BenchmarkResult run_benchmark(const HarmonicBasis& basis, const BenchmarkConfig& config) {
    std::size_t need = config.truth_m;
    for (const std::size_t m : config.m_list) {
        if (m == 0) {
            throw ArgumentError("benchmark: m must be positive");
        }
        need = std::max(need, m);
    }
    if (basis.size() < need) {
        throw ArgumentError("benchmark: basis has fewer modes than requested");
    }
    const DomainGrid& grid = basis.grid();
    const HarmonicBasis truth_basis = basis.truncated(config.truth_m);
    const Eigen::VectorXd truth_weights = prior_weights(truth_basis.lambda_sq(), config.kernel);
    const std::vector<Point2> nodes = basis.interior_points();
    const std::vector<Point2> boundary = boundary_points(grid, config.boundary_count);
    const DenseGPModel full = DenseGPModel::with_default_jitter(config.kernel);

    BenchmarkResult result;
    for (std::size_t t = 0; t < config.trials; ++t) {
        const std::uint64_t trial_seed = config.seed * 1000003ULL + t;
        const Eigen::VectorXd coeff = prior_coefficients(truth_weights, trial_seed);
        const Eigen::VectorXd truth = truth_basis.phi() * coeff;
        const double mean = truth.mean();
        result.truth_std.push_back(
            std::sqrt((truth.array() - mean).square().sum() / static_cast<double>(truth.size())));

        std::mt19937_64 rng(trial_seed ^ 0x9E3779B97F4A7C15ULL);
        const std::vector<Point2> inputs = uniform_points(grid, config.n, rng);
        const Eigen::VectorXd clean = truth_basis.evaluate(inputs) * coeff;
        std::normal_distribution<double> noise(0.0, config.noise_sd);
        std::vector<double> targets(config.n);
        for (std::size_t i = 0; i < config.n; ++i) {
            targets[i] = clean[static_cast<Eigen::Index>(i)] + noise(rng);
        }

        std::vector<Point2> full_inputs = inputs;
        full_inputs.insert(full_inputs.end(), boundary.begin(), boundary.end());
        std::vector<double> full_targets = targets;
        full_targets.resize(full_inputs.size(), 0.0);
        std::vector<double> full_noise(full_inputs.size(), 0.0);
        std::fill(full_noise.begin(), full_noise.begin() + static_cast<std::ptrdiff_t>(config.n),
                  config.noise_variance);
        const Prediction reference = gp_predict_full(full, full_inputs, full_targets, full_noise, nodes);

        for (const std::size_t m : config.m_list) {
            const HarmonicBasis sub = basis.truncated(m);
            ReducedRankModel model(sub, config.kernel, config.noise_variance);
            model.bind(inputs, targets);
            const Prediction p = model.predict_features(sub.phi());
            const double mae = (p.mean - reference.mean).cwiseAbs().mean();
            result.rows.push_back({t, m, mae});
        }
    }
    return result;
}

}  // namespace boundgp

#endif
