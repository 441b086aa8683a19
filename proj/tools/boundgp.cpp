// boundgp command-line tool: basis construction, prior sampling, regression,
// classification, Cox-process intensity estimation and the benchmark.

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "boundgp/boundgp.hpp"

namespace {

using namespace boundgp;

struct KernelFlags {
    std::string family = "matern32";
    double variance = 1.0;
    double lengthscale = 0.1;

    [[nodiscard]] KernelSpec spec() const {
        KernelSpec k{parse_kernel_family(family), variance, lengthscale};
        k.validate();
        return k;
    }
};

void add_kernel_flags(CLI::App* cmd, KernelFlags& k) {
    cmd->add_option("--kernel", k.family, "se | matern12 | matern32 | matern52")->capture_default_str();
    cmd->add_option("--variance", k.variance, "signal variance")->capture_default_str();
    cmd->add_option("--lengthscale", k.lengthscale, "kernel lengthscale")->capture_default_str();
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty() && path != "-") {
            file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
            if (!*file_) {
                throw ArgumentError("cannot open output file: " + path);
            }
        }
    }
    std::ostream& stream() { return file_ ? *file_ : std::cout; }

    void close() {
        if (file_) {
            file_->close();
            if (!*file_) {
                throw ArgumentError("failed writing output file");
            }
        }
    }

private:
    std::unique_ptr<std::ofstream> file_;
};

// every node of the raster (interior or not), row-major
std::vector<Point2> raster_nodes(const DomainGrid& grid) {
    std::vector<Point2> pts;
    pts.reserve(grid.nx() * grid.ny());
    for (std::size_t j = 0; j < grid.ny(); ++j) {
        for (std::size_t i = 0; i < grid.nx(); ++i) {
            pts.push_back(grid.position(i, j));
        }
    }
    return pts;
}

HarmonicBasis load_truncated(const std::string& path, std::size_t m) {
    HarmonicBasis basis = load_basis(path);
    if (m == 0) {
        return basis;
    }
    if (m > basis.size()) {
        throw ArgumentError("--m exceeds the number of modes in the basis cache");
    }
    return basis.truncated(m);
}

std::vector<Point2> prediction_points(const DomainGrid& grid, const std::string& predict_path) {
    return predict_path.empty() ? raster_nodes(grid) : load_points(predict_path);
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

struct BasisArgs {
    std::string mask;
    double width = 1.0;
    std::size_t m = 64;
    std::string out;
};

void run_basis(const BasisArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    const DomainGrid grid = load_mask(a.mask, a.width);
    if (a.m > grid.interior_count()) {
        throw ArgumentError("--m " + std::to_string(a.m) + " exceeds the interior node count " +
                            std::to_string(grid.interior_count()));
    }
    const HarmonicBasis basis = build_basis(grid, a.m);
    const double elapsed = seconds_since(t0);
    save_basis(basis, a.out);
    std::cout << "m=" << basis.size() << " n_int=" << grid.interior_count()
              << " lambda_min=" << format_double(basis.lambda_sq()[0])
              << " lambda_max=" << format_double(basis.lambda_sq()[basis.lambda_sq().size() - 1])
              << " setup_seconds=" << elapsed << '\n';
}

struct SampleArgs {
    std::string basis;
    KernelFlags kernel;
    std::uint64_t seed = 0;
    std::string out;
};

void run_sample(const SampleArgs& a) {
    const HarmonicBasis basis = load_basis(a.basis);
    const Eigen::VectorXd f = prior_draw(basis, a.kernel.spec(), a.seed);
    Output out(a.out);
    out.stream() << "x,y,f\n";
    for (std::size_t k = 0; k < basis.grid().interior_count(); ++k) {
        const Point2 p = basis.grid().interior_position(k);
        write_csv_row(out.stream(), {p.x, p.y, f[static_cast<Eigen::Index>(k)]});
    }
    out.close();
}

struct RegressArgs {
    std::string basis;
    std::size_t m = 0;
    std::string data;
    KernelFlags kernel;
    double noise = 0.01;
    bool optimize = false;
    std::size_t max_iters = 1000;
    bool predict_grid = false;
    std::string predict;
    std::string out;
};

void run_regress(const RegressArgs& a) {
    const HarmonicBasis basis = load_truncated(a.basis, a.m);
    const Dataset data = a.data.empty() ? Dataset{} : load_dataset(a.data);
    ReducedRankModel model(basis, a.kernel.spec(), a.noise);
    model.bind(data.points, data.targets);
    if (a.optimize) {
        const HyperparameterFit fit = model.fit_hyperparameters(a.max_iters);
        std::cout << "variance=" << format_double(model.kernel().variance)
                  << " lengthscale=" << format_double(model.kernel().lengthscale)
                  << " noise=" << format_double(model.noise_variance()) << " nlml=" << format_double(fit.nlml)
                  << " iterations=" << fit.iterations << (fit.converged ? "" : " (not converged)") << '\n';
    }
    const std::vector<Point2> pts = prediction_points(basis.grid(), a.predict);
    const Prediction p = model.predict(pts);
    Output out(a.out);
    out.stream() << "x,y,mean,variance\n";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        write_csv_row(out.stream(), {pts[k].x, pts[k].y, p.mean[r], p.variance[r]});
    }
    out.close();
}

struct LatentArgs {
    std::string basis;
    std::size_t m = 0;
    std::string data;
    KernelFlags kernel;
    std::string likelihood = "bernoulli";
    std::string link = "logit";
    double bin_width = 1.0;
    bool optimize = false;
    std::size_t max_iters = 1000;
    bool predict_grid = false;
    std::string predict;
    std::string out;
};

VariationalFit fit_latent(const HarmonicBasis& basis, const Dataset& data, const Likelihood& lik,
                          const LatentArgs& a) {
    if (data.points.empty()) {
        throw ArgumentError("data file has no observations");
    }
    const Eigen::MatrixXd features = basis.evaluate(data.points);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(data.targets.data(),
                                                                static_cast<Eigen::Index>(data.targets.size()));
    VariationalOptions opts;
    opts.max_iters = a.max_iters;
    opts.optimize_kernel = a.optimize;
    VariationalFit fit = fit_variational(features, y, lik, basis.lambda_sq(), a.kernel.spec(), opts);
    std::cout << "elbo=" << format_double(fit.elbo) << " iterations=" << fit.iterations
              << (fit.converged ? "" : " (not converged)");
    if (a.optimize) {
        std::cout << " variance=" << format_double(fit.kernel.variance)
                  << " lengthscale=" << format_double(fit.kernel.lengthscale);
    }
    std::cout << '\n';
    return fit;
}

void run_classify(const LatentArgs& a) {
    if (a.likelihood != "bernoulli") {
        throw ArgumentError("classify supports --likelihood bernoulli only");
    }
    Link link = Link::logit;
    if (a.link == "probit") {
        link = Link::probit;
    } else if (a.link != "logit") {
        throw ArgumentError("unknown --link '" + a.link + "' (expected logit or probit)");
    }
    const HarmonicBasis basis = load_truncated(a.basis, a.m);
    const Dataset data = load_dataset(a.data);
    const VariationalFit fit = fit_latent(basis, data, Likelihood::bernoulli(link), a);
    const std::vector<Point2> pts = prediction_points(basis.grid(), a.predict);
    const Prediction latent = predict_latent(fit.q, basis.evaluate(pts));
    Output out(a.out);
    out.stream() << "x,y,probability\n";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        write_csv_row(out.stream(), {pts[k].x, pts[k].y, predictive_probability(link, latent.mean[r], latent.variance[r])});
    }
    out.close();
}

void run_cox(const LatentArgs& a) {
    if (!(a.bin_width > 0.0)) {
        throw ArgumentError("--bin-width must be positive");
    }
    const HarmonicBasis basis = load_truncated(a.basis, a.m);
    const Dataset data = load_dataset(a.data);
    const double area = a.bin_width * a.bin_width;
    const VariationalFit fit =
        fit_latent(basis, data, Likelihood::poisson(std::vector<double>(data.points.size(), area)), a);
    const std::vector<Point2> pts = prediction_points(basis.grid(), a.predict);
    const Prediction latent = predict_latent(fit.q, basis.evaluate(pts));
    Output out(a.out);
    out.stream() << "x,y,intensity\n";
    for (std::size_t k = 0; k < pts.size(); ++k) {
        const auto r = static_cast<Eigen::Index>(k);
        write_csv_row(out.stream(),
                      {pts[k].x, pts[k].y, std::exp(latent.mean[r] + 0.5 * latent.variance[r])});
    }
    out.close();
}

struct BenchArgs {
    std::string mask;
    double width = 1.0;
    std::size_t trials = 10;
    std::size_t n = 100;
    std::vector<std::size_t> m_list{4, 8, 16, 32, 64, 100};
    KernelFlags kernel;
    double noise = 0.01;
    std::uint64_t seed = 0;
    std::string out;
};

void run_benchmark_cmd(const BenchArgs& a) {
    const auto t0 = std::chrono::steady_clock::now();
    const DomainGrid grid = load_mask(a.mask, a.width);
    BenchmarkConfig cfg;
    cfg.trials = a.trials;
    cfg.n = a.n;
    cfg.m_list = a.m_list;
    cfg.kernel = a.kernel.spec();
    cfg.noise_variance = a.noise;
    cfg.seed = a.seed;
    const std::size_t need = std::max(cfg.truth_m, *std::max_element(cfg.m_list.begin(), cfg.m_list.end()));
    if (need > grid.interior_count()) {
        throw ArgumentError("mask has too few interior nodes for the requested modes");
    }
    const HarmonicBasis basis = build_basis(grid, need);
    const BenchmarkResult result = run_benchmark(basis, cfg);

    Output out(a.out);
    out.stream() << "trial,m,mae\n";
    std::map<std::size_t, std::vector<double>> by_m;
    for (const BenchmarkRow& row : result.rows) {
        out.stream() << row.trial << ',' << row.m << ',' << format_double(row.mae) << '\n';
        by_m[row.m].push_back(row.mae);
    }
    out.close();
    double std_sum = 0.0;
    for (const double s : result.truth_std) {
        std_sum += s;
    }
    std::cerr << "mean truth std " << std_sum / static_cast<double>(result.truth_std.size()) << '\n';
    for (const auto& [m, v] : by_m) {
        double s = 0.0;
        for (const double x : v) {
            s += x;
        }
        std::cerr << "m=" << m << " mean_mae=" << s / static_cast<double>(v.size()) << '\n';
    }
    std::cerr << "elapsed_seconds=" << seconds_since(t0) << '\n';
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Gaussian processes on bounded 2D domains via Dirichlet Laplacian eigenfunctions"};
    app.require_subcommand(1);

    BasisArgs basis_args;
    auto* basis_cmd = app.add_subcommand("basis", "build and cache the eigenbasis of a mask");
    basis_cmd->add_option("--mask", basis_args.mask, "PGM or ASCII mask file")->required();
    basis_cmd->add_option("--width", basis_args.width, "physical width of the raster")->capture_default_str();
    basis_cmd->add_option("--m", basis_args.m, "number of modes")->capture_default_str();
    basis_cmd->add_option("--out", basis_args.out, "output cache file")->required();

    SampleArgs sample_args;
    auto* sample_cmd = app.add_subcommand("sample", "draw a prior sample on the interior nodes");
    sample_cmd->add_option("--basis", sample_args.basis, "basis cache")->required();
    add_kernel_flags(sample_cmd, sample_args.kernel);
    sample_cmd->add_option("--seed", sample_args.seed)->capture_default_str();
    sample_cmd->add_option("--out", sample_args.out, "output CSV (default stdout)");

    RegressArgs reg;
    auto* reg_cmd = app.add_subcommand("regress", "Gaussian-likelihood regression");
    reg_cmd->add_option("--basis", reg.basis, "basis cache")->required();
    reg_cmd->add_option("--m", reg.m, "use only the first m modes (0 = all)");
    reg_cmd->add_option("--data", reg.data, "CSV with x,y,value");
    add_kernel_flags(reg_cmd, reg.kernel);
    reg_cmd->add_option("--noise", reg.noise, "observation noise variance")->capture_default_str();
    reg_cmd->add_flag("--optimize", reg.optimize, "fit hyperparameters by NLML");
    reg_cmd->add_option("--max-iters", reg.max_iters)->capture_default_str();
    auto* reg_grid = reg_cmd->add_flag("--predict-grid", reg.predict_grid, "predict at every raster node (default)");
    reg_cmd->add_option("--predict", reg.predict, "CSV of x,y prediction points")->excludes(reg_grid);
    reg_cmd->add_option("--out", reg.out, "output CSV (default stdout)");

    LatentArgs cls;
    auto* cls_cmd = app.add_subcommand("classify", "binary classification with a Bernoulli likelihood");
    cls_cmd->add_option("--basis", cls.basis, "basis cache")->required();
    cls_cmd->add_option("--m", cls.m, "use only the first m modes (0 = all)");
    cls_cmd->add_option("--data", cls.data, "CSV with x,y,label")->required();
    add_kernel_flags(cls_cmd, cls.kernel);
    cls_cmd->add_option("--likelihood", cls.likelihood)->capture_default_str();
    cls_cmd->add_option("--link", cls.link, "logit | probit")->capture_default_str();
    cls_cmd->add_flag("--optimize", cls.optimize, "train kernel hyperparameters jointly");
    cls_cmd->add_option("--max-iters", cls.max_iters)->capture_default_str();
    auto* cls_grid = cls_cmd->add_flag("--predict-grid", cls.predict_grid, "predict at every raster node (default)");
    cls_cmd->add_option("--predict", cls.predict, "CSV of x,y prediction points")->excludes(cls_grid);
    cls_cmd->add_option("--out", cls.out, "output CSV (default stdout)");

    LatentArgs cox;
    auto* cox_cmd = app.add_subcommand("cox", "log-Gaussian Cox process on binned counts");
    cox_cmd->add_option("--basis", cox.basis, "basis cache")->required();
    cox_cmd->add_option("--m", cox.m, "use only the first m modes (0 = all)");
    cox_cmd->add_option("--data", cox.data, "CSV with x,y,count at bin centers")->required();
    add_kernel_flags(cox_cmd, cox.kernel);
    cox_cmd->add_option("--bin-width", cox.bin_width, "bin side length; exposure is its square")
        ->capture_default_str();
    cox_cmd->add_flag("--optimize", cox.optimize, "train kernel hyperparameters jointly");
    cox_cmd->add_option("--max-iters", cox.max_iters)->capture_default_str();
    auto* cox_grid = cox_cmd->add_flag("--predict-grid", cox.predict_grid, "predict at every raster node (default)");
    cox_cmd->add_option("--predict", cox.predict, "CSV of x,y prediction points")->excludes(cox_grid);
    cox_cmd->add_option("--out", cox.out, "output CSV (default stdout)");

    BenchArgs bench;
    auto* bench_cmd = app.add_subcommand("benchmark", "harmonic model vs dense GP on simulated data");
    bench_cmd->add_option("--mask", bench.mask, "PGM or ASCII mask file")->required();
    bench_cmd->add_option("--width", bench.width)->capture_default_str();
    bench_cmd->add_option("--trials", bench.trials)->capture_default_str();
    bench_cmd->add_option("--n", bench.n, "observations per trial")->capture_default_str();
    bench_cmd->add_option("--m", bench.m_list, "comma-separated mode counts")->delimiter(',')->capture_default_str();
    add_kernel_flags(bench_cmd, bench.kernel);
    bench_cmd->add_option("--noise", bench.noise)->capture_default_str();
    bench_cmd->add_option("--seed", bench.seed)->capture_default_str();
    bench_cmd->add_option("--out", bench.out, "output CSV (default stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*basis_cmd) {
            run_basis(basis_args);
        } else if (*sample_cmd) {
            run_sample(sample_args);
        } else if (*reg_cmd) {
            run_regress(reg);
        } else if (*cls_cmd) {
            run_classify(cls);
        } else if (*cox_cmd) {
            run_cox(cox);
        } else if (*bench_cmd) {
            run_benchmark_cmd(bench);
        }
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return 2;
    } catch (const ParseError& e) {
        std::cerr << "parse error: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
