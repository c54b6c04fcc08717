// Command-line front end: reproduces the three experiments and decomposes user data.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rkhs/rkhs.hpp"

namespace {

constexpr int kUsageError = 1;
constexpr int kNumericalError = 2;

std::pair<rkhs::Index, rkhs::Index> grid_option(const std::string& s) {
    const auto parts = rkhs::detail::split(s, ',');
    if (parts.size() != 2) throw rkhs::InvalidArgument("--grid expects nx,ny");
    return {rkhs::detail::parse_long(parts[0], "nx"), rkhs::detail::parse_long(parts[1], "ny")};
}

std::uint64_t seed_option(const std::string& s) { return rkhs::detail::parse_seed(s); }

void print_values(const char* label, const rkhs::Vector& v, rkhs::Index limit) {
    std::printf("%s:", label);
    for (rkhs::Index i = 0; i < std::min(limit, v.size()); ++i) std::printf(" %.6g", v(i));
    if (v.size() > limit) std::printf(" ... (%lld total)", static_cast<long long>(v.size()));
    std::printf("\n");
}

void finish(const rkhs::ExperimentReport& rep, const std::string& output) {
    if (output == "-") {
        std::cout << rep.serialize();
        return;
    }
    rep.save(output);
    std::fprintf(stderr, "wrote %s\n", output.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    try {
        rkhs::linalg::ensure_working_blas(argv);
    } catch (const rkhs::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kNumericalError;
    }
    CLI::App app{"Spectral decompositions of empirical RKHS operators"};
    app.require_subcommand(1);

    std::string output;
    std::string seed = std::to_string(rkhs::kDefaultSeed);
    double threshold = rkhs::kDefaultThreshold;
    bool quiet = false;
    auto common = [&](CLI::App* sub) {
        sub->add_option("-o,--output", output, "Report path ('-' for stdout)");
        sub->add_option("--threshold", threshold, "Relative truncation threshold")->capture_default_str();
        sub->add_flag("-q,--quiet", quiet, "Do not print a summary");
    };

    // mercer
    auto* mercer = app.add_subcommand("mercer", "Covariance operator of (1 + x.y)^2 on uniform samples from [-2,2]^2");
    rkhs::Index mercer_samples = 5000;
    std::string mercer_grid = "50,50";
    mercer->add_option("-m,--samples", mercer_samples, "Sample count")->capture_default_str();
    mercer->add_option("--seed", seed, "Random seed")->capture_default_str();
    mercer->add_option("--grid", mercer_grid, "Evaluation grid nx,ny")->capture_default_str();
    common(mercer);

    // crosscov
    auto* crosscov = app.add_subcommand("crosscov", "SVD of the cross-covariance operator of a Gaussian mixture");
    rkhs::Index cc_samples = 2000;
    double rho = 0.5;
    std::string cc_kernel = "gaussian:bw=0.1:normalized";
    rkhs::Index cc_rank = 2;
    rkhs::Index cc_grid = 201;
    crosscov->add_option("-m,--samples", cc_samples, "Sample count")->capture_default_str();
    crosscov->add_option("--rho", rho, "Standard deviation of the mixture components")->capture_default_str();
    crosscov->add_option("--kernel", cc_kernel, "Kernel for both variables")->capture_default_str();
    crosscov->add_option("--seed", seed, "Random seed")->capture_default_str();
    crosscov->add_option("--rank", cc_rank, "Truncation rank")->capture_default_str();
    crosscov->add_option("--grid", cc_grid, "Number of evaluation points on [-2,2]")->capture_default_str();
    common(crosscov);

    // doublegyre
    auto* gyre = app.add_subcommand("doublegyre", "Kernel CCA of the periodically driven double gyre");
    std::string gyre_grid = "120,60";
    double tau = 10.0;
    std::string gyre_kernel = "gaussian:bw=0.25";
    double gyre_eps = rkhs::kDefaultCcaEpsilon;
    rkhs::Index gyre_functions = 3;
    gyre->add_option("--grid", gyre_grid, "Box grid nx,ny")->capture_default_str();
    gyre->add_option("--tau", tau, "Lag time")->capture_default_str();
    gyre->add_option("--kernel", gyre_kernel, "Kernel")->capture_default_str();
    gyre->add_option("--epsilon", gyre_eps, "Regularization, relative to the mean Gram diagonal")->capture_default_str();
    gyre->add_option("--rank", gyre_functions, "Number of right singular functions to store")->capture_default_str();
    common(gyre);

    // decompose
    auto* dec = app.add_subcommand("decompose", "Eigen- or singular value decomposition of an estimator built from CSV data");
    std::string x_path;
    std::string y_path;
    std::string dec_kernel = "gaussian:bw=1";
    std::string out_kernel;
    std::string estimator;
    std::string mode = "svd";
    std::string route = "aux";
    std::optional<double> dec_eps;
    rkhs::Index dec_rank = 0;
    dec->add_option("x", x_path, "CSV with header x1,...,xd")->required();
    dec->add_option("y", y_path, "Paired CSV with header y1,...,yd");
    dec->add_option("--kernel", dec_kernel, "Kernel on x")->capture_default_str();
    dec->add_option("--out-kernel", out_kernel, "Kernel on y (defaults to --kernel)");
    dec->add_option("--estimator", estimator,
                    "covariance | cross-covariance | cme | koopman | perron-frobenius | cca");
    dec->add_option("--mode", mode, "eig | svd")->capture_default_str();
    dec->add_option("--route", route, "qr | aux | block")->capture_default_str();
    dec->add_option("--epsilon", dec_eps, "Regularization, relative to the mean Gram diagonal");
    dec->add_option("--rank", dec_rank, "Number of functions to store (0 = all)")->capture_default_str();
    common(dec);

    // rerun
    auto* re = app.add_subcommand("rerun", "Re-run an experiment from a report and compare the results bitwise");
    std::string report_path;
    re->add_option("report", report_path, "Report file")->required();
    common(re);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsageError;
    }

    // the report itself goes to stdout with --output -, so the summary is dropped
    if (output == "-") quiet = true;

    try {
        rkhs::ExperimentReport rep;
        if (*mercer) {
            rkhs::MercerConfig cfg;
            cfg.samples = mercer_samples;
            cfg.seed = seed_option(seed);
            cfg.threshold = threshold;
            std::tie(cfg.grid_nx, cfg.grid_ny) = grid_option(mercer_grid);
            rep = rkhs::run_mercer(cfg);
            if (!quiet) {
                print_values("eigenvalues", rep.vector("eigenvalues"), 8);
                print_values("reference", rep.vector("reference_eigenvalues"), 6);
                print_values("relative error", rep.vector("eigenvalue_relative_error"), 6);
            }
        } else if (*crosscov) {
            rkhs::CrossCovConfig cfg;
            cfg.samples = cc_samples;
            cfg.rho = rho;
            cfg.kernel = rkhs::Kernel::parse(cc_kernel);
            cfg.seed = seed_option(seed);
            cfg.rank = cc_rank;
            cfg.grid_points = cc_grid;
            cfg.threshold = threshold;
            rep = rkhs::run_crosscov(cfg);
            if (!quiet) {
                print_values("singular values", rep.vector("singular_values"), 6);
                std::printf("rank-%lld HS error / HS norm: %.6g\n", static_cast<long long>(cc_rank),
                            rep.scalar("truncation_relative_error"));
            }
        } else if (*gyre) {
            rkhs::DoubleGyreConfig cfg;
            std::tie(cfg.nx, cfg.ny) = grid_option(gyre_grid);
            cfg.tau = tau;
            cfg.kernel = rkhs::Kernel::parse(gyre_kernel);
            cfg.epsilon = gyre_eps;
            cfg.functions = gyre_functions;
            cfg.threshold = threshold;
            rep = rkhs::run_doublegyre(cfg);
            if (!quiet) print_values("singular values", rep.vector("singular_values"), 6);
        } else if (*dec) {
            rkhs::DecomposeConfig cfg;
            cfg.x_path = x_path;
            if (!y_path.empty()) cfg.y_path = y_path;
            cfg.kernel = rkhs::Kernel::parse(dec_kernel);
            if (!out_kernel.empty()) cfg.out_kernel = rkhs::Kernel::parse(out_kernel);
            if (!estimator.empty()) cfg.estimator = rkhs::parse_estimator(estimator);
            cfg.mode = rkhs::parse_mode(mode);
            cfg.route = rkhs::parse_route(route);
            cfg.epsilon = dec_eps;
            cfg.threshold = threshold;
            cfg.rank = dec_rank;
            rep = rkhs::decompose_csv(cfg);
            if (!quiet) {
                if (rep.has_array("singular_values"))
                    print_values("singular values", rep.vector("singular_values"), 8);
                else
                    print_values("eigenvalues (real part)", rep.vector("eigenvalues_real"), 8);
            }
        } else if (*re) {
            const auto original = rkhs::ExperimentReport::load(report_path);
            rep = rkhs::rerun(original);
            const bool same = rep == original;
            if (!quiet) std::printf("%s\n", same ? "identical" : "DIFFERENT");
            if (!output.empty()) finish(rep, output);
            return same ? 0 : kNumericalError;
        }
        if (!output.empty()) finish(rep, output);
        return 0;
    } catch (const rkhs::InvalidArgument& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return kUsageError;
    } catch (const rkhs::NumericalError& e) {
        std::fprintf(stderr, "numerical error: %s\n", e.what());
        return kNumericalError;
    }
}
