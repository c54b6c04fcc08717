#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "rkhs/decomp.hpp"
#include "rkhs/dynamics.hpp"
#include "rkhs/error.hpp"
#include "rkhs/estimators.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/operator.hpp"
#include "rkhs/report.hpp"

namespace rkhs {

inline constexpr std::uint64_t kDefaultSeed = 42;

// ---------------------------------------------------------------------------
// Closed-form spectrum of the (1 + x.y)^2 kernel under the uniform probability measure on [-2, 2]^2

struct MercerReference {
    static constexpr Index kCount = 6;

    static Vector eigenvalues() {
        const double root = std::sqrt(60841.0);
        Vector l(kCount);
        l << (269.0 + root) / 90.0, 32.0 / 9.0, 8.0 / 3.0, 8.0 / 3.0, 64.0 / 45.0, (269.0 - root) / 90.0;
        return l;
    }

    /// Unit-L2 eigenfunction i (0-based) at (x1, x2). Functions 2 and 3 share an eigenvalue.
    static double eigenfunction(Index i, double x1, double x2) {
        switch (i) {
            case 0: return radial(shift(+1.0), x1, x2);
            case 1: return 0.75 * x1 * x2;
            case 2: return std::sqrt(3.0) / 2.0 * x1;
            case 3: return std::sqrt(3.0) / 2.0 * x2;
            case 4: return std::sqrt(45.0 / 128.0) * (x1 * x1 - x2 * x2);
            case 5: return radial(shift(-1.0), x1, x2);
            default: throw InvalidArgument("Mercer reference has six eigenfunctions");
        }
    }

    /// Columns are the six eigenfunctions evaluated at the rows of `points`.
    static Matrix evaluate(const DataSet& points) {
        if (points.dim() != 2) throw InvalidArgument("Mercer reference is two-dimensional");
        Matrix out(points.size(), kCount);
        for (Index r = 0; r < points.size(); ++r)
            for (Index i = 0; i < kCount; ++i) out(r, i) = eigenfunction(i, points.row(r)[0], points.row(r)[1]);
        return out;
    }

private:
    // a in c (a + |x|^2); root sign +1 belongs to the largest eigenvalue
    static double shift(double sign) { return (-179.0 + sign * std::sqrt(60841.0)) / 120.0; }

    static double radial(double a, double x1, double x2) {
        // E[r^2] = 8/3, E[r^4] = 448/45
        const double second_moment = a * a + 2.0 * a * 8.0 / 3.0 + 448.0 / 45.0;
        return (a + x1 * x1 + x2 * x2) / std::sqrt(second_moment);
    }
};

// ---------------------------------------------------------------------------
// CSV input

/// Reads a CSV file with header `<prefix>1,...,<prefix>d` and one observation per row.
inline DataSet read_csv(const std::string& path, char prefix = 'x') {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open CSV file '" + path + "'");
    auto strip = [](std::string& s) {
        while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
        std::size_t b = 0;
        while (b < s.size() && (s[b] == ' ' || s[b] == '\t')) ++b;
        s.erase(0, b);
    };
    std::string line;
    if (!std::getline(f, line)) throw InvalidArgument(path + ": empty file, expected a header line");
    if (line.size() >= 3 && static_cast<unsigned char>(line[0]) == 0xEF && static_cast<unsigned char>(line[1]) == 0xBB &&
        static_cast<unsigned char>(line[2]) == 0xBF)
        line.erase(0, 3);
    strip(line);
    const auto header = detail::split(line, ',');
    const auto d = static_cast<Index>(header.size());
    for (Index j = 0; j < d; ++j) {
        std::string h(header[static_cast<std::size_t>(j)]);
        strip(h);
        if (h != std::string(1, prefix) + std::to_string(j + 1))
            throw InvalidArgument(path + ":1: header column " + std::to_string(j + 1) + " must be '" + prefix +
                                  std::to_string(j + 1) + "', found '" + h + "'");
    }
    std::vector<double> values;
    Index rows = 0;
    std::size_t line_no = 1;
    while (std::getline(f, line)) {
        ++line_no;
        strip(line);
        if (line.empty()) continue;
        const auto cells = detail::split(line, ',');
        if (static_cast<Index>(cells.size()) != d)
            throw InvalidArgument(path + ":" + std::to_string(line_no) + ": expected " + std::to_string(d) +
                                  " values, found " + std::to_string(cells.size()));
        for (const auto cell : cells) {
            std::string c(cell);
            strip(c);
            try {
                values.push_back(detail::parse_double(c, "CSV cell"));
            } catch (const InvalidArgument& e) {
                throw InvalidArgument(path + ":" + std::to_string(line_no) + ": " + e.what());
            }
        }
        ++rows;
    }
    if (rows == 0) throw InvalidArgument(path + ": no data rows");
    PointMatrix pts(rows, d);
    std::copy(values.begin(), values.end(), pts.data());
    return DataSet(std::move(pts));
}

namespace detail {

inline std::string rectangle_to_string(const Rectangle& r) {
    return format_double(r.x_min) + "," + format_double(r.x_max) + "," + format_double(r.y_min) + "," +
           format_double(r.y_max);
}

inline Rectangle rectangle_from_string(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 4) throw InvalidArgument("rectangle must be x_min,x_max,y_min,y_max");
    Rectangle r{parse_double(parts[0], "x_min"), parse_double(parts[1], "x_max"), parse_double(parts[2], "y_min"),
                parse_double(parts[3], "y_max")};
    r.validate();
    return r;
}

/// Columns c_i of `coeffs` evaluated at `points` through the basis kernel.
inline Matrix evaluate_columns(const FeatureMatrix& basis, const Matrix& coeffs, const DataSet& points) {
    const Matrix k = cross_gram(FeatureMatrix{points, basis.kernel}, basis);
    return k * coeffs;
}

/// min over signs of |a - s b| / |b|
inline double signed_relative_error(const Vector& a, const Vector& b) {
    const double nb = b.norm();
    return std::min((a - b).norm(), (a + b).norm()) / nb;
}

/// Principal angles (degrees, ascending) between the column spans of a and b.
inline Vector principal_angles_deg(const Matrix& a, const Matrix& b) {
    const Matrix qa = Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(a.rows(), a.cols());
    const Matrix qb = Eigen::HouseholderQR<Matrix>(b).householderQ() * Matrix::Identity(b.rows(), b.cols());
    const Vector cosines = Eigen::JacobiSVD<Matrix>(qa.transpose() * qb).singularValues();
    Vector out(cosines.size());
    for (Index i = 0; i < cosines.size(); ++i)
        out(i) = std::acos(std::clamp(cosines(i), -1.0, 1.0)) * 180.0 / std::numbers::pi;
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Mercer example: covariance operator of (1 + x.y)^2 on uniform samples from [-2, 2]^2

struct MercerConfig {
    Index samples = 5000;
    std::uint64_t seed = kDefaultSeed;
    Index grid_nx = 50;
    Index grid_ny = 50;
    double threshold = kDefaultThreshold;
};

inline ExperimentReport run_mercer(const MercerConfig& cfg) {
    if (cfg.samples < 10) throw InvalidArgument("mercer: need at least 10 samples");
    if (cfg.grid_nx < 1 || cfg.grid_ny < 1) throw InvalidArgument("mercer: grid must be at least 1x1");
    const Rectangle domain{-2.0, 2.0, -2.0, 2.0};
    const Kernel kernel = Kernel::polynomial(2, 1.0);

    ExperimentReport rep("mercer");
    rep.set("samples", static_cast<long long>(cfg.samples));
    rep.set("seed", std::to_string(cfg.seed));
    rep.set("rng", Random::kAlgorithm);
    rep.set("kernel", kernel.to_string());
    rep.set("domain", detail::rectangle_to_string(domain));
    rep.set("threshold", cfg.threshold);
    rep.set("grid", std::to_string(cfg.grid_nx) + "," + std::to_string(cfg.grid_ny));

    const DataSet x = sample_uniform(domain, cfg.samples, cfg.seed);
    const EmpiricalOperator s = covariance(x, kernel);
    const EigResult eig = eig_via_aux(s, cfg.threshold);
    if (static_cast<Index>(eig.size()) < MercerReference::kCount)
        throw NumericalError("mercer: fewer than six eigenvalues above the threshold");

    const Vector values = eig.real_eigenvalues();
    const Vector reference = MercerReference::eigenvalues();
    const Index k = MercerReference::kCount;
    Matrix coeffs_rkhs(x.size(), k);
    for (Index i = 0; i < k; ++i) coeffs_rkhs.col(i) = eig.pairs[static_cast<std::size_t>(i)].f.coefficients.real();
    Matrix coeffs_l2 = coeffs_rkhs;
    for (Index i = 0; i < k; ++i) coeffs_l2.col(i) /= std::sqrt(values(i));

    const DataSet grid = grid_midpoints(cfg.grid_nx, cfg.grid_ny, domain);
    const Matrix computed = detail::evaluate_columns(s.in_basis, coeffs_l2, grid);
    const Matrix analytic = MercerReference::evaluate(grid);

    Vector eig_error(k);
    for (Index i = 0; i < k; ++i) eig_error(i) = std::abs(values(i) - reference(i)) / reference(i);
    Vector fn_error(k);
    for (Index i : {0, 1, 4, 5}) fn_error(i) = detail::signed_relative_error(computed.col(i), analytic.col(i));
    // the degenerate pair is compared through its projection onto the analytic subspace
    const Matrix pair = analytic.middleCols(2, 2);
    const Matrix projector_coeffs = pair.colPivHouseholderQr().solve(computed.middleCols(2, 2));
    for (Index i : {2, 3}) {
        const Vector proj = pair * projector_coeffs.col(i - 2);
        fn_error(i) = (computed.col(i) - proj).norm() / computed.col(i).norm();
    }
    const Vector angles = detail::principal_angles_deg(computed.middleCols(2, 2), pair);

    rep.set_array("eigenvalues", values);
    rep.set_array("reference_eigenvalues", reference);
    rep.set_array("eigenvalue_relative_error", eig_error);
    rep.set_array("eigenfunction_relative_error", fn_error);
    rep.set_array("degenerate_pair_angles_deg", angles);
    rep.set_array("grid_points", Matrix(grid.points()));
    rep.set_array("eigenfunctions_l2", computed);
    rep.set_array("reference_eigenfunctions", analytic);
    rep.set_array("coefficients_rkhs", coeffs_rkhs);
    rep.set_array("coefficients_l2", coeffs_l2);
    return rep;
}

// ---------------------------------------------------------------------------
// Cross-covariance of a two-component Gaussian mixture

struct CrossCovConfig {
    Index samples = 2000;
    double rho = 0.5;
    Kernel kernel = Kernel::gaussian(0.1, true);
    std::uint64_t seed = kDefaultSeed;
    Index grid_points = 201;
    Index rank = 2;
    double threshold = kDefaultThreshold;
};

inline ExperimentReport run_crosscov(const CrossCovConfig& cfg) {
    if (cfg.samples < 10) throw InvalidArgument("crosscov: need at least 10 samples");
    if (cfg.grid_points < 2) throw InvalidArgument("crosscov: need at least 2 grid points");
    if (cfg.rank < 1) throw InvalidArgument("crosscov: rank must be >= 1");

    ExperimentReport rep("crosscov");
    rep.set("samples", static_cast<long long>(cfg.samples));
    rep.set("rho", cfg.rho);
    rep.set("kernel", cfg.kernel.to_string());
    rep.set("seed", std::to_string(cfg.seed));
    rep.set("rng", Random::kAlgorithm);
    rep.set("grid_points", static_cast<long long>(cfg.grid_points));
    rep.set("rank", static_cast<long long>(cfg.rank));
    rep.set("threshold", cfg.threshold);

    const PairedSample data = sample_mixture(cfg.samples, cfg.rho, cfg.seed);
    const EmpiricalOperator s = cross_covariance(data.x, data.y, cfg.kernel, cfg.kernel);
    const SvdResult svd = svd_via_aux(s, cfg.threshold);
    if (static_cast<Index>(svd.size()) < cfg.rank) throw NumericalError("crosscov: fewer singular values than the requested rank");

    const Vector sigma = svd.singular_values();
    const Matrix left = svd.left_coefficients().leftCols(cfg.rank);
    const Matrix right = svd.right_coefficients().leftCols(cfg.rank);
    PointMatrix g(cfg.grid_points, 1);
    for (Index i = 0; i < cfg.grid_points; ++i)
        g(i, 0) = -2.0 + 4.0 * static_cast<double>(i) / static_cast<double>(cfg.grid_points - 1);
    const DataSet grid{g};

    const double norm = hs_norm(s);
    const double tail = hs_norm(difference(s, truncate(s, svd, cfg.rank)));

    rep.set_array("singular_values", sigma);
    rep.set_scalar("hs_norm", norm);
    rep.set_scalar("truncation_hs_error", tail);
    rep.set_scalar("truncation_relative_error", tail / norm);
    if (sigma.size() > cfg.rank) rep.set_scalar("sigma_ratio", sigma(cfg.rank) / sigma(0));
    rep.set_array("grid", Vector(g.col(0)));
    rep.set_array("left_functions", detail::evaluate_columns(s.out_basis, left, grid));
    rep.set_array("right_functions", detail::evaluate_columns(s.in_basis, right, grid));
    rep.set_array("x", Vector(data.x.points().col(0)));
    rep.set_array("y", Vector(data.y.points().col(0)));
    rep.set_array("left_coefficients", left);
    rep.set_array("right_coefficients", right);
    return rep;
}

// ---------------------------------------------------------------------------
// Coherent sets of the double gyre through the kernel CCA operator

struct DoubleGyreConfig {
    Index nx = 120;
    Index ny = 60;
    double tau = 10.0;
    Kernel kernel = Kernel::gaussian(0.25);
    double epsilon = kDefaultCcaEpsilon;
    Index functions = 3;
    double threshold = kDefaultThreshold;
    DoubleGyreParams flow{};
    IntegratorConfig integrator{};
};

inline ExperimentReport run_doublegyre(const DoubleGyreConfig& cfg) {
    if (cfg.nx < 10 || cfg.ny < 5) throw InvalidArgument("doublegyre: grid must be at least 10x5");
    if (cfg.functions < 1) throw InvalidArgument("doublegyre: need at least one singular function");

    ExperimentReport rep("doublegyre");
    rep.set("grid", std::to_string(cfg.nx) + "," + std::to_string(cfg.ny));
    rep.set("tau", cfg.tau);
    rep.set("kernel", cfg.kernel.to_string());
    rep.set("epsilon", cfg.epsilon);
    rep.set("functions", static_cast<long long>(cfg.functions));
    rep.set("threshold", cfg.threshold);
    rep.set("amplitude", cfg.flow.amplitude);
    rep.set("perturbation", cfg.flow.perturbation);
    rep.set("frequency", cfg.flow.frequency);
    rep.set("rel_tol", cfg.integrator.rel_tol);
    rep.set("abs_tol", cfg.integrator.abs_tol);

    const DataSet x = grid_midpoints(cfg.nx, cfg.ny);
    const DataSet y = flow_map_dataset(x, cfg.tau, cfg.flow, cfg.integrator);
    Vector sigma;
    Matrix right;
    {
        const EmpiricalOperator s = cca_operator(x, y, cfg.kernel, cfg.kernel, Regularizer(cfg.epsilon));
        const SvdResult svd = svd_via_aux(s, cfg.threshold);
        if (static_cast<Index>(svd.size()) < cfg.functions)
            throw NumericalError("doublegyre: fewer singular values than requested functions");
        sigma = svd.singular_values();
        right = svd.right_coefficients().leftCols(cfg.functions);
    }
    rep.set_array("singular_values", sigma);
    rep.set_array("grid_points", Matrix(x.points()));
    rep.set_array("images", Matrix(y.points()));
    rep.set_array("right_functions", detail::evaluate_columns(FeatureMatrix{x, cfg.kernel}, right, x));
    rep.set_array("right_coefficients", right);
    return rep;
}

// ---------------------------------------------------------------------------
// Decomposition of user data

enum class Estimator { covariance, cross_covariance, cme, koopman, perron_frobenius, cca };
enum class Mode { eig, svd };
enum class Route { qr, aux, block };

inline Estimator parse_estimator(std::string_view s) {
    if (s == "covariance") return Estimator::covariance;
    if (s == "cross-covariance") return Estimator::cross_covariance;
    if (s == "cme") return Estimator::cme;
    if (s == "koopman") return Estimator::koopman;
    if (s == "perron-frobenius") return Estimator::perron_frobenius;
    if (s == "cca") return Estimator::cca;
    throw InvalidArgument("unknown estimator '" + std::string(s) +
                          "' (covariance, cross-covariance, cme, koopman, perron-frobenius, cca)");
}

inline std::string to_string(Estimator e) {
    switch (e) {
        case Estimator::covariance: return "covariance";
        case Estimator::cross_covariance: return "cross-covariance";
        case Estimator::cme: return "cme";
        case Estimator::koopman: return "koopman";
        case Estimator::perron_frobenius: return "perron-frobenius";
        case Estimator::cca: return "cca";
    }
    return "?";
}

inline Mode parse_mode(std::string_view s) {
    if (s == "eig") return Mode::eig;
    if (s == "svd") return Mode::svd;
    throw InvalidArgument("unknown mode '" + std::string(s) + "' (eig, svd)");
}

inline std::string to_string(Mode m) { return m == Mode::eig ? "eig" : "svd"; }

inline Route parse_route(std::string_view s) {
    if (s == "qr") return Route::qr;
    if (s == "aux") return Route::aux;
    if (s == "block") return Route::block;
    throw InvalidArgument("unknown route '" + std::string(s) + "' (qr, aux, block)");
}

inline std::string to_string(Route r) {
    switch (r) {
        case Route::qr: return "qr";
        case Route::aux: return "aux";
        case Route::block: return "block";
    }
    return "?";
}

struct DecomposeConfig {
    std::string x_path;
    std::optional<std::string> y_path;
    Kernel kernel = Kernel::gaussian(1.0);
    std::optional<Kernel> out_kernel;  // defaults to `kernel`
    std::optional<Estimator> estimator;
    Mode mode = Mode::svd;
    Route route = Route::aux;
    std::optional<double> epsilon;    // defaults per estimator
    double threshold = kDefaultThreshold;
    Index rank = 0;                   // 0 keeps every retained function
};

inline EmpiricalOperator build_estimator(Estimator e, const DataSet& x, const std::optional<DataSet>& y,
                                         const Kernel& k, const Kernel& l, double epsilon) {
    if (e == Estimator::covariance) {
        if (y) throw InvalidArgument("the covariance estimator takes a single data file");
        return covariance(x, k);
    }
    if (!y) throw InvalidArgument("estimator '" + to_string(e) + "' needs a paired data file");
    const Regularizer reg(epsilon);
    switch (e) {
        case Estimator::cross_covariance: return cross_covariance(x, *y, k, l);
        case Estimator::cme: return cme(x, *y, k, l, reg);
        case Estimator::koopman: return koopman(x, *y, k, reg);
        case Estimator::perron_frobenius: return perron_frobenius(x, *y, k, reg);
        case Estimator::cca: return cca_operator(x, *y, k, l, reg);
        default: break;
    }
    throw InvalidArgument("unhandled estimator");
}

inline ExperimentReport decompose_csv(const DecomposeConfig& cfg) {
    if (cfg.rank < 0) throw InvalidArgument("rank must be >= 0");
    const Estimator est = cfg.estimator.value_or(cfg.y_path ? Estimator::cross_covariance : Estimator::covariance);
    const Kernel out_kernel = cfg.out_kernel.value_or(cfg.kernel);
    if ((est == Estimator::koopman || est == Estimator::perron_frobenius) && !(out_kernel == cfg.kernel))
        throw InvalidArgument("transfer operator estimators use a single kernel");
    const double epsilon = cfg.epsilon.value_or(est == Estimator::cca ? kDefaultCcaEpsilon : kDefaultEpsilon);
    if (cfg.mode == Mode::eig && cfg.route == Route::block)
        throw InvalidArgument("the block route computes SVDs only; use --route qr or --route aux for eig");

    ExperimentReport rep("decompose");
    rep.set("x_path", cfg.x_path);
    if (cfg.y_path) rep.set("y_path", *cfg.y_path);
    rep.set("kernel", cfg.kernel.to_string());
    rep.set("out_kernel", out_kernel.to_string());
    rep.set("estimator", to_string(est));
    rep.set("mode", to_string(cfg.mode));
    rep.set("route", to_string(cfg.route));
    rep.set("epsilon", epsilon);
    rep.set("threshold", cfg.threshold);
    rep.set("rank", static_cast<long long>(cfg.rank));

    const DataSet x = read_csv(cfg.x_path, 'x');
    std::optional<DataSet> y;
    if (cfg.y_path) {
        y = read_csv(*cfg.y_path, 'y');
        if (y->size() != x.size())
            throw InvalidArgument("paired files have " + std::to_string(x.size()) + " and " + std::to_string(y->size()) +
                                  " rows");
    }
    const EmpiricalOperator s = build_estimator(est, x, y, cfg.kernel, out_kernel, epsilon);

    if (cfg.mode == Mode::eig) {
        const EigResult eig = cfg.route == Route::qr ? eig_via_qr(s, cfg.threshold) : eig_via_aux(s, cfg.threshold);
        const ComplexVector values = eig.eigenvalues();
        const auto keep = cfg.rank == 0 ? values.size() : std::min<Index>(cfg.rank, values.size());
        Eigen::MatrixXcd coeffs(eig.basis.size(), keep);
        for (Index i = 0; i < keep; ++i) coeffs.col(i) = eig.pairs[static_cast<std::size_t>(i)].f.coefficients;
        rep.set("symmetric", eig.symmetric ? "true" : "false");
        rep.set_array("eigenvalues_real", Vector(values.real()));
        rep.set_array("eigenvalues_imag", Vector(values.imag()));
        rep.set_array("coefficients_real", Matrix(coeffs.real()));
        rep.set_array("coefficients_imag", Matrix(coeffs.imag()));
        return rep;
    }
    SvdResult svd;
    switch (cfg.route) {
        case Route::qr: svd = svd_via_qr(s, cfg.threshold); break;
        case Route::aux: svd = svd_via_aux(s, cfg.threshold); break;
        case Route::block: svd = svd_via_block(s, cfg.threshold); break;
    }
    const Vector sigma = svd.singular_values();
    const auto keep = cfg.rank == 0 ? sigma.size() : std::min<Index>(cfg.rank, sigma.size());
    rep.set_array("singular_values", sigma);
    rep.set_array("left_coefficients", Matrix(svd.left_coefficients().leftCols(keep)));
    rep.set_array("right_coefficients", Matrix(svd.right_coefficients().leftCols(keep)));
    return rep;
}

// ---------------------------------------------------------------------------
// Re-running a report from its recorded parameters

namespace detail {

inline std::pair<Index, Index> parse_grid(const std::string& s) {
    const auto parts = split(s, ',');
    if (parts.size() != 2) throw InvalidArgument("grid must be given as nx,ny");
    return {parse_long(parts[0], "nx"), parse_long(parts[1], "ny")};
}

inline std::uint64_t parse_seed(const std::string& s) {
    if (s.empty() || s.find_first_not_of("0123456789") != std::string::npos)
        throw InvalidArgument("seed must be a non-negative integer: '" + s + "'");
    return std::stoull(s);
}

inline void require_rng(const ExperimentReport& rep) {
    if (rep.param("rng") != Random::kAlgorithm)
        throw InvalidArgument("report was produced with random generator '" + rep.param("rng") + "'");
}

}  // namespace detail

inline MercerConfig mercer_config(const ExperimentReport& rep) {
    detail::require_rng(rep);
    if (rep.param("kernel") != Kernel::polynomial(2, 1.0).to_string())
        throw InvalidArgument("mercer report records an unexpected kernel");
    MercerConfig cfg;
    cfg.samples = rep.param_long("samples");
    cfg.seed = detail::parse_seed(rep.param("seed"));
    cfg.threshold = rep.param_double("threshold");
    std::tie(cfg.grid_nx, cfg.grid_ny) = detail::parse_grid(rep.param("grid"));
    return cfg;
}

inline CrossCovConfig crosscov_config(const ExperimentReport& rep) {
    detail::require_rng(rep);
    CrossCovConfig cfg;
    cfg.samples = rep.param_long("samples");
    cfg.rho = rep.param_double("rho");
    cfg.kernel = Kernel::parse(rep.param("kernel"));
    cfg.seed = detail::parse_seed(rep.param("seed"));
    cfg.grid_points = rep.param_long("grid_points");
    cfg.rank = rep.param_long("rank");
    cfg.threshold = rep.param_double("threshold");
    return cfg;
}

inline DoubleGyreConfig doublegyre_config(const ExperimentReport& rep) {
    DoubleGyreConfig cfg;
    std::tie(cfg.nx, cfg.ny) = detail::parse_grid(rep.param("grid"));
    cfg.tau = rep.param_double("tau");
    cfg.kernel = Kernel::parse(rep.param("kernel"));
    cfg.epsilon = rep.param_double("epsilon");
    cfg.functions = rep.param_long("functions");
    cfg.threshold = rep.param_double("threshold");
    cfg.flow.amplitude = rep.param_double("amplitude");
    cfg.flow.perturbation = rep.param_double("perturbation");
    cfg.flow.frequency = rep.param_double("frequency");
    cfg.integrator.rel_tol = rep.param_double("rel_tol");
    cfg.integrator.abs_tol = rep.param_double("abs_tol");
    return cfg;
}

inline DecomposeConfig decompose_config(const ExperimentReport& rep) {
    DecomposeConfig cfg;
    cfg.x_path = rep.param("x_path");
    if (rep.has("y_path")) cfg.y_path = rep.param("y_path");
    cfg.kernel = Kernel::parse(rep.param("kernel"));
    cfg.out_kernel = Kernel::parse(rep.param("out_kernel"));
    cfg.estimator = parse_estimator(rep.param("estimator"));
    cfg.mode = parse_mode(rep.param("mode"));
    cfg.route = parse_route(rep.param("route"));
    cfg.epsilon = rep.param_double("epsilon");
    cfg.threshold = rep.param_double("threshold");
    cfg.rank = rep.param_long("rank");
    return cfg;
}

/// Runs the experiment described by `rep` again from its recorded parameters.
inline ExperimentReport rerun(const ExperimentReport& rep) {
    const std::string& name = rep.experiment();
    if (name == "mercer") return run_mercer(mercer_config(rep));
    if (name == "crosscov") return run_crosscov(crosscov_config(rep));
    if (name == "doublegyre") return run_doublegyre(doublegyre_config(rep));
    if (name == "decompose") return decompose_csv(decompose_config(rep));
    throw InvalidArgument("unknown experiment '" + name + "'");
}

}  // namespace rkhs
