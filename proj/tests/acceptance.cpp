// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <random>
#include <string>
#include <unistd.h>
#include <vector>

#include "rkhs/rkhs.hpp"

using namespace rkhs;

namespace {

int failures = 0;

void report(const char* id, bool ok, const std::string& what) {
    std::printf("%s [%s] %s\n", ok ? "PASS" : "FAIL", id, what.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a) {
    char buf[128];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string list(const Vector& v) {
    std::string s;
    for (Index i = 0; i < v.size(); ++i) s += (i ? " " : "") + fmt("%.6g", v(i));
    return s;
}

template <typename F>
auto timed(double& seconds, F&& f) {
    const auto t0 = std::chrono::steady_clock::now();
    auto out = f();
    seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

// ---------------------------------------------------------------------------
// Mercer oracle: Galerkin solve on the monomials of degree <= 2. The kernel (1 + x.y)^2 has
// its range inside this space, so the Galerkin eigenpairs are exact. Integrals use the 3-point
// Gauss-Legendre rule per coordinate, which is exact for the degrees involved.

struct MercerOracle {
    Vector values;       // descending
    Matrix coeffs;       // 6 x 6, unit L2(mu) eigenfunctions in the monomial basis

    static Vector monomials(double x1, double x2) {
        Vector p(6);
        p << 1.0, x1, x2, x1 * x1, x1 * x2, x2 * x2;
        return p;
    }

    MercerOracle() {
        const double r = 2.0 * std::sqrt(0.6);
        const double nodes[3] = {-r, 0.0, r};
        const double weights[3] = {5.0 / 18.0, 8.0 / 18.0, 5.0 / 18.0};
        std::vector<Eigen::Vector2d> pts;
        std::vector<double> w;
        for (int a = 0; a < 3; ++a)
            for (int b = 0; b < 3; ++b) {
                pts.emplace_back(nodes[a], nodes[b]);
                w.push_back(weights[a] * weights[b]);
            }
        Matrix mass = Matrix::Zero(6, 6), stiff = Matrix::Zero(6, 6);
        for (std::size_t i = 0; i < pts.size(); ++i) {
            const Vector pi = monomials(pts[i](0), pts[i](1));
            mass += w[i] * pi * pi.transpose();
            for (std::size_t j = 0; j < pts.size(); ++j) {
                const double k = std::pow(1.0 + pts[i].dot(pts[j]), 2);
                stiff += w[i] * w[j] * k * pi * monomials(pts[j](0), pts[j](1)).transpose();
            }
        }
        Eigen::GeneralizedSelfAdjointEigenSolver<Matrix> es(stiff, mass);
        values = es.eigenvalues().reverse();
        coeffs = es.eigenvectors().rowwise().reverse();
    }

    Matrix evaluate(const Matrix& points) const {
        Matrix out(points.rows(), 6);
        for (Index i = 0; i < points.rows(); ++i) out.row(i) = monomials(points(i, 0), points(i, 1)).transpose() * coeffs;
        return out;
    }
};

Vector principal_angles(const Matrix& a, const Matrix& b) {
    const Matrix qa = Eigen::HouseholderQR<Matrix>(a).householderQ() * Matrix::Identity(a.rows(), a.cols());
    const Matrix qb = Eigen::HouseholderQR<Matrix>(b).householderQ() * Matrix::Identity(b.rows(), b.cols());
    const Vector c = Eigen::JacobiSVD<Matrix>(qa.transpose() * qb).singularValues();
    return c.unaryExpr([](double x) { return std::acos(std::min(1.0, x)) * 180.0 / M_PI; });
}

// ---------------------------------------------------------------------------
// Random well-conditioned instances

struct Instance {
    EmpiricalOperator s;
};

double condition(const Matrix& g) {
    const Vector ev = Eigen::SelfAdjointEigenSolver<Matrix>(g, Eigen::EigenvaluesOnly).eigenvalues();
    return ev(0) > 0 ? ev(ev.size() - 1) / ev(0) : INFINITY;
}

Instance random_instance(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> size(5, 20);
    std::uniform_real_distribution<double> unit(-2.0, 2.0), bw(0.4, 1.2);
    std::normal_distribution<double> normal;
    for (;;) {
        const Index n = size(rng), m = size(rng);
        auto pts = [&](Index count) {
            PointMatrix p(count, 2);
            for (Index i = 0; i < count; ++i) {
                // jittered grid so the points stay separated
                p(i, 0) = -2.0 + 4.0 * static_cast<double>(i % 5) / 4.0 + 0.2 * unit(rng);
                p(i, 1) = -2.0 + static_cast<double>(i / 5) + 0.2 * unit(rng);
            }
            return DataSet(std::move(p));
        };
        FeatureMatrix out{pts(n), Kernel::gaussian(bw(rng))};
        FeatureMatrix in{pts(m), Kernel::gaussian(bw(rng))};
        if (condition(gram(out)) > 1e6 || condition(gram(in)) > 1e6) continue;
        Matrix b(n, m);
        for (Index i = 0; i < n; ++i)
            for (Index j = 0; j < m; ++j) b(i, j) = normal(rng);
        return {EmpiricalOperator(out, b, in)};
    }
}

bool in_cluster(const Vector& s, Index i) {
    auto close = [&](Index a, Index b) { return std::abs(s(a) - s(b)) <= 1e-6 * std::max(s(a), s(b)); };
    return (i > 0 && close(i - 1, i)) || (i + 1 < s.size() && close(i, i + 1));
}

// ---------------------------------------------------------------------------

std::vector<ExperimentReport> reports;

void mercer_criteria() {
    const MercerOracle oracle;
    const double listed[6] = {5.7295, 3.5556, 2.6667, 2.6667, 1.4222, 0.2482};
    double oracle_dev = 0.0;
    for (int i = 0; i < 6; ++i) oracle_dev = std::max(oracle_dev, std::abs(oracle.values(i) - listed[i]));

    MercerConfig cfg;
    double t5000 = 0.0, t1000 = 0.0;
    const ExperimentReport rep = timed(t5000, [&] { return run_mercer(cfg); });
    reports.push_back(rep);
    const Vector l = rep.vector("eigenvalues");
    double err = 0.0;
    for (Index i = 0; i < 6; ++i) err = std::max(err, std::abs(l(i) - oracle.values(i)) / oracle.values(i));

    // the seventh eigenvalue, from the full spectrum of (1/m) G
    const DataSet x = sample_uniform({-2.0, 2.0, -2.0, 2.0}, cfg.samples, cfg.seed);
    Matrix g = gram(FeatureMatrix{x, Kernel::polynomial(2, 1.0)}) / static_cast<double>(cfg.samples);
    const Vector spectrum = linalg::symmetric_eigen(std::move(g), false).values;
    const double lambda7 = std::abs(spectrum(spectrum.size() - 7));

    report("1a", err < 0.05 && l.size() == 6 && lambda7 < 1e-8 && oracle_dev < 1e-4,
           "Mercer m=5000: eigenvalues " + list(l) + "; max relative error " + fmt("%.4f", err) +
               " (< 0.05); retained " + std::to_string(l.size()) + "; |lambda_7| " + fmt("%.3g", lambda7) +
               " (< 1e-8); oracle vs listed values " + fmt("%.1e", oracle_dev));
    report("1b", t5000 < 60.0, "Mercer m=5000 runtime " + fmt("%.1f", t5000) + " s (< 60 s)");

    MercerConfig small;
    small.samples = 1000;
    const ExperimentReport rep1000 = timed(t1000, [&] { return run_mercer(small); });
    const Vector l1000 = rep1000.vector("eigenvalues");
    double err1000 = 0.0;
    for (Index i = 0; i < 6; ++i) err1000 = std::max(err1000, std::abs(l1000(i) - oracle.values(i)) / oracle.values(i));
    report("1c", err1000 < 0.10 && t1000 < 5.0,
           "Mercer m=1000: max relative error " + fmt("%.4f", err1000) + " (< 0.10); runtime " + fmt("%.2f", t1000) +
               " s (< 5 s)");

    // eigenfunctions on the report grid against the oracle
    const Matrix grid = rep.matrix("grid_points");
    const Matrix computed = rep.matrix("eigenfunctions_l2");
    const Matrix analytic = oracle.evaluate(grid);
    double fn_err = 0.0;
    std::string detail;
    for (Index i : {0, 1, 4, 5}) {
        const double e = std::min((computed.col(i) - analytic.col(i)).norm(), (computed.col(i) + analytic.col(i)).norm()) /
                         analytic.col(i).norm();
        fn_err = std::max(fn_err, e);
        detail += fmt(" %.4f", e);
    }
    const Vector angles = principal_angles(computed.middleCols(2, 2), analytic.middleCols(2, 2));
    report("2", fn_err < 0.10 && angles.maxCoeff() < 10.0,
           "Mercer eigenfunctions: relative grid errors (e1 e2 e5 e6)" + detail + " (< 0.10); {e3,e4} principal angles " +
               list(angles) + " deg (< 10)");
}

void crosscov_criteria() {
    CrossCovConfig cfg;
    double t = 0.0;
    const ExperimentReport rep = timed(t, [&] { return run_crosscov(cfg); });
    reports.push_back(rep);
    const Vector s = rep.vector("singular_values");
    const double ratio = s(2) / s(0);
    report("3a", ratio < 0.15 && s(1) / s(0) >= 0.15 && t < 120.0,
           "cross-covariance m=2000 rho=0.5: sigma " + list(s.head(4)) + " ...; sigma3/sigma1 " + fmt("%.4f", ratio) +
               " (< 0.15) with sigma2/sigma1 " + fmt("%.3f", s(1) / s(0)) + "; runtime " + fmt("%.1f", t) +
               " s (< 120 s); reference sigma1,2 ~ 0.47, 0.43 not gated");

    // ||S||_HS^2 = (1/m^2) sum_ij G_Psi(i,j) G_Phi(i,j), computed directly from the samples
    const PairedSample data = sample_mixture(cfg.samples, cfg.rho, cfg.seed);
    const Matrix gx = gram(FeatureMatrix{data.x, cfg.kernel});
    const Matrix gy = gram(FeatureMatrix{data.y, cfg.kernel});
    const double hs = std::sqrt((gx.array() * gy.array()).sum()) / static_cast<double>(cfg.samples);
    const double tail = std::sqrt(std::max(0.0, hs * hs - s.head(2).squaredNorm()));
    const double rel = rep.scalar("truncation_relative_error");
    report("3b", rel < 0.15,
           "cross-covariance rank-2 truncation: HS error / HS norm " + fmt("%.4f", rel) + " (< 0.15); direct oracle " +
               fmt("%.4f", tail / hs));
}

void doublegyre_criteria() {
    DoubleGyreConfig reduced;
    reduced.nx = 60;
    reduced.ny = 30;
    const ExperimentReport rep = run_doublegyre(reduced);
    reports.push_back(rep);
    const Vector s = rep.vector("singular_values").head(3);
    report("4a", s.minCoeff() >= 0.8 && s.maxCoeff() <= 1.0 && s(0) >= s(1) && s(1) >= s(2),
           "double gyre 60x30: sigma1..3 " + list(s) + " (in [0.8, 1], non-increasing)");

    DoubleGyreConfig full;
    double t = 0.0;
    const ExperimentReport big = timed(t, [&] { return run_doublegyre(full); });
    reports.push_back(big);
    const Vector f = big.vector("singular_values").head(3);
    Vector target(3);
    target << 0.99, 0.98, 0.94;
    const double dev = (f - target).cwiseAbs().maxCoeff();
    report("4b", dev <= 0.05 && t < 600.0,
           "double gyre 120x60: sigma1..3 " + list(f) + " vs 0.99 0.98 0.94, max deviation " + fmt("%.4f", dev) +
               " (<= 0.05); runtime " + fmt("%.1f", t) + " s (< 600 s)");
}

void route_equivalence() {
    std::mt19937_64 rng(20240601);
    const int count = 120;
    double worst_sigma = 0.0, worst_overlap = 0.0;
    Index compared = 0;
    bool unmatched_ok = true;
    double t = 0.0;
    timed(t, [&] {
        for (int trial = 0; trial < count; ++trial) {
            const Instance inst = random_instance(rng);
            const SvdResult routes[3] = {svd_via_qr(inst.s), svd_via_aux(inst.s), svd_via_block(inst.s)};
            const Vector ref = routes[0].singular_values();
            for (int r = 1; r < 3; ++r) {
                const Vector sv = routes[r].singular_values();
                const Index common = std::min(sv.size(), ref.size());
                worst_sigma = std::max(worst_sigma, (sv.head(common) - ref.head(common)).cwiseAbs().maxCoeff() / ref(0));
                // values below the auxiliary route's cutoff may be missing from one side
                for (Index i = common; i < std::max(sv.size(), ref.size()); ++i)
                    unmatched_ok &= (i < ref.size() ? ref(i) : sv(i)) < 1e-5 * ref(0);
                for (Index i = 0; i < common; ++i) {
                    if (in_cluster(ref, i)) continue;
                    const auto& a = routes[0].triplets[static_cast<std::size_t>(i)];
                    const auto& b = routes[r].triplets[static_cast<std::size_t>(i)];
                    const double ou = std::abs(inner_product(a.u, b.u));
                    const double ov = std::abs(inner_product(a.v, b.v));
                    worst_overlap = std::max({worst_overlap, std::abs(1.0 - ou), std::abs(1.0 - ov)});
                    ++compared;
                }
            }
        }
        return 0;
    });
    report("5", worst_sigma <= 1e-8 && worst_overlap < 1e-6 && unmatched_ok && t < 30.0,
           std::to_string(count) + " random instances, qr/aux/block: max sigma difference " + fmt("%.2e", worst_sigma) +
               " sigma1 (<= 1e-8); max |1 - |<u,u'>||, |1 - |<v,v'>|| " + fmt("%.2e", worst_overlap) + " over " +
               std::to_string(compared) + " matched pairs (< 1e-6); runtime " + fmt("%.2f", t) + " s (< 30 s)");
}

void structural_identities() {
    std::mt19937_64 rng(777);
    const int count = 100;
    double a_err = 0.0, b_err = 0.0, c_err = 0.0, d_err = 0.0, f_slack = INFINITY;
    for (int trial = 0; trial < count; ++trial) {
        const EmpiricalOperator s = random_instance(rng).s;
        const SvdResult svd = svd_via_qr(s);
        const Vector sigma = svd.singular_values();
        const double s1 = sigma(0);

        // (a) sigma^2 against the nonzero eigenvalues of S*S
        const EigResult eig = eig_via_aux(compose(adjoint(s), s));
        const Vector lambda = eig.real_eigenvalues();
        const Index k = std::min(lambda.size(), sigma.size());
        a_err = std::max(a_err, (lambda.head(k) - sigma.head(k).cwiseAbs2()).cwiseAbs().maxCoeff() / (s1 * s1));

        // (b) block spectrum mirrored about zero
        const Matrix gi = gram(s.in_basis), go = gram(s.out_basis);
        const Index n = s.b.rows(), m = s.b.cols();
        Matrix t = Matrix::Zero(n + m, n + m);
        t.topRightCorner(n, m) = s.b * gi;
        t.bottomLeftCorner(m, n) = s.b.transpose() * go;
        const Eigen::VectorXcd ev = Eigen::EigenSolver<Matrix>(t, false).eigenvalues();
        std::vector<double> pos, neg;
        const double scale = ev.cwiseAbs().maxCoeff();
        for (Index i = 0; i < ev.size(); ++i) {
            if (std::abs(ev(i)) <= 1e-10 * scale) continue;
            b_err = std::max(b_err, std::abs(ev(i).imag()) / scale);
            (ev(i).real() > 0 ? pos : neg).push_back(std::abs(ev(i).real()));
        }
        std::sort(pos.begin(), pos.end());
        std::sort(neg.begin(), neg.end());
        if (pos.size() != neg.size()) b_err = INFINITY;
        for (std::size_t i = 0; i < std::min(pos.size(), neg.size()); ++i)
            b_err = std::max(b_err, std::abs(pos[i] - neg[i]) / scale);

        // (c) Eckart-Young
        for (Index j = 1; j < sigma.size(); ++j) {
            const double tail = sigma.tail(sigma.size() - j).norm();
            const double got = hs_norm(difference(s, truncate(s, svd, j)));
            c_err = std::max(c_err, std::abs(got - tail) / tail);
        }

        // (d) Moore-Penrose
        const EmpiricalOperator p = pseudoinverse(svd);
        d_err = std::max(d_err, hs_norm(difference(compose(s, compose(p, s)), s)) / hs_norm(s));
        d_err = std::max(d_err, hs_norm(difference(compose(p, compose(s, p)), p)) / hs_norm(p));

        // (f)
        f_slack = std::min(f_slack, norm_bound(s) - s1);
    }
    report("6a", a_err <= 1e-8, "sigma_i^2 vs eigenvalues of S*S: max difference " + fmt("%.2e", a_err) + " sigma1^2 (<= 1e-8)");
    report("6b", b_err <= 1e-8, "block spectrum +/- symmetry: max mismatch " + fmt("%.2e", b_err) + " (<= 1e-8)");
    report("6c", c_err <= 1e-8, "Eckart-Young tail identity: max relative error " + fmt("%.2e", c_err) + " (<= 1e-8)");
    report("6d", d_err <= 1e-8, "Moore-Penrose axioms: max relative HS residual " + fmt("%.2e", d_err) + " (<= 1e-8)");

    // (e) Phi^T (Phi Phi^T + eps I)^{-1/2} from explicit features vs (G + eps I)^{-1/2} Phi^T
    double e_err = 0.0;
    std::normal_distribution<double> normal;
    for (int trial = 0; trial < 50; ++trial) {
        for (double eps : {0.0, 1e-6}) {
            const Index d = eps == 0.0 ? 4 : 3;
            const Index npts = eps == 0.0 ? 4 : 9;  // eps = 0 needs both G and the d x d moment matrix invertible
            PointMatrix x(npts, d);
            for (Index i = 0; i < npts; ++i)
                for (Index j = 0; j < d; ++j) x(i, j) = normal(rng);
            const Matrix phi = Matrix(x).transpose();
            const Eigen::SelfAdjointEigenSolver<Matrix> es(phi * phi.transpose());
            const Vector inv_sqrt = (es.eigenvalues().array() + eps).rsqrt();
            const Matrix lhs = phi.transpose() * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().transpose();
            const Matrix g = gram(FeatureMatrix{DataSet(x), Kernel::linear()});
            const Matrix rhs = reg_inv_sqrt(g, Regularizer(eps / g.diagonal().mean())) * phi.transpose();
            e_err = std::max(e_err, (lhs - rhs).norm() / lhs.norm());
        }
    }
    report("6e", e_err <= 1e-8, "regularized inverse square root with explicit linear features, eps in {0, 1e-6}: max relative difference " +
                                     fmt("%.2e", e_err) + " (<= 1e-8)");
    report("6f", f_slack >= 0.0, "norm_bound - sigma1 over " + std::to_string(count) + " instances: min " + fmt("%.3g", f_slack) + " (>= 0)");
}

void multiplicity() {
    auto pts = [](std::initializer_list<std::pair<double, double>> p) {
        PointMatrix m(static_cast<Index>(p.size()), 2);
        Index i = 0;
        for (const auto& [a, b] : p) {
            m(i, 0) = a;
            m(i, 1) = b;
            ++i;
        }
        return DataSet(std::move(m));
    };
    const DataSet cross = pts({{1, 0}, {0, 1}, {-1, 0}, {0, -1}});
    double worst = INFINITY;
    std::string detail;
    for (const Kernel& k : {Kernel::linear(), Kernel::gaussian(0.8)}) {
        // covariance of a symmetric configuration: a double eigenvalue by construction
        const EigResult eig = eig_via_aux(covariance(cross, k));
        const Vector l = eig.real_eigenvalues();
        Index pair = -1;
        for (Index i = 0; i + 1 < l.size(); ++i)
            if (std::abs(l(i) - l(i + 1)) <= 1e-12 * l(0)) pair = i;
        if (pair < 0) {
            worst = -1.0;
            continue;
        }
        Matrix gm(2, 2);
        for (int a = 0; a < 2; ++a)
            for (int b = 0; b < 2; ++b)
                gm(a, b) = std::real(inner_product(eig.pairs[static_cast<std::size_t>(pair + a)].f,
                                                   eig.pairs[static_cast<std::size_t>(pair + b)].f));
        const double mn = Eigen::SelfAdjointEigenSolver<Matrix>(gm).eigenvalues()(0);
        worst = std::min(worst, mn);
        detail += " " + k.to_string() + ": lambda " + fmt("%.6g", l(pair)) + " x2, Gram min eigenvalue " + fmt("%.6g", mn) + ";";
    }
    report("7", worst > 1e-6, "double eigenvalue keeps two independent eigenfunctions:" + detail + " (> 1e-6)");
}

void determinism() {
    // a small decomposition run joins the experiment reports
    const std::filesystem::path dir = std::filesystem::temp_directory_path() / ("rkhs_acceptance_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    {
        std::mt19937_64 rng(5);
        std::normal_distribution<double> normal;
        std::ofstream fx(dir / "x.csv"), fy(dir / "y.csv");
        fx << "x1,x2\n";
        fy << "y1\n";
        for (int i = 0; i < 40; ++i) {
            const double a = normal(rng), b = normal(rng);
            fx << detail::format_double(a) << "," << detail::format_double(b) << "\n";
            fy << detail::format_double(a * b + 0.1 * normal(rng)) << "\n";
        }
    }
    DecomposeConfig dc;
    dc.x_path = (dir / "x.csv").string();
    dc.y_path = (dir / "y.csv").string();
    dc.estimator = Estimator::cme;
    reports.push_back(decompose_csv(dc));

    bool ok = true;
    std::string names;
    for (const auto& rep : reports) {
        const ExperimentReport copy = ExperimentReport::parse(rep.serialize());
        const bool same = copy == rep && rerun(copy) == rep;
        ok &= same;
        names += " " + rep.experiment() + (rep.has("grid") ? "(" + rep.param("grid") + ")" : "") + (same ? "=" : "!=");
    }
    std::filesystem::remove_all(dir);
    report("8", ok, "reports re-run from their recorded parameters reproduce bitwise:" + names);
}

}  // namespace

int main(int, char** argv) {
    try {
        linalg::ensure_working_blas(argv);
    } catch (const std::exception& e) {
        std::printf("FAIL [blas] %s\n", e.what());
        return 1;
    }
    const std::pair<const char*, std::function<void()>> steps[] = {
        {"1-2", mercer_criteria}, {"3", crosscov_criteria}, {"4", doublegyre_criteria}, {"5", route_equivalence},
        {"6", structural_identities}, {"7", multiplicity}, {"8", determinism}};
    for (const auto& [id, step] : steps) {
        try {
            step();
        } catch (const std::exception& e) {
            report(id, false, std::string("exception: ") + e.what());
        }
    }
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
