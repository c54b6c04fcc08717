#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <numeric>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <cblas.h>
#include <lapacke.h>
#include <unistd.h>

#include "rkhs/error.hpp"
#include "rkhs/kernel.hpp"

// Dense kernels shared by the decomposition routines. Large symmetric problems
// and the big matrix products go through LAPACK/BLAS; everything else stays in Eigen.
namespace rkhs::linalg {

/// Compares a BLAS product against Eigen's own kernel at a size that takes the blocked path.
inline bool blas_self_test() {
    const Index n = 333;
    Matrix a(n, n), b(n, n);
    for (Index j = 0; j < n; ++j)
        for (Index i = 0; i < n; ++i) {
            a(i, j) = std::sin(0.37 * static_cast<double>(i) + 1.3 * static_cast<double>(j));
            b(i, j) = std::cos(0.11 * static_cast<double>(i * j % 97) - 0.5 * static_cast<double>(i));
        }
    Matrix c(n, n);
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasNoTrans, static_cast<int>(n), static_cast<int>(n),
                static_cast<int>(n), 1.0, a.data(), static_cast<int>(n), b.data(), static_cast<int>(n), 0.0, c.data(),
                static_cast<int>(n));
    const Matrix ref = a.lazyProduct(b);
    return (c - ref).norm() <= 1e-12 * ref.norm();
}

/// OpenBLAS 0.3.20 picks a faulty DGEMM kernel on CPUs it classifies as Cooperlake; LAPACK
/// inherits the fault. The core type is read once at load time, so on a failed self-test the
/// program re-executes itself with OPENBLAS_CORETYPE set. Call first thing in main().
inline void ensure_working_blas(char** argv) {
    if (blas_self_test()) return;
    if (std::getenv("OPENBLAS_CORETYPE") == nullptr) {
        setenv("OPENBLAS_CORETYPE", __builtin_cpu_supports("avx512f") ? "SkylakeX" : "Haswell", 1);
        execv("/proc/self/exe", argv);
    }
    throw NumericalError("the BLAS library computes wrong matrix products (OPENBLAS_CORETYPE=" +
                         std::string(std::getenv("OPENBLAS_CORETYPE") ? std::getenv("OPENBLAS_CORETYPE") : "") + ")");
}

/// op(a) * op(b), with op the identity or the transpose.
inline Matrix multiply(const Matrix& a, const Matrix& b, bool trans_a = false, bool trans_b = false) {
    const Index m = trans_a ? a.cols() : a.rows();
    const Index k = trans_a ? a.rows() : a.cols();
    const Index kb = trans_b ? b.cols() : b.rows();
    const Index n = trans_b ? b.rows() : b.cols();
    if (k != kb) throw InvalidArgument("multiply: inner dimensions differ");
    Matrix c(m, n);
    if (m == 0 || n == 0) return c;
    if (k == 0) return Matrix::Zero(m, n);
    cblas_dgemm(CblasColMajor, trans_a ? CblasTrans : CblasNoTrans, trans_b ? CblasTrans : CblasNoTrans,
                static_cast<int>(m), static_cast<int>(n), static_cast<int>(k), 1.0, a.data(),
                static_cast<int>(a.rows()), b.data(), static_cast<int>(b.rows()), 0.0, c.data(),
                static_cast<int>(m));
    return c;
}

/// a * a^T, exactly symmetric.
inline Matrix outer_gram(const Matrix& a) {
    const Index n = a.rows();
    Matrix c(n, n);
    if (n == 0) return c;
    if (a.cols() == 0) return Matrix::Zero(n, n);
    cblas_dsyrk(CblasColMajor, CblasLower, CblasNoTrans, static_cast<int>(n), static_cast<int>(a.cols()), 1.0,
                a.data(), static_cast<int>(n), 0.0, c.data(), static_cast<int>(n));
    c.triangularView<Eigen::StrictlyUpper>() = c.transpose();
    return c;
}

/// Eigenpairs of a symmetric matrix, eigenvalues ascending.
struct SymmetricEigen {
    Vector values;
    Matrix vectors;
};

/// Only the lower triangle of `a` is read.
inline SymmetricEigen symmetric_eigen(Matrix a, bool compute_vectors = true) {
    const Index n = a.rows();
    if (a.cols() != n) throw InvalidArgument("symmetric_eigen: matrix must be square");
    SymmetricEigen out;
    out.values.resize(n);
    if (n == 0) return out;
    if (compute_vectors) out.vectors.resize(n, n);
    std::vector<lapack_int> support(2 * static_cast<std::size_t>(n));
    lapack_int found = 0;
    const lapack_int info = LAPACKE_dsyevr(LAPACK_COL_MAJOR, compute_vectors ? 'V' : 'N', 'A', 'L',
                                           static_cast<lapack_int>(n), a.data(), static_cast<lapack_int>(n), 0.0, 0.0, 0,
                                           0, 0.0, &found, out.values.data(),
                                           compute_vectors ? out.vectors.data() : nullptr,
                                           static_cast<lapack_int>(n), support.data());
    if (info != 0 || found != n)
        throw NumericalError("symmetric eigensolver failed (dsyevr info=" + std::to_string(info) + ")");
    return out;
}

/// Upper Cholesky factor R with R^T R = a. Throws CholeskyError naming the first failing pivot.
inline Matrix cholesky_upper(const Matrix& a) {
    const Index n = a.rows();
    Matrix r = a;
    const lapack_int info = LAPACKE_dpotrf(LAPACK_COL_MAJOR, 'U', static_cast<lapack_int>(n), r.data(),
                                           static_cast<lapack_int>(n));
    if (info > 0) throw CholeskyError(static_cast<std::size_t>(info));
    if (info < 0) throw NumericalError("dpotrf: invalid argument " + std::to_string(-info));
    r.triangularView<Eigen::StrictlyLower>().setZero();
    return r;
}

/// Inverse of an upper-triangular matrix by back-substitution against the identity.
inline Matrix upper_triangular_inverse(const Matrix& r) {
    return r.triangularView<Eigen::Upper>().solve(Matrix::Identity(r.rows(), r.cols()));
}

/// Low-rank factor G ~ L L^T from diagonally pivoted Cholesky. Rows of L follow the
/// original ordering of G. Stops once the largest remaining Schur-complement diagonal
/// drops to rel_tol * max(diag(G)).
struct PivotedCholesky {
    Matrix factor;               // n x rank
    std::vector<Index> pivots;   // chosen pivots in order
    double residual_trace = 0.0; // trace of G - L L^T
};

inline PivotedCholesky pivoted_cholesky(const Matrix& g, double rel_tol) {
    const Index n = g.rows();
    PivotedCholesky out;
    if (n == 0) return out;
    Vector diag = g.diagonal();
    const double max_diag = diag.maxCoeff();
    if (!(max_diag > 0.0)) {
        out.factor.resize(n, 0);
        out.residual_trace = std::max(0.0, diag.sum());
        return out;
    }
    const double stop = rel_tol * max_diag;
    Matrix l(n, std::min<Index>(n, 64));
    std::vector<char> used(static_cast<std::size_t>(n), 0);
    Index rank = 0;
    while (rank < n) {
        Index p = -1;
        double best = stop;
        for (Index i = 0; i < n; ++i) {
            if (!used[static_cast<std::size_t>(i)] && diag(i) > best) {
                best = diag(i);
                p = i;
            }
        }
        if (p < 0) break;
        if (rank == l.cols()) l.conservativeResize(n, std::min<Index>(n, 2 * l.cols()));
        const double pivot = std::sqrt(diag(p));
        Vector col = g.col(p);
        if (rank > 0) col.noalias() -= l.leftCols(rank) * l.row(p).head(rank).transpose();
        col /= pivot;
        for (Index i = 0; i < n; ++i) {
            if (used[static_cast<std::size_t>(i)]) col(i) = 0.0;
        }
        col(p) = pivot;
        l.col(rank) = col;
        used[static_cast<std::size_t>(p)] = 1;
        out.pivots.push_back(p);
        for (Index i = 0; i < n; ++i) {
            if (!used[static_cast<std::size_t>(i)]) diag(i) -= col(i) * col(i);
        }
        diag(p) = 0.0;
        ++rank;
    }
    out.factor = l.leftCols(rank);
    double trace = 0.0;
    for (Index i = 0; i < n; ++i) {
        if (!used[static_cast<std::size_t>(i)]) trace += std::max(0.0, diag(i));
    }
    out.residual_trace = trace;
    return out;
}

/// Half-open index ranges [begin, end) of values that sit within rel_tol of their
/// neighbour, measured against the larger magnitude. `values` must be sorted.
struct Cluster {
    Index begin;
    Index end;
    [[nodiscard]] Index size() const { return end - begin; }
};

inline std::vector<Cluster> find_clusters(const std::vector<double>& values, double rel_tol) {
    std::vector<Cluster> out;
    const auto n = static_cast<Index>(values.size());
    Index start = 0;
    for (Index i = 1; i <= n; ++i) {
        const bool split =
            i == n || std::abs(values[i] - values[i - 1]) >
                          rel_tol * std::max(std::abs(values[i]), std::abs(values[i - 1]));
        if (split) {
            out.push_back({start, i});
            start = i;
        }
    }
    return out;
}

/// Gram-Schmidt on the columns of `coeffs` in the inner product <a, b> = a^T G b,
/// carried out as W <- W R^{-1} with R the Cholesky factor of W^T G W.
inline Matrix orthonormalize(const Matrix& coeffs, const Matrix& g) {
    if (coeffs.cols() == 0) return coeffs;
    Matrix c = coeffs.transpose() * (g * coeffs);
    c = 0.5 * (c + c.transpose()).eval();
    const Matrix r = cholesky_upper(c);
    return r.triangularView<Eigen::Upper>().solve<Eigen::OnTheRight>(coeffs);
}

/// max |a - a^T| <= rel_tol * max |a|
inline bool is_symmetric(const Matrix& a, double rel_tol) {
    if (a.rows() != a.cols()) return false;
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return true;
    return (a - a.transpose()).cwiseAbs().maxCoeff() <= rel_tol * scale;
}

}  // namespace rkhs::linalg
