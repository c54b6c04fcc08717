#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "rkhs/error.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/linalg.hpp"
#include "rkhs/operator.hpp"

namespace rkhs {

/// Relative cut-off for retained singular values / eigenvalues.
inline constexpr double kDefaultThreshold = 1e-10;
/// Values closer than this (relative) are treated as one degenerate cluster.
inline constexpr double kClusterTolerance = 1e-6;
/// Relative pivot floor for the low-rank factor of G_Phi in the auxiliary SVD.
inline constexpr double kFactorTolerance = 1e-13;

// ---------------------------------------------------------------------------
// Result types

/// Phi = Phi_tilde R with Phi_tilde^T Phi_tilde = I, i.e. G_Phi = R^T R.
struct KernelQr {
    FeatureMatrix basis;
    Matrix r;      // upper triangular, positive diagonal
    Matrix r_inv;  // upper triangular
};

struct SingularTriplet {
    double sigma = 0.0;
    RkhsFunction u;  // left singular function, over the output basis
    RkhsFunction v;  // right singular function, over the input basis
};

struct SvdResult {
    FeatureMatrix out_basis;
    FeatureMatrix in_basis;
    std::vector<SingularTriplet> triplets;  // sigma non-increasing
    double threshold = kDefaultThreshold;

    [[nodiscard]] std::size_t size() const noexcept { return triplets.size(); }
    [[nodiscard]] bool empty() const noexcept { return triplets.empty(); }

    [[nodiscard]] Vector singular_values() const {
        Vector s(static_cast<Index>(triplets.size()));
        for (std::size_t i = 0; i < triplets.size(); ++i) s(static_cast<Index>(i)) = triplets[i].sigma;
        return s;
    }
    /// Coefficients of u_i as columns.
    [[nodiscard]] Matrix left_coefficients() const {
        Matrix a(out_basis.size(), static_cast<Index>(triplets.size()));
        for (std::size_t i = 0; i < triplets.size(); ++i) a.col(static_cast<Index>(i)) = triplets[i].u.coefficients;
        return a;
    }
    /// Coefficients of v_i as columns.
    [[nodiscard]] Matrix right_coefficients() const {
        Matrix b(in_basis.size(), static_cast<Index>(triplets.size()));
        for (std::size_t i = 0; i < triplets.size(); ++i) b.col(static_cast<Index>(i)) = triplets[i].v.coefficients;
        return b;
    }
};

struct EigenPair {
    std::complex<double> lambda;
    ComplexRkhsFunction f;  // unit RKHS norm
};

struct EigResult {
    FeatureMatrix basis;
    std::vector<EigenPair> pairs;  // |lambda| non-increasing, conjugates adjacent
    bool symmetric = false;        // real symmetric path taken; imaginary parts are exactly zero
    double threshold = kDefaultThreshold;

    [[nodiscard]] std::size_t size() const noexcept { return pairs.size(); }
    [[nodiscard]] bool empty() const noexcept { return pairs.empty(); }

    [[nodiscard]] ComplexVector eigenvalues() const {
        ComplexVector l(static_cast<Index>(pairs.size()));
        for (std::size_t i = 0; i < pairs.size(); ++i) l(static_cast<Index>(i)) = pairs[i].lambda;
        return l;
    }
    [[nodiscard]] Vector real_eigenvalues() const { return eigenvalues().real(); }
};

// ---------------------------------------------------------------------------
// Kernel QR

inline KernelQr kernel_qr(const FeatureMatrix& phi) {
    KernelQr qr;
    qr.basis = phi;
    qr.r = linalg::cholesky_upper(gram(phi));
    qr.r_inv = linalg::upper_triangular_inverse(qr.r);
    return qr;
}

/// B_tilde = R_Psi B R_Phi^T, the coefficient matrix of S in the orthonormalized bases
/// Psi_tilde = Psi R_Psi^{-1} and Phi_tilde = Phi R_Phi^{-1}.
inline Matrix orthonormalized_b(const EmpiricalOperator& s, const KernelQr& out_qr, const KernelQr& in_qr) {
    return out_qr.r.triangularView<Eigen::Upper>() * s.b * in_qr.r.triangularView<Eigen::Upper>().transpose();
}

inline Matrix orthonormalized_b(const EmpiricalOperator& s) {
    const KernelQr out_qr = kernel_qr(s.out_basis);
    if (s.in_basis == s.out_basis) return orthonormalized_b(s, out_qr, out_qr);
    return orthonormalized_b(s, out_qr, kernel_qr(s.in_basis));
}

namespace detail {

inline void require_threshold(double threshold) {
    if (!(threshold >= 0.0) || !std::isfinite(threshold)) throw InvalidArgument("threshold must be >= 0");
}

/// Indices of `values` sorted by non-increasing magnitude; ties keep conjugate pairs
/// together with the positive imaginary part first.
inline std::vector<Index> order_by_magnitude(const ComplexVector& values) {
    std::vector<Index> idx(static_cast<std::size_t>(values.size()));
    std::iota(idx.begin(), idx.end(), Index{0});
    std::stable_sort(idx.begin(), idx.end(), [&](Index a, Index b) {
        const double ma = std::abs(values(a));
        const double mb = std::abs(values(b));
        if (ma != mb) return ma > mb;
        if (values(a).real() != values(b).real()) return values(a).real() > values(b).real();
        return values(a).imag() > values(b).imag();
    });
    return idx;
}

/// Rotates a complex vector so that its largest-magnitude entry is real and positive.
inline ComplexVector fix_phase(const ComplexVector& w) {
    Index k = 0;
    w.cwiseAbs().maxCoeff(&k);
    if (std::abs(w(k)) == 0.0) return w;
    return w * (std::abs(w(k)) / w(k));
}

/// Eigenpairs of an auxiliary matrix; eigenfunctions have coefficients lift * w (lift = I when null).
/// Symmetric matrices use the symmetric solver and yield exactly real output.
inline EigResult aux_eigenpairs(const Matrix& aux, const FeatureMatrix& basis, const Matrix* lift, double threshold) {
    require_threshold(threshold);
    EigResult out;
    out.basis = basis;
    out.threshold = threshold;
    const Index m = aux.rows();
    if (m == 0) return out;

    if (linalg::is_symmetric(aux, 1e-13)) {
        out.symmetric = true;
        Matrix sym = 0.5 * (aux + aux.transpose());
        const auto eig = linalg::symmetric_eigen(std::move(sym));
        const auto order = order_by_magnitude(eig.values.cast<std::complex<double>>());
        const double max_abs = std::abs(eig.values(order.front()));
        if (max_abs == 0.0) return out;
        const Matrix g = gram(basis);
        for (Index idx : order) {
            const double lambda = eig.values(idx);
            if (std::abs(lambda) <= threshold * max_abs) break;
            Vector w = lift ? Vector(*lift * eig.vectors.col(idx)) : Vector(eig.vectors.col(idx));
            const double norm2 = w.dot(g * w);
            if (!(norm2 > 0.0)) throw NumericalError("auxiliary eigenvector maps to the zero function");
            w /= std::sqrt(norm2);
            out.pairs.push_back({std::complex<double>(lambda, 0.0), ComplexRkhsFunction(basis, w.cast<std::complex<double>>())});
        }
        return out;
    }

    Eigen::EigenSolver<Matrix> es(aux, true);
    if (es.info() != Eigen::Success) throw NumericalError("general eigensolver failed on the auxiliary matrix");
    const ComplexVector values = es.eigenvalues();
    const Eigen::MatrixXcd vectors = es.eigenvectors();
    const auto order = order_by_magnitude(values);
    const double max_abs = std::abs(values(order.front()));
    if (max_abs == 0.0) return out;
    const Matrix g = gram(basis);
    for (Index idx : order) {
        const std::complex<double> lambda = values(idx);
        if (std::abs(lambda) <= threshold * max_abs) break;
        ComplexVector w = vectors.col(idx);
        if (lift) {
            const Vector re = *lift * w.real();
            const Vector im = *lift * w.imag();
            w.resize(re.size());
            w.real() = re;
            w.imag() = im;
        }
        w = fix_phase(w);
        const double norm2 = w.real().dot(g * w.real()) + w.imag().dot(g * w.imag());
        if (!(norm2 > 0.0)) throw NumericalError("auxiliary eigenvector maps to the zero function");
        w /= std::sqrt(norm2);
        out.pairs.push_back({lambda, ComplexRkhsFunction(basis, std::move(w))});
    }
    return out;
}

/// Re-orthonormalizes singular functions inside degenerate clusters; left functions are
/// recomputed from the right ones as u = S v / sigma before their own pass.
/// `g_out` may be empty, in which case it is built on first use.
inline void orthonormalize_clusters(const EmpiricalOperator& s, SvdResult& res, const Matrix& g_in, Matrix g_out) {
    std::vector<double> sigmas;
    for (const auto& t : res.triplets) sigmas.push_back(t.sigma);
    for (const auto& c : linalg::find_clusters(sigmas, kClusterTolerance)) {
        if (c.size() < 2) continue;
        if (g_out.size() == 0) g_out = gram(s.out_basis);
        Matrix v(s.in_basis.size(), c.size());
        for (Index i = 0; i < c.size(); ++i) v.col(i) = res.triplets[static_cast<std::size_t>(c.begin + i)].v.coefficients;
        v = linalg::orthonormalize(v, g_in);
        Matrix u = s.b * (g_in * v);
        for (Index i = 0; i < c.size(); ++i) u.col(i) /= res.triplets[static_cast<std::size_t>(c.begin + i)].sigma;
        u = linalg::orthonormalize(u, g_out);
        for (Index i = 0; i < c.size(); ++i) {
            auto& t = res.triplets[static_cast<std::size_t>(c.begin + i)];
            t.v.coefficients = v.col(i);
            t.u.coefficients = u.col(i);
        }
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Decompositions via the orthonormalized representation

/// SVD of S from the matrix SVD of B_tilde; singular functions carry coefficients R^{-1} u, R^{-1} v.
inline SvdResult svd_via_qr(const EmpiricalOperator& s, double threshold = kDefaultThreshold) {
    detail::require_threshold(threshold);
    const KernelQr out_qr = kernel_qr(s.out_basis);
    const KernelQr in_qr = s.in_basis == s.out_basis ? out_qr : kernel_qr(s.in_basis);
    const Matrix bt = orthonormalized_b(s, out_qr, in_qr);
    SvdResult res;
    res.out_basis = s.out_basis;
    res.in_basis = s.in_basis;
    res.threshold = threshold;
    if (bt.size() == 0) return res;
    Eigen::BDCSVD<Matrix> svd(bt, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    if (sv.size() == 0 || sv(0) == 0.0) return res;
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) <= threshold * sv(0)) break;
        SingularTriplet t;
        t.sigma = sv(i);
        t.u = RkhsFunction(s.out_basis, out_qr.r_inv.triangularView<Eigen::Upper>() * svd.matrixU().col(i));
        t.v = RkhsFunction(s.in_basis, in_qr.r_inv.triangularView<Eigen::Upper>() * svd.matrixV().col(i));
        res.triplets.push_back(std::move(t));
    }
    return res;
}

/// Eigendecomposition of a self-adjoint S = Phi B Phi^T from the symmetric matrix B_tilde.
inline EigResult eig_via_qr(const EmpiricalOperator& s, double threshold = kDefaultThreshold) {
    detail::require_threshold(threshold);
    if (!(s.out_basis == s.in_basis))
        throw InvalidArgument("eig_via_qr: input and output bases must coincide");
    const KernelQr qr = kernel_qr(s.in_basis);
    const Matrix bt = orthonormalized_b(s, qr, qr);
    if (!linalg::is_symmetric(bt, 1e-8))
        throw InvalidArgument("eig_via_qr: orthonormalized representation is not symmetric; use eig_via_aux");
    EigResult out;
    out.basis = s.in_basis;
    out.symmetric = true;
    out.threshold = threshold;
    if (bt.size() == 0) return out;
    const auto eig = linalg::symmetric_eigen(0.5 * (bt + bt.transpose()));
    const ComplexVector values = eig.values.cast<std::complex<double>>();
    const auto order = detail::order_by_magnitude(values);
    const double max_abs = std::abs(values(order.front()));
    if (max_abs == 0.0) return out;
    for (Index idx : order) {
        const double lambda = eig.values(idx);
        if (std::abs(lambda) <= threshold * max_abs) break;
        const Vector c = qr.r_inv.triangularView<Eigen::Upper>() * eig.vectors.col(idx);
        out.pairs.push_back({{lambda, 0.0}, ComplexRkhsFunction(s.in_basis, c.cast<std::complex<double>>())});
    }
    return out;
}

// ---------------------------------------------------------------------------
// Decompositions via auxiliary problems

/// Eigenpairs of S = Upsilon B Phi^T from B Phi^T Upsilon w = lambda w; eigenfunctions Upsilon w.
inline EigResult eig_via_aux(const EmpiricalOperator& s, double threshold = kDefaultThreshold) {
    if (!(s.out_basis.kernel == s.in_basis.kernel)) throw InvalidArgument("eig_via_aux: kernel mismatch");
    if (s.out_basis.size() != s.in_basis.size())
        throw InvalidArgument("eig_via_aux: input and output bases must have equal length");
    const Matrix aux = linalg::multiply(s.b, cross_gram(s.in_basis, s.out_basis));
    return detail::aux_eigenpairs(aux, s.out_basis, nullptr, threshold);
}

/// Alternative auxiliary problem Phi^T Upsilon B w = lambda w; eigenfunctions Upsilon B w.
inline EigResult eig_via_aux_alt(const EmpiricalOperator& s, double threshold = kDefaultThreshold) {
    if (!(s.out_basis.kernel == s.in_basis.kernel)) throw InvalidArgument("eig_via_aux_alt: kernel mismatch");
    if (s.out_basis.size() != s.in_basis.size())
        throw InvalidArgument("eig_via_aux_alt: input and output bases must have equal length");
    const Matrix aux = linalg::multiply(cross_gram(s.in_basis, s.out_basis), s.b);
    return detail::aux_eigenpairs(aux, s.out_basis, &s.b, threshold);
}

/// SVD of S from the eigenproblem M G_Phi w = lambda w, M = B^T G_Psi B. With pivoted Cholesky
/// factors G_Phi ~ L L^T and G_Psi ~ F F^T the symmetric form L^T M L q = lambda q becomes
/// C^T C q = lambda q with C = F^T B L, which is positive semi-definite as computed.
/// w = M L q / lambda = B^T F C q / lambda. `threshold` is applied to lambda relative to the largest lambda.
inline SvdResult svd_via_aux(const EmpiricalOperator& s, double threshold = kDefaultThreshold) {
    detail::require_threshold(threshold);
    SvdResult res;
    res.out_basis = s.out_basis;
    res.in_basis = s.in_basis;
    res.threshold = threshold;

    Matrix g_in = gram(s.in_basis);
    const Matrix l = linalg::pivoted_cholesky(g_in, kFactorTolerance).factor;
    const bool shared = s.out_basis == s.in_basis;
    const Matrix f = shared ? Matrix() : linalg::pivoted_cholesky(gram(s.out_basis), kFactorTolerance).factor;
    const Matrix& fo = shared ? l : f;
    if (l.cols() == 0 || fo.cols() == 0) return res;
    Matrix c;
    {
        const Matrix bl = linalg::multiply(s.b, l);
        c = linalg::multiply(fo, bl, true, false);
    }
    const auto eig = linalg::symmetric_eigen(linalg::outer_gram(c.transpose()));

    const Index r = eig.values.size();
    const double lambda_max = eig.values(r - 1);
    if (!(lambda_max > 0.0)) return res;
    if (eig.values(0) < -1e-10 * lambda_max)
        throw NumericalError("auxiliary SVD problem has a negative eigenvalue " + detail::format_double(eig.values(0)) +
                             "; S*S is not positive semi-definite");
    std::vector<Index> kept;
    for (Index i = r - 1; i >= 0; --i) {
        const double lambda = std::max(0.0, eig.values(i));
        if (lambda <= threshold * lambda_max) break;
        kept.push_back(i);
    }
    if (kept.empty()) return res;
    const auto count = static_cast<Index>(kept.size());
    Matrix q(r, count);
    Vector lambdas(count);
    for (Index j = 0; j < count; ++j) {
        q.col(j) = eig.vectors.col(kept[static_cast<std::size_t>(j)]);
        lambdas(j) = eig.values(kept[static_cast<std::size_t>(j)]);
    }
    Matrix w = linalg::multiply(s.b, linalg::multiply(fo, linalg::multiply(c, q)), true, false);  // M L q
    for (Index j = 0; j < count; ++j) w.col(j) /= lambdas(j);
    const Matrix gw = linalg::multiply(g_in, w);
    const Matrix u = linalg::multiply(s.b, gw);  // S (Phi w) = Psi B G_Phi w
    for (Index j = 0; j < count; ++j) {
        const double norm = std::sqrt(std::max(0.0, w.col(j).dot(gw.col(j))));
        if (!(norm > 0.0)) throw NumericalError("auxiliary SVD produced a zero right singular function");
        const double sigma = std::sqrt(lambdas(j));
        SingularTriplet t;
        t.sigma = sigma;
        t.v = RkhsFunction(s.in_basis, w.col(j) / norm);
        t.u = RkhsFunction(s.out_basis, u.col(j) / (norm * sigma));
        res.triplets.push_back(std::move(t));
    }
    detail::orthonormalize_clusters(s, res, g_in, Matrix{});
    return res;
}

/// SVD of S from the eigenpairs of the block auxiliary matrix [[0, B G_Phi], [B^T G_Psi, 0]].
/// Positive eigenvalues are the singular values; the negative half must mirror them.
inline SvdResult svd_via_block(const EmpiricalOperator& s, double threshold = kDefaultThreshold) {
    detail::require_threshold(threshold);
    SvdResult res;
    res.out_basis = s.out_basis;
    res.in_basis = s.in_basis;
    res.threshold = threshold;
    const Index n = s.out_basis.size();
    const Index m = s.in_basis.size();
    const Matrix g_out = gram(s.out_basis);
    const Matrix g_in = gram(s.in_basis);
    Matrix t = Matrix::Zero(n + m, n + m);
    t.topRightCorner(n, m) = s.b * g_in;
    t.bottomLeftCorner(m, n) = s.b.transpose() * g_out;

    Eigen::EigenSolver<Matrix> es(t, true);
    if (es.info() != Eigen::Success) throw NumericalError("general eigensolver failed on the block matrix");
    const ComplexVector values = es.eigenvalues();
    const double max_abs = values.cwiseAbs().maxCoeff();
    if (max_abs == 0.0) return res;

    std::vector<Index> positive;
    std::vector<double> negative;
    for (Index i = 0; i < values.size(); ++i) {
        if (std::abs(values(i)) <= threshold * max_abs) continue;
        if (std::abs(values(i).imag()) > 1e-8 * max_abs)
            throw NumericalError("block matrix has a non-real eigenvalue; pairing check failed");
        if (values(i).real() > 0.0)
            positive.push_back(i);
        else
            negative.push_back(-values(i).real());
    }
    std::stable_sort(positive.begin(), positive.end(),
                     [&](Index a, Index b) { return values(a).real() > values(b).real(); });
    std::sort(negative.begin(), negative.end(), std::greater<>());
    if (positive.size() != negative.size())
        throw NumericalError("block matrix spectrum is not symmetric: " + std::to_string(positive.size()) +
                             " positive vs " + std::to_string(negative.size()) + " negative eigenvalues");
    for (std::size_t i = 0; i < positive.size(); ++i) {
        if (std::abs(values(positive[i]).real() - negative[i]) > 1e-8 * max_abs)
            throw NumericalError("block matrix spectrum is not symmetric at index " + std::to_string(i));
    }

    const Eigen::MatrixXcd vectors = es.eigenvectors();
    for (Index idx : positive) {
        const ComplexVector vec = detail::fix_phase(vectors.col(idx));
        const Vector w = vec.head(n).real();
        const Vector z = vec.tail(m).real();
        const double nw = std::sqrt(std::max(0.0, w.dot(g_out * w)));
        const double nz = std::sqrt(std::max(0.0, z.dot(g_in * z)));
        if (!(nw > 0.0) || !(nz > 0.0)) throw NumericalError("block eigenvector has a vanishing component");
        SingularTriplet trip;
        trip.sigma = values(idx).real();
        trip.u = RkhsFunction(s.out_basis, w / nw);
        trip.v = RkhsFunction(s.in_basis, z / nz);
        res.triplets.push_back(std::move(trip));
    }
    detail::orthonormalize_clusters(s, res, g_in, g_out);
    return res;
}

// ---------------------------------------------------------------------------
// Uses of the SVD

namespace detail {

inline void require_svd_of(const SvdResult& svd, const EmpiricalOperator& s) {
    if (!(svd.out_basis == s.out_basis) || !(svd.in_basis == s.in_basis))
        throw InvalidArgument("SVD does not belong to this operator (bases differ)");
}

inline std::size_t retained_count(const SvdResult& svd, double threshold) {
    require_threshold(threshold);
    if (svd.empty()) throw NumericalError("empty SVD");
    const double top = svd.triplets.front().sigma;
    std::size_t k = 0;
    while (k < svd.size() && svd.triplets[k].sigma > threshold * top) ++k;
    if (k == 0) throw NumericalError("no singular value above the threshold");
    return k;
}

}  // namespace detail

/// Best rank-k approximation sum_{i<=k} sigma_i u_i (x) v_i, over the bases of S.
inline EmpiricalOperator truncate(const EmpiricalOperator& s, const SvdResult& svd, Index k) {
    detail::require_svd_of(svd, s);
    if (k < 0 || k > static_cast<Index>(svd.size()))
        throw InvalidArgument("truncate: rank " + std::to_string(k) + " out of range [0, " +
                              std::to_string(svd.size()) + "]");
    Matrix bk = Matrix::Zero(s.b.rows(), s.b.cols());
    for (Index i = 0; i < k; ++i) {
        const auto& t = svd.triplets[static_cast<std::size_t>(i)];
        bk.noalias() += t.sigma * t.u.coefficients * t.v.coefficients.transpose();
    }
    return {s.out_basis, std::move(bk), s.in_basis};
}

/// Moore-Penrose pseudoinverse sum_i sigma_i^{-1} v_i (x) u_i, mapping the output RKHS back to the input RKHS.
inline EmpiricalOperator pseudoinverse(const SvdResult& svd, double threshold = kDefaultThreshold) {
    const std::size_t k = detail::retained_count(svd, threshold);
    Matrix bp = Matrix::Zero(svd.in_basis.size(), svd.out_basis.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto& t = svd.triplets[i];
        bp.noalias() += (1.0 / t.sigma) * t.v.coefficients * t.u.coefficients.transpose();
    }
    return {svd.in_basis, std::move(bp), svd.out_basis};
}

/// Minimum-norm least-squares solution A^+ y = sum_i sigma_i^{-1} <u_i, y> v_i.
inline RkhsFunction lstsq_apply(const SvdResult& svd, const RkhsFunction& y, double threshold = kDefaultThreshold) {
    if (!(y.basis.kernel == svd.out_basis.kernel)) throw InvalidArgument("lstsq_apply: kernel mismatch");
    const std::size_t k = detail::retained_count(svd, threshold);
    Vector c = Vector::Zero(svd.in_basis.size());
    for (std::size_t i = 0; i < k; ++i) {
        const auto& t = svd.triplets[i];
        c.noalias() += (inner_product(t.u, y) / t.sigma) * t.v.coefficients;
    }
    return {svd.in_basis, std::move(c)};
}

}  // namespace rkhs
