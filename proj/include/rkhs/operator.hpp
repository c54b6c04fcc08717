#pragma once

#include <cmath>
#include <utility>

#include <Eigen/Dense>

#include "rkhs/error.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/linalg.hpp"

namespace rkhs {

/// S = Psi B Phi^T, mapping the RKHS of `in_basis` into the RKHS of `out_basis`.
/// All algebra is carried out on coefficients through (cross-)Gram matrices.
struct EmpiricalOperator {
    FeatureMatrix out_basis;  // Psi, n elements
    FeatureMatrix in_basis;   // Phi, m elements
    Matrix b;                 // n x m

    EmpiricalOperator() = default;
    EmpiricalOperator(FeatureMatrix out, Matrix coeffs, FeatureMatrix in)
        : out_basis(std::move(out)), in_basis(std::move(in)), b(std::move(coeffs)) {
        if (b.rows() != out_basis.size() || b.cols() != in_basis.size())
            throw InvalidArgument("empirical operator: B must be " + std::to_string(out_basis.size()) + " x " +
                                  std::to_string(in_basis.size()));
    }

    bool operator==(const EmpiricalOperator& other) const {
        return out_basis == other.out_basis && in_basis == other.in_basis && b.rows() == other.b.rows() &&
               b.cols() == other.b.cols() && b == other.b;
    }
};

/// S v, with coefficients B * cross_gram(Phi, basis_v) * c_v over Psi.
template <typename Scalar>
BasicRkhsFunction<Scalar> apply(const EmpiricalOperator& s, const BasicRkhsFunction<Scalar>& v) {
    const Matrix k = cross_gram(s.in_basis, v.basis);
    typename BasicRkhsFunction<Scalar>::CoeffVector inner = k.template cast<Scalar>() * v.coefficients;
    return {s.out_basis, s.b.template cast<Scalar>() * inner};
}

/// S* = Phi B^T Psi^T
inline EmpiricalOperator adjoint(const EmpiricalOperator& s) { return {s.in_basis, s.b.transpose(), s.out_basis}; }

/// S2 S1. The bases in between may differ; they are bridged by a cross-Gram.
inline EmpiricalOperator compose(const EmpiricalOperator& s2, const EmpiricalOperator& s1) {
    if (!(s2.in_basis.kernel == s1.out_basis.kernel)) throw InvalidArgument("compose: kernel mismatch");
    const Matrix bridge = cross_gram(s2.in_basis, s1.out_basis);
    return {s2.out_basis, s2.b * bridge * s1.b, s1.in_basis};
}

/// M = B^T G_Psi B, the middle matrix of S* S.
inline Matrix composition_gram(const EmpiricalOperator& s) {
    Matrix m;
    {
        const Matrix gb = linalg::multiply(gram(s.out_basis), s.b);
        m = linalg::multiply(s.b, gb, true, false);
    }
    for (Index j = 0; j < m.cols(); ++j) {
        for (Index i = 0; i < j; ++i) {
            const double avg = 0.5 * (m(i, j) + m(j, i));
            m(i, j) = avg;
            m(j, i) = avg;
        }
    }
    return m;
}

/// Scalar multiple a S.
inline EmpiricalOperator scaled(const EmpiricalOperator& s, double a) { return {s.out_basis, a * s.b, s.in_basis}; }

/// S1 - S2. Shared bases subtract coefficients directly; otherwise the bases are
/// concatenated and the coefficient matrices placed block-diagonally.
inline EmpiricalOperator difference(const EmpiricalOperator& s1, const EmpiricalOperator& s2) {
    if (s1.out_basis == s2.out_basis && s1.in_basis == s2.in_basis) return {s1.out_basis, s1.b - s2.b, s1.in_basis};
    const bool same_out = s1.out_basis == s2.out_basis;
    const bool same_in = s1.in_basis == s2.in_basis;
    FeatureMatrix out = same_out ? s1.out_basis : concat(s1.out_basis, s2.out_basis);
    FeatureMatrix in = same_in ? s1.in_basis : concat(s1.in_basis, s2.in_basis);
    Matrix b = Matrix::Zero(out.size(), in.size());
    const Index r2 = same_out ? 0 : s1.b.rows();
    const Index c2 = same_in ? 0 : s1.b.cols();
    b.topLeftCorner(s1.b.rows(), s1.b.cols()) = s1.b;
    b.block(r2, c2, s2.b.rows(), s2.b.cols()) -= s2.b;
    return {std::move(out), std::move(b), std::move(in)};
}

/// <S1, S2>_HS = trace(B1^T G_{Psi1 Psi2} B2 G_{Phi1 Phi2}^T).
inline double hs_inner(const EmpiricalOperator& s1, const EmpiricalOperator& s2) {
    if (!(s1.out_basis.kernel == s2.out_basis.kernel) || !(s1.in_basis.kernel == s2.in_basis.kernel))
        throw InvalidArgument("hs_inner: kernel mismatch");
    const Matrix g_out = cross_gram(s1.out_basis, s2.out_basis);
    const Matrix g_in = cross_gram(s1.in_basis, s2.in_basis);
    const Matrix left = s1.b.transpose() * g_out * s2.b;  // m1 x m2
    return left.cwiseProduct(g_in).sum();
}

inline double hs_norm(const EmpiricalOperator& s) { return std::sqrt(std::max(0.0, hs_inner(s, s))); }

/// sum_i sigma_i(B) |Psi w_i| |Phi z_i| from the matrix SVD B = W Sigma Z^T; an upper bound on |S|.
inline double norm_bound(const EmpiricalOperator& s) {
    if (s.b.size() == 0) return 0.0;
    Eigen::JacobiSVD<Matrix> svd(s.b, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Matrix g_out = gram(s.out_basis);
    const Matrix g_in = gram(s.in_basis);
    double bound = 0.0;
    const Vector& sv = svd.singularValues();
    for (Index i = 0; i < sv.size(); ++i) {
        if (sv(i) == 0.0) continue;
        const Vector w = svd.matrixU().col(i);
        const Vector z = svd.matrixV().col(i);
        const double nw = std::sqrt(std::max(0.0, w.dot(g_out * w)));
        const double nz = std::sqrt(std::max(0.0, z.dot(g_in * z)));
        bound += sv(i) * nw * nz;
    }
    return bound;
}

}  // namespace rkhs
