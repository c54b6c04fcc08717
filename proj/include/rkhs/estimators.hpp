#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include <Eigen/Dense>

#include "rkhs/error.hpp"
#include "rkhs/kernel.hpp"
#include "rkhs/linalg.hpp"
#include "rkhs/operator.hpp"

namespace rkhs {

inline constexpr double kDefaultEpsilon = 1e-6;
inline constexpr double kDefaultCcaEpsilon = 5.0;

/// Tikhonov shift, relative to the mean diagonal of the Gram matrix it is applied to.
struct Regularizer {
    double epsilon = kDefaultEpsilon;

    Regularizer() = default;
    explicit Regularizer(double eps) : epsilon(eps) {
        if (!(eps >= 0.0) || !std::isfinite(eps)) throw InvalidArgument("regularization epsilon must be finite and >= 0");
    }

    /// Absolute shift for a matrix with the given diagonal.
    [[nodiscard]] double scaled(const Matrix& g) const {
        if (epsilon == 0.0 || g.rows() == 0) return 0.0;
        return epsilon * g.diagonal().mean();
    }
};

/// (G + eps_s I)^{-1}
inline Matrix reg_inverse(const Matrix& g, const Regularizer& reg) {
    if (g.rows() != g.cols()) throw InvalidArgument("reg_inverse: matrix must be square");
    Matrix shifted = g;
    shifted.diagonal().array() += reg.scaled(g);
    Matrix r;
    try {
        r = linalg::cholesky_upper(shifted);
    } catch (const CholeskyError& e) {
        throw NumericalError(std::string("reg_inverse: matrix is singular without regularization (") + e.what() + ")");
    }
    const Matrix r_inv = linalg::upper_triangular_inverse(r);
    Matrix inv = r_inv * r_inv.transpose();
    return 0.5 * (inv + inv.transpose());
}

/// U (max(L, 0) + eps_s I)^{-1/2} U^T from G = U L U^T.
inline Matrix reg_inv_sqrt(const Matrix& g, const Regularizer& reg) {
    if (g.rows() != g.cols()) throw InvalidArgument("reg_inv_sqrt: matrix must be square");
    const Index n = g.rows();
    if (n == 0) return g;
    const double shift = reg.scaled(g);
    auto eig = linalg::symmetric_eigen(g);
    Vector d = eig.values.cwiseMax(0.0);
    if (shift == 0.0) {
        const double top = d.maxCoeff();
        if (!(d.minCoeff() > static_cast<double>(n) * std::numeric_limits<double>::epsilon() * top))
            throw NumericalError("reg_inv_sqrt: matrix is singular without regularization");
    }
    // U D U^T = (U D^{1/2}) (U D^{1/2})^T with D = (L + eps_s)^{-1/2} > 0
    d = (d.array() + shift).pow(-0.25).matrix();
    for (Index j = 0; j < n; ++j) eig.vectors.col(j) *= d(j);
    return linalg::outer_gram(eig.vectors);
}

namespace detail {

inline void require_paired(const DataSet& x, const DataSet& y, const char* what) {
    if (x.size() != y.size())
        throw InvalidArgument(std::string(what) + ": unpaired samples (" + std::to_string(x.size()) + " vs " +
                              std::to_string(y.size()) + " rows)");
}

}  // namespace detail

/// (1/n) Phi Phi^T
inline EmpiricalOperator covariance(const DataSet& x, const Kernel& k) {
    FeatureMatrix phi{x, k};
    const Index n = x.size();
    return {phi, Matrix::Identity(n, n) / static_cast<double>(n), phi};
}

/// (1/n) Psi Phi^T
inline EmpiricalOperator cross_covariance(const DataSet& x, const DataSet& y, const Kernel& k, const Kernel& l) {
    detail::require_paired(x, y, "cross_covariance");
    const Index n = x.size();
    return {FeatureMatrix{y, l}, Matrix::Identity(n, n) / static_cast<double>(n), FeatureMatrix{x, k}};
}

/// Psi (G_Phi + eps I)^{-1} Phi^T
inline EmpiricalOperator cme(const DataSet& x, const DataSet& y, const Kernel& k, const Kernel& l,
                             const Regularizer& reg = Regularizer{}) {
    detail::require_paired(x, y, "cme");
    FeatureMatrix phi{x, k};
    return {FeatureMatrix{y, l}, reg_inverse(gram(phi), reg), phi};
}

/// Phi (G_Phi + eps I)^{-1} Psi^T, with Psi the time-lagged images of X.
inline EmpiricalOperator koopman(const DataSet& x, const DataSet& y, const Kernel& k,
                                 const Regularizer& reg = Regularizer{}) {
    detail::require_paired(x, y, "koopman");
    FeatureMatrix phi{x, k};
    return {phi, reg_inverse(gram(phi), reg), FeatureMatrix{y, k}};
}

/// Psi (G_PhiPsi + eps I)^{-1} (G_Phi + eps I)^{-1} G_PhiPsi Phi^T. Both shifts use the scale of G_Phi.
inline EmpiricalOperator perron_frobenius(const DataSet& x, const DataSet& y, const Kernel& k,
                                          const Regularizer& reg = Regularizer{}) {
    detail::require_paired(x, y, "perron_frobenius");
    FeatureMatrix phi{x, k};
    FeatureMatrix psi{y, k};
    const Matrix g = gram(phi);
    const double shift = reg.scaled(g);
    const Matrix lagged = cross_gram(phi, psi);
    const Matrix inner = reg_inverse(g, reg) * lagged;
    Matrix shifted = lagged;
    shifted.diagonal().array() += shift;
    Eigen::PartialPivLU<Matrix> lu(shifted);
    if (!(lu.rcond() > static_cast<double>(x.size()) * std::numeric_limits<double>::epsilon()))
        throw NumericalError("perron_frobenius: time-lagged Gram matrix is singular without regularization");
    return {psi, lu.solve(inner), phi};
}

/// Psi (G_Psi + eps I)^{-1/2} (G_Phi + eps I)^{-1/2} Phi^T
inline EmpiricalOperator cca_operator(const DataSet& x, const DataSet& y, const Kernel& k, const Kernel& l,
                                      const Regularizer& reg = Regularizer{kDefaultCcaEpsilon}) {
    detail::require_paired(x, y, "cca_operator");
    FeatureMatrix phi{x, k};
    FeatureMatrix psi{y, l};
    Matrix right = reg_inv_sqrt(gram(phi), reg);
    Matrix left = reg_inv_sqrt(gram(psi), reg);
    Matrix b = linalg::multiply(left, right);
    left.resize(0, 0);
    right.resize(0, 0);
    return {std::move(psi), std::move(b), std::move(phi)};
}

}  // namespace rkhs
