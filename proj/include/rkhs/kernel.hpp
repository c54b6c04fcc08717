#pragma once

#include <cmath>
#include <complex>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <string>
#include <string_view>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "rkhs/error.hpp"

namespace rkhs {

using Index = Eigen::Index;
using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexVector = Eigen::VectorXcd;
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

namespace detail {

inline std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline double parse_double(std::string_view text, std::string_view what) {
    const std::string s(text);
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (s.empty() || end != s.c_str() + s.size() || !std::isfinite(v))
        throw InvalidArgument("invalid number for " + std::string(what) + ": '" + s + "'");
    return v;
}

inline long parse_long(std::string_view text, std::string_view what) {
    const std::string s(text);
    char* end = nullptr;
    const long v = std::strtol(s.c_str(), &end, 10);
    if (s.empty() || end != s.c_str() + s.size())
        throw InvalidArgument("invalid integer for " + std::string(what) + ": '" + s + "'");
    return v;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Kernels

/// exp(-|x - x'|^2 / (2 bw^2)), optionally scaled by (2 pi bw^2)^{-d/2}.
struct GaussianKernel {
    double bandwidth = 1.0;
    bool normalized = false;

    double operator()(const double* x, const double* y, Index d) const noexcept {
        double r2 = 0.0;
        for (Index k = 0; k < d; ++k) {
            const double diff = x[k] - y[k];
            r2 += diff * diff;
        }
        const double value = std::exp(-r2 / (2.0 * bandwidth * bandwidth));
        return normalized ? prefactor(d) * value : value;
    }

    [[nodiscard]] double prefactor(Index d) const noexcept {
        return std::pow(2.0 * std::numbers::pi * bandwidth * bandwidth, -0.5 * static_cast<double>(d));
    }

    bool operator==(const GaussianKernel&) const = default;
};

/// (c + <x, x'>)^p
struct PolynomialKernel {
    int degree = 2;
    double offset = 1.0;

    double operator()(const double* x, const double* y, Index d) const noexcept {
        double dot = 0.0;
        for (Index k = 0; k < d; ++k) dot += x[k] * y[k];
        const double base = offset + dot;
        double value = 1.0;
        for (int p = 0; p < degree; ++p) value *= base;
        return value;
    }

    bool operator==(const PolynomialKernel&) const = default;
};

struct LinearKernel {
    double operator()(const double* x, const double* y, Index d) const noexcept {
        double dot = 0.0;
        for (Index k = 0; k < d; ++k) dot += x[k] * y[k];
        return dot;
    }

    bool operator==(const LinearKernel&) const = default;
};

/// A symmetric positive-definite kernel. Value type; compares by variant and parameters.
class Kernel {
public:
    using Variant = std::variant<GaussianKernel, PolynomialKernel, LinearKernel>;

    Kernel() : impl_(LinearKernel{}) {}

    static Kernel gaussian(double bandwidth, bool normalized = false) {
        if (!(bandwidth > 0.0) || !std::isfinite(bandwidth))
            throw InvalidArgument("gaussian bandwidth must be positive");
        return Kernel(GaussianKernel{bandwidth, normalized});
    }

    static Kernel polynomial(int degree, double offset) {
        if (degree < 1) throw InvalidArgument("polynomial degree must be >= 1");
        if (!(offset >= 0.0) || !std::isfinite(offset))
            throw InvalidArgument("polynomial offset must be >= 0");
        return Kernel(PolynomialKernel{degree, offset});
    }

    static Kernel linear() { return Kernel(LinearKernel{}); }

    /// Parses `gaussian:bw=<float>[:normalized]`, `poly:degree=<int>:offset=<float>` or `linear`.
    static Kernel parse(std::string_view spec) {
        const auto parts = detail::split(spec, ':');
        const auto name = parts.front();
        auto value_of = [&](std::string_view part, std::string_view key) -> std::string_view {
            const auto eq = part.find('=');
            if (eq == std::string_view::npos || part.substr(0, eq) != key)
                throw InvalidArgument("kernel spec '" + std::string(spec) + "': expected " + std::string(key) + "=<value>");
            return part.substr(eq + 1);
        };
        if (name == "linear") {
            if (parts.size() != 1) throw InvalidArgument("kernel spec 'linear' takes no parameters");
            return linear();
        }
        if (name == "gaussian") {
            if (parts.size() < 2 || parts.size() > 3)
                throw InvalidArgument("kernel spec '" + std::string(spec) + "': expected gaussian:bw=<float>[:normalized]");
            const double bw = detail::parse_double(value_of(parts[1], "bw"), "bw");
            bool normalized = false;
            if (parts.size() == 3) {
                if (parts[2] != "normalized")
                    throw InvalidArgument("kernel spec '" + std::string(spec) + "': unknown flag '" + std::string(parts[2]) + "'");
                normalized = true;
            }
            return gaussian(bw, normalized);
        }
        if (name == "poly") {
            if (parts.size() != 3)
                throw InvalidArgument("kernel spec '" + std::string(spec) + "': expected poly:degree=<int>:offset=<float>");
            const long degree = detail::parse_long(value_of(parts[1], "degree"), "degree");
            const double offset = detail::parse_double(value_of(parts[2], "offset"), "offset");
            return polynomial(static_cast<int>(degree), offset);
        }
        throw InvalidArgument("unknown kernel '" + std::string(name) + "'");
    }

    /// Inverse of parse(); floats are written with 17 significant digits so the round trip is exact.
    [[nodiscard]] std::string to_string() const {
        return std::visit(
            [](const auto& k) -> std::string {
                using K = std::decay_t<decltype(k)>;
                if constexpr (std::is_same_v<K, GaussianKernel>) {
                    return "gaussian:bw=" + detail::format_double(k.bandwidth) + (k.normalized ? ":normalized" : "");
                } else if constexpr (std::is_same_v<K, PolynomialKernel>) {
                    return "poly:degree=" + std::to_string(k.degree) + ":offset=" + detail::format_double(k.offset);
                } else {
                    return "linear";
                }
            },
            impl_);
    }

    template <typename DerivedA, typename DerivedB>
    double operator()(const Eigen::MatrixBase<DerivedA>& x, const Eigen::MatrixBase<DerivedB>& y) const {
        if (x.size() != y.size()) throw InvalidArgument("kernel evaluation: dimension mismatch");
        const Eigen::VectorXd xe = x.reshaped();
        const Eigen::VectorXd ye = y.reshaped();
        return eval(xe.data(), ye.data(), xe.size());
    }

    double eval(const double* x, const double* y, Index d) const {
        return std::visit([&](const auto& k) { return k(x, y, d); }, impl_);
    }

    [[nodiscard]] const Variant& variant() const noexcept { return impl_; }

    bool operator==(const Kernel&) const = default;

private:
    explicit Kernel(Variant v) : impl_(v) {}

    Variant impl_;
};

// ---------------------------------------------------------------------------
// Data

/// m observations (rows) in d dimensions. Immutable; copies share storage.
class DataSet {
public:
    DataSet() = default;

    explicit DataSet(PointMatrix points) {
        if (points.rows() < 1 || points.cols() < 1) throw InvalidArgument("data set must have at least one point and one dimension");
        if (!points.allFinite()) throw InvalidArgument("data set contains non-finite entries");
        points_ = std::make_shared<const PointMatrix>(std::move(points));
    }

    template <typename Derived>
    static DataSet from(const Eigen::MatrixBase<Derived>& points) {
        return DataSet(PointMatrix(points));
    }

    [[nodiscard]] Index size() const noexcept { return points_ ? points_->rows() : 0; }
    [[nodiscard]] Index dim() const noexcept { return points_ ? points_->cols() : 0; }
    [[nodiscard]] const PointMatrix& points() const { return *points_; }
    [[nodiscard]] const double* row(Index i) const { return points_->data() + i * dim(); }

    bool operator==(const DataSet& other) const {
        if (points_ == other.points_) return true;
        if (!points_ || !other.points_) return false;
        return points_->rows() == other.points_->rows() && points_->cols() == other.points_->cols() &&
               *points_ == *other.points_;
    }

private:
    std::shared_ptr<const PointMatrix> points_;
};

/// Stands for the feature matrix [phi(x_1), ..., phi(x_m)] of a data set under a kernel.
struct FeatureMatrix {
    DataSet data;
    Kernel kernel;

    [[nodiscard]] Index size() const noexcept { return data.size(); }
    [[nodiscard]] Index dim() const noexcept { return data.dim(); }

    bool operator==(const FeatureMatrix&) const = default;
};

/// Concatenation [A, B] of two feature matrices over the same kernel.
inline FeatureMatrix concat(const FeatureMatrix& a, const FeatureMatrix& b) {
    if (!(a.kernel == b.kernel)) throw InvalidArgument("concat: kernel mismatch");
    if (a.dim() != b.dim()) throw InvalidArgument("concat: dimension mismatch");
    PointMatrix p(a.size() + b.size(), a.dim());
    p.topRows(a.size()) = a.data.points();
    p.bottomRows(b.size()) = b.data.points();
    return {DataSet(std::move(p)), a.kernel};
}

// ---------------------------------------------------------------------------
// Gram matrices

namespace detail {

inline void require_compatible(const FeatureMatrix& a, const FeatureMatrix& b, const char* what) {
    if (!(a.kernel == b.kernel)) throw InvalidArgument(std::string(what) + ": kernel mismatch");
    if (a.dim() != b.dim()) throw InvalidArgument(std::string(what) + ": dimension mismatch");
}

}  // namespace detail

/// G = Phi^T Phi, exactly symmetric (upper triangle mirrored).
inline Matrix gram(const FeatureMatrix& phi) {
    const Index m = phi.size();
    const Index d = phi.dim();
    if (m == 0) throw InvalidArgument("gram: empty feature matrix");
    Matrix g(m, m);
    std::visit(
        [&](const auto& k) {
            for (Index j = 0; j < m; ++j) {
                const double* xj = phi.data.row(j);
                for (Index i = 0; i <= j; ++i) g(i, j) = k(phi.data.row(i), xj, d);
            }
        },
        phi.kernel.variant());
    g.triangularView<Eigen::StrictlyLower>() = g.transpose();
    return g;
}

/// Entry (i, j) = k(x_i, x'_j).
inline Matrix cross_gram(const FeatureMatrix& phi, const FeatureMatrix& other) {
    detail::require_compatible(phi, other, "cross_gram");
    const Index m = phi.size();
    const Index n = other.size();
    const Index d = phi.dim();
    if (phi.data == other.data) return gram(phi);
    Matrix g(m, n);
    std::visit(
        [&](const auto& k) {
            for (Index j = 0; j < n; ++j) {
                const double* yj = other.data.row(j);
                for (Index i = 0; i < m; ++i) g(i, j) = k(phi.data.row(i), yj, d);
            }
        },
        phi.kernel.variant());
    return g;
}

// ---------------------------------------------------------------------------
// RKHS functions

/// f = Phi c, i.e. f(x) = sum_i c_i k(x_i, x).
template <typename Scalar>
struct BasicRkhsFunction {
    using CoeffVector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

    FeatureMatrix basis;
    CoeffVector coefficients;

    BasicRkhsFunction() = default;
    BasicRkhsFunction(FeatureMatrix b, CoeffVector c) : basis(std::move(b)), coefficients(std::move(c)) {
        if (coefficients.size() != basis.size())
            throw InvalidArgument("RKHS function: coefficient count does not match basis size");
    }

    static BasicRkhsFunction zero(const FeatureMatrix& b) { return {b, CoeffVector::Zero(b.size())}; }

    /// The kernel section k(x, .) as a function with a single-point basis.
    template <typename Derived>
    static BasicRkhsFunction section(const Kernel& k, const Eigen::MatrixBase<Derived>& x) {
        PointMatrix p(1, x.size());
        p.row(0) = x.reshaped().transpose();
        return {FeatureMatrix{DataSet(std::move(p)), k}, CoeffVector::Ones(1)};
    }
};

using RkhsFunction = BasicRkhsFunction<double>;
using ComplexRkhsFunction = BasicRkhsFunction<std::complex<double>>;

/// Values of f at every point of X.
template <typename Scalar>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> evaluate_function(const BasicRkhsFunction<Scalar>& f, const DataSet& x) {
    if (x.dim() != f.basis.dim()) throw InvalidArgument("evaluate_function: dimension mismatch");
    const Matrix k = cross_gram(FeatureMatrix{x, f.basis.kernel}, f.basis);
    return k.template cast<Scalar>() * f.coefficients;
}

/// <f, g> = c_f^H G_fg c_g.
template <typename Scalar>
Scalar inner_product(const BasicRkhsFunction<Scalar>& f, const BasicRkhsFunction<Scalar>& g) {
    const Matrix k = cross_gram(f.basis, g.basis);
    return f.coefficients.dot(k.template cast<Scalar>() * g.coefficients);
}

template <typename Scalar>
double rkhs_norm(const BasicRkhsFunction<Scalar>& f) {
    return std::sqrt(std::max(0.0, std::real(inner_product(f, f))));
}

}  // namespace rkhs
