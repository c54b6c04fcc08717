#pragma once

#include <random>

#include "rkhs/rkhs.hpp"

namespace testing_support {

using rkhs::DataSet;
using rkhs::FeatureMatrix;
using rkhs::Index;
using rkhs::Kernel;
using rkhs::Matrix;
using rkhs::PointMatrix;
using rkhs::Vector;

inline DataSet points(std::initializer_list<std::initializer_list<double>> rows) {
    const auto m = static_cast<Index>(rows.size());
    const auto d = static_cast<Index>(rows.begin()->size());
    PointMatrix p(m, d);
    Index i = 0;
    for (const auto& r : rows) {
        Index j = 0;
        for (double v : r) p(i, j++) = v;
        ++i;
    }
    return DataSet(std::move(p));
}

inline DataSet random_points(std::mt19937_64& rng, Index m, Index d, double lo = -1.0, double hi = 1.0) {
    std::uniform_real_distribution<double> u(lo, hi);
    PointMatrix p(m, d);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < d; ++j) p(i, j) = u(rng);
    return DataSet(std::move(p));
}

inline Matrix random_matrix(std::mt19937_64& rng, Index r, Index c) {
    std::normal_distribution<double> n(0.0, 1.0);
    Matrix a(r, c);
    for (Index i = 0; i < r; ++i)
        for (Index j = 0; j < c; ++j) a(i, j) = n(rng);
    return a;
}

inline Vector random_vector(std::mt19937_64& rng, Index n) { return random_matrix(rng, n, 1).col(0); }

/// Gaussian kernel on well-separated random points: Grams are comfortably positive definite.
struct RandomInstance {
    FeatureMatrix out;
    FeatureMatrix in;
    rkhs::EmpiricalOperator s;
};

inline RandomInstance random_instance(std::mt19937_64& rng, Index n, Index m, Index d = 2) {
    const Kernel k = Kernel::gaussian(0.7);
    FeatureMatrix out{random_points(rng, n, d, -2.0, 2.0), k};
    FeatureMatrix in{random_points(rng, m, d, -2.0, 2.0), k};
    rkhs::EmpiricalOperator s(out, random_matrix(rng, n, m), in);
    return {out, in, s};
}

inline double cond(const Matrix& g) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(g);
    return es.eigenvalues().maxCoeff() / es.eigenvalues().minCoeff();
}

/// Random instance whose Grams have condition number below `max_cond`.
inline RandomInstance well_conditioned_instance(std::mt19937_64& rng, Index n, Index m, double max_cond = 1e6) {
    for (;;) {
        auto inst = random_instance(rng, n, m);
        const double c1 = cond(rkhs::gram(inst.out));
        const double c2 = cond(rkhs::gram(inst.in));
        if (c1 > 0 && c1 < max_cond && c2 > 0 && c2 < max_cond) return inst;
    }
}

inline double rel_diff(double a, double b) { return std::abs(a - b) / std::max(std::abs(a), std::abs(b)); }

}  // namespace testing_support
