#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <utility>

#include <Eigen/Dense>

#include "rkhs/error.hpp"
#include "rkhs/kernel.hpp"

namespace rkhs {

// ---------------------------------------------------------------------------
// Double gyre

struct DoubleGyreParams {
    double amplitude = 0.25;
    double perturbation = 0.25;
    double frequency = 2.0 * std::numbers::pi;
};

struct Rectangle {
    double x_min = 0.0;
    double x_max = 2.0;
    double y_min = 0.0;
    double y_max = 1.0;

    [[nodiscard]] bool contains(double x, double y, double margin = 0.0) const {
        return x >= x_min - margin && x <= x_max + margin && y >= y_min - margin && y <= y_max + margin;
    }
    void validate() const {
        if (!(x_max > x_min) || !(y_max > y_min) || !std::isfinite(x_min) || !std::isfinite(x_max) ||
            !std::isfinite(y_min) || !std::isfinite(y_max))
            throw InvalidArgument("rectangle must have finite bounds with max > min");
    }
};

inline constexpr Rectangle kDoubleGyreDomain{0.0, 2.0, 0.0, 1.0};

inline Eigen::Vector2d double_gyre_field(const Eigen::Vector2d& x, double t, const DoubleGyreParams& p = {}) {
    constexpr double pi = std::numbers::pi;
    const double a = p.perturbation * std::sin(p.frequency * t);
    const double b = 1.0 - 2.0 * a;
    const double f = a * x(0) * x(0) + b * x(0);
    const double df = 2.0 * a * x(0) + b;
    return {-pi * p.amplitude * std::sin(pi * f) * std::cos(pi * x(1)),
            pi * p.amplitude * std::cos(pi * f) * std::sin(pi * x(1)) * df};
}

// ---------------------------------------------------------------------------
// Dormand-Prince 5(4)

struct IntegratorConfig {
    double rel_tol = 1e-8;
    double abs_tol = 1e-8;
    double initial_step = 0.0;  // 0 selects a step from the initial slope
    long max_steps = 1000000;

    void validate() const {
        if (!(rel_tol > 0.0) || !(abs_tol > 0.0)) throw InvalidArgument("integrator tolerances must be > 0");
        if (!(initial_step >= 0.0)) throw InvalidArgument("initial step must be >= 0");
        if (max_steps < 1) throw InvalidArgument("max steps must be >= 1");
    }
};

/// Integrates x' = field(x, t) from t0 to t1. `State` is a fixed- or dynamic-size Eigen vector.
template <typename Field, typename State>
State rk45_integrate(Field&& field, const State& x0, double t0, double t1, const IntegratorConfig& cfg = {}) {
    cfg.validate();
    if (!(t1 >= t0)) throw InvalidArgument("rk45_integrate: t1 must be >= t0");
    if (t1 == t0) return x0;

    // Butcher tableau
    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561, a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247, a64 = 49.0 / 176,
                     a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192, a75 = -2187.0 / 6784,
                     a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920, e5 = -17253.0 / 339200,
                     e6 = 22.0 / 525, e7 = -1.0 / 40;
    // PI controller constants
    constexpr double beta = 0.04;
    constexpr double expo = 0.2 - beta * 0.75;
    constexpr double safety = 0.9;
    constexpr double fac_min = 0.2;
    constexpr double fac_max = 10.0;

    const auto scaled_norm = [&](const State& err, const State& ya, const State& yb) {
        double acc = 0.0;
        for (Index i = 0; i < err.size(); ++i) {
            const double sc = cfg.abs_tol + cfg.rel_tol * std::max(std::abs(ya(i)), std::abs(yb(i)));
            acc += (err(i) / sc) * (err(i) / sc);
        }
        return std::sqrt(acc / static_cast<double>(std::max<Index>(1, err.size())));
    };

    State y = x0;
    double t = t0;
    State k1 = field(y, t);
    double h = cfg.initial_step;
    if (h == 0.0) {
        const double d0 = scaled_norm(y, y, y);
        const double d1 = scaled_norm(k1, y, y);
        h = (d0 < 1e-5 || d1 < 1e-5) ? 1e-6 : 0.01 * d0 / d1;
    }
    h = std::min(h, t1 - t0);
    double fac_old = 1e-4;
    bool last_rejected = false;

    for (long step = 0; step < cfg.max_steps; ++step) {
        if (t + 1.01 * h >= t1) h = t1 - t;
        if (!(h > 0.0) || h < 16.0 * std::numeric_limits<double>::epsilon() * std::abs(t))
            throw NumericalError("rk45_integrate: step size underflow at t=" + detail::format_double(t));

        const State k2 = field(y + h * a21 * k1, t + c2 * h);
        const State k3 = field(y + h * (a31 * k1 + a32 * k2), t + c3 * h);
        const State k4 = field(y + h * (a41 * k1 + a42 * k2 + a43 * k3), t + c4 * h);
        const State k5 = field(y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4), t + c5 * h);
        const State k6 = field(y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5), t + h);
        const State y_new = y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const State k7 = field(y_new, t + h);
        const State err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
        const double err_norm = scaled_norm(err, y, y_new);
        if (!std::isfinite(err_norm)) throw NumericalError("rk45_integrate: non-finite state at t=" + detail::format_double(t));

        const double fac11 = std::pow(std::max(err_norm, 1e-300), expo);
        if (err_norm <= 1.0) {
            double fac = fac11 / std::pow(fac_old, beta);
            fac = std::clamp(fac / safety, 1.0 / fac_max, 1.0 / fac_min);
            fac_old = std::max(err_norm, 1e-4);
            const bool reached = (t + h == t1) || (t1 - (t + h) <= 0.0);
            t = reached ? t1 : t + h;
            y = y_new;
            k1 = k7;
            if (reached) return y;
            double h_new = h / fac;
            if (last_rejected) h_new = std::min(h_new, h);
            last_rejected = false;
            h = h_new;
        } else {
            h /= std::min(1.0 / fac_min, fac11 / safety);
            last_rejected = true;
        }
    }
    throw NumericalError("rk45_integrate: maximum number of steps (" + std::to_string(cfg.max_steps) +
                         ") exceeded before t1");
}

// ---------------------------------------------------------------------------
// Datasets

/// Box centers of an nx x ny partition of `domain`, x index running fastest.
inline DataSet grid_midpoints(Index nx, Index ny, const Rectangle& domain = kDoubleGyreDomain) {
    if (nx < 1 || ny < 1) throw InvalidArgument("grid_midpoints: nx and ny must be >= 1");
    domain.validate();
    PointMatrix pts(nx * ny, 2);
    const double hx = (domain.x_max - domain.x_min) / static_cast<double>(nx);
    const double hy = (domain.y_max - domain.y_min) / static_cast<double>(ny);
    for (Index j = 0; j < ny; ++j) {
        for (Index i = 0; i < nx; ++i) {
            pts(j * nx + i, 0) = domain.x_min + (static_cast<double>(i) + 0.5) * hx;
            pts(j * nx + i, 1) = domain.y_min + (static_cast<double>(j) + 0.5) * hy;
        }
    }
    return DataSet(std::move(pts));
}

/// Images of the rows of X under the double gyre flow over [0, tau].
inline DataSet flow_map_dataset(const DataSet& x, double tau, const DoubleGyreParams& p = {},
                                const IntegratorConfig& cfg = {}, const Rectangle& domain = kDoubleGyreDomain) {
    if (x.dim() != 2) throw InvalidArgument("flow_map_dataset: points must be two-dimensional");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidArgument("flow_map_dataset: tau must be finite and >= 0");
    PointMatrix out(x.size(), 2);
    const auto field = [&p](const Eigen::Vector2d& s, double t) { return double_gyre_field(s, t, p); };
    for (Index i = 0; i < x.size(); ++i) {
        const double* row = x.row(i);
        if (!domain.contains(row[0], row[1]))
            throw InvalidArgument("flow_map_dataset: row " + std::to_string(i) + " lies outside the domain");
        Eigen::Vector2d end;
        try {
            end = rk45_integrate(field, Eigen::Vector2d(row[0], row[1]), 0.0, tau, cfg);
        } catch (const NumericalError& e) {
            throw NumericalError("flow_map_dataset: row " + std::to_string(i) + ": " + e.what());
        }
        out(i, 0) = end(0);
        out(i, 1) = end(1);
    }
    return DataSet(std::move(out));
}

// ---------------------------------------------------------------------------
// Random sampling

/// 64-bit Mersenne Twister with explicit conversions, so that a seed fixes the
/// stream on every conforming standard library.
class Random {
public:
    static constexpr const char* kAlgorithm = "mt19937_64;uniform=top53bits;normal=box-muller";

    explicit Random(std::uint64_t seed) : engine_(seed) {}

    /// Uniform on [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

    /// Two independent standard normals.
    std::pair<double, double> normal_pair() {
        const double u1 = 1.0 - uniform();  // (0, 1]
        const double u2 = uniform();
        const double r = std::sqrt(-2.0 * std::log(u1));
        const double phase = 2.0 * std::numbers::pi * u2;
        return {r * std::cos(phase), r * std::sin(phase)};
    }

private:
    std::mt19937_64 engine_;
};

inline DataSet sample_uniform(const Rectangle& domain, Index m, std::uint64_t seed) {
    if (m < 1) throw InvalidArgument("sample_uniform: m must be >= 1");
    domain.validate();
    Random rng(seed);
    PointMatrix pts(m, 2);
    for (Index i = 0; i < m; ++i) {
        pts(i, 0) = domain.x_min + (domain.x_max - domain.x_min) * rng.uniform();
        pts(i, 1) = domain.y_min + (domain.y_max - domain.y_min) * rng.uniform();
    }
    return DataSet(std::move(pts));
}

struct PairedSample {
    DataSet x;
    DataSet y;
};

/// Draws from 1/2 (p1(x) p2(y) + p2(x) p1(y)) with p1 = N(-1, rho^2), p2 = N(1, rho^2).
inline PairedSample sample_mixture(Index m, double rho, std::uint64_t seed) {
    if (m < 1) throw InvalidArgument("sample_mixture: m must be >= 1");
    if (!(rho > 0.0) || !std::isfinite(rho)) throw InvalidArgument("sample_mixture: rho must be > 0");
    Random rng(seed);
    PointMatrix xs(m, 1);
    PointMatrix ys(m, 1);
    for (Index i = 0; i < m; ++i) {
        const double mean_x = rng.uniform() < 0.5 ? -1.0 : 1.0;
        const auto [zx, zy] = rng.normal_pair();
        xs(i, 0) = mean_x + rho * zx;
        ys(i, 0) = -mean_x + rho * zy;
    }
    return {DataSet(std::move(xs)), DataSet(std::move(ys))};
}

}  // namespace rkhs
