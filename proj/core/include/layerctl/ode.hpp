#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "layerctl/errors.hpp"

namespace layerctl::ode {

/// Options for the embedded Runge-Kutta-Fehlberg 4(5) pair.
struct Options {
    double tol = 1e-10;         ///< per-step error bound, scaled by (1 + |y_i|)
    double initial_step = 0.0;  ///< 0 picks |t1 - t0| / 64
    double max_step = 0.0;      ///< 0 means unbounded
    std::size_t max_steps = 2'000'000;
};

struct Stats {
    std::size_t accepted = 0;
    std::size_t rejected = 0;
    double last_step = 0.0;
};

namespace detail {

// Fehlberg tableau; the fourth-order solution is propagated.
inline constexpr double c2 = 1.0 / 4, c3 = 3.0 / 8, c4 = 12.0 / 13, c5 = 1.0, c6 = 1.0 / 2;
inline constexpr double a21 = 1.0 / 4;
inline constexpr double a31 = 3.0 / 32, a32 = 9.0 / 32;
inline constexpr double a41 = 1932.0 / 2197, a42 = -7200.0 / 2197, a43 = 7296.0 / 2197;
inline constexpr double a51 = 439.0 / 216, a52 = -8.0, a53 = 3680.0 / 513, a54 = -845.0 / 4104;
inline constexpr double a61 = -8.0 / 27, a62 = 2.0, a63 = -3544.0 / 2565, a64 = 1859.0 / 4104,
                        a65 = -11.0 / 40;
inline constexpr double b1 = 25.0 / 216, b3 = 1408.0 / 2565, b4 = 2197.0 / 4104, b5 = -1.0 / 5;
inline constexpr double e1 = 1.0 / 360, e3 = -128.0 / 4275, e4 = -2197.0 / 75240, e5 = 1.0 / 50,
                        e6 = 2.0 / 55;

/// One Fehlberg step; returns the propagated state and writes the max scaled error.
template <class State, class Rhs>
State step(Rhs& f, double t, const State& y, double h, double tol, double& err_norm) {
    State k1 = y, k2 = y, k3 = y, k4 = y, k5 = y, k6 = y, tmp = y;
    const std::size_t n = y.size();
    f(t, y, k1);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * a21 * k1[i];
    f(t + c2 * h, tmp, k2);
    for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + h * (a31 * k1[i] + a32 * k2[i]);
    f(t + c3 * h, tmp, k3);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a41 * k1[i] + a42 * k2[i] + a43 * k3[i]);
    f(t + c4 * h, tmp, k4);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a51 * k1[i] + a52 * k2[i] + a53 * k3[i] + a54 * k4[i]);
    f(t + c5 * h, tmp, k5);
    for (std::size_t i = 0; i < n; ++i)
        tmp[i] = y[i] + h * (a61 * k1[i] + a62 * k2[i] + a63 * k3[i] + a64 * k4[i] + a65 * k5[i]);
    f(t + c6 * h, tmp, k6);
    State out = y;
    err_norm = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        out[i] = y[i] + h * (b1 * k1[i] + b3 * k3[i] + b4 * k4[i] + b5 * k5[i]);
        const double e = h * (e1 * k1[i] + e3 * k3[i] + e4 * k4[i] + e5 * k5[i] + e6 * k6[i]);
        const double scale = tol * (1.0 + std::max(std::abs(y[i]), std::abs(out[i])));
        err_norm = std::max(err_norm, std::abs(e) / scale);
    }
    return out;
}

}  // namespace detail

/// Adaptive integration of y' = f(t, y) from t0 to t1 (either direction).
/// `observe(t, y)` is called after every accepted step.
template <class State, class Rhs, class Observer>
State integrate(Rhs f, double t0, double t1, State y, const Options& opt, Observer observe,
                Stats* stats = nullptr) {
    Stats local;
    Stats& st = stats ? *stats : local;
    if (t1 == t0) return y;
    const double dir = t1 > t0 ? 1.0 : -1.0;
    const double span = std::abs(t1 - t0);
    double h = opt.initial_step > 0.0 ? opt.initial_step : span / 64.0;
    if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    double t = t0;
    while (dir * (t1 - t) > 0.0) {
        if (st.accepted + st.rejected > opt.max_steps)
            throw IntegrationError("ode: step budget exhausted at t = " + std::to_string(t));
        const double remaining = std::abs(t1 - t);
        const bool last = h >= remaining;
        const double hh = last ? remaining : h;
        const double min_step = 1e-14 * std::max(1.0, std::abs(t));
        if (hh < min_step && !last)
            throw IntegrationError("ode: step size underflow at t = " + std::to_string(t));
        double err = 0.0;
        State next = detail::step(f, t, y, dir * hh, opt.tol, err);
        bool finite = true;
        for (std::size_t i = 0; i < next.size(); ++i)
            if (!std::isfinite(next[i])) finite = false;
        if (finite && err <= 1.0) {
            t = last ? t1 : t + dir * hh;
            y = std::move(next);
            ++st.accepted;
            st.last_step = hh;
            observe(t, y);
            const double grow = err > 0.0 ? 0.9 * std::pow(err, -0.2) : 4.0;
            h = hh * std::clamp(grow, 0.2, 4.0);
            if (last) h = std::max(h, hh);
        } else {
            ++st.rejected;
            const double shrink = finite && err > 0.0 ? 0.9 * std::pow(err, -0.25) : 0.1;
            h = hh * std::clamp(shrink, 0.1, 0.9);
            if (h < min_step)
                throw IntegrationError("ode: step size underflow at t = " + std::to_string(t));
        }
        if (opt.max_step > 0.0) h = std::min(h, opt.max_step);
    }
    return y;
}

template <class State, class Rhs>
State integrate(Rhs f, double t0, double t1, State y, const Options& opt, Stats* stats = nullptr) {
    return integrate(std::move(f), t0, t1, std::move(y), opt, [](double, const State&) {}, stats);
}

/// Fixed-step fourth-order integration with `steps` equal steps.
template <class State, class Rhs>
State integrate_fixed(Rhs f, double t0, double t1, State y, std::size_t steps) {
    const double h = (t1 - t0) / static_cast<double>(steps);
    double err = 0.0;
    for (std::size_t s = 0; s < steps; ++s)
        y = detail::step(f, t0 + static_cast<double>(s) * h, y, h, 1.0, err);
    return y;
}

}  // namespace layerctl::ode
