#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "layerctl/layer.hpp"

namespace layerctl::layer::detail {

/// One ball whose weight is positive at the start point of a characteristic.
struct ActiveBall {
    std::size_t ball = 0;
    double weight = 0.0;
    Box patch;
    std::vector<bool> order_enabled;  ///< indexed by order index p = k / 2
};

/// Control data along one characteristic: amplitudes a_p(t) Psi_p(t) c_p.
struct LagrangianControl {
    const Partition* partition = nullptr;
    std::vector<ActiveBall> active;
    std::vector<std::optional<Vec2>> coeff;  ///< per order index; empty means uncontrolled
};

/// State layout [X, Q_0, Q_2, ..., Q_2P, Psi_0, ..., Psi_P].
struct PassLayout {
    int top = 0;  ///< P
    std::size_t q(int p) const { return 2 + 2 * static_cast<std::size_t>(p); }
    std::size_t psi(int p) const { return 2 + 2 * static_cast<std::size_t>(top + 1) + 4 * static_cast<std::size_t>(p); }
    std::size_t size() const { return psi(top + 1); }
};

std::vector<double> initial_pass_state(const Vec2& x0, int top);

/// Integrates one pass from t0 to t1; `observe` receives every accepted state.
std::vector<double> run_pass(const LayerSources& src, const ReferenceFlow& flow, const LagrangianControl& ctl,
                             int top, double t0, double t1, std::vector<double> y, double tol, double max_step);

/// Sum over active balls of beta'_l(t) eta_l(x0) 1_{C_l}(X) for order index p.
double control_amplitude(const LagrangianControl& ctl, int p, double t, const Vec2& X);

inline Mat2 psi_at(const std::vector<double>& y, std::size_t off) {
    Mat2 m;
    m(0, 0) = y[off];
    m(0, 1) = y[off + 1];
    m(1, 0) = y[off + 2];
    m(1, 1) = y[off + 3];
    return m;
}

}  // namespace layerctl::layer::detail
