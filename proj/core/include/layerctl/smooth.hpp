#pragma once

#include <cmath>

namespace layerctl::smooth {

/// exp(-1/s) for s > 0, zero otherwise, with its first two derivatives.
inline double psi(double s) { return s > 0.0 ? std::exp(-1.0 / s) : 0.0; }
inline double psi_d1(double s) { return s > 0.0 ? std::exp(-1.0 / s) / (s * s) : 0.0; }
inline double psi_d2(double s) {
    if (s <= 0.0) return 0.0;
    const double e = std::exp(-1.0 / s);
    return e * (1.0 - 2.0 * s) / (s * s * s * s);
}

/// C-infinity step: 0 for s <= 0, 1 for s >= 1.
inline double step(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    const double p = psi(s), q = psi(1.0 - s);
    return p / (p + q);
}

inline double step_d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double p = psi(s), q = psi(1.0 - s);
    const double d = p + q;
    return (psi_d1(s) * q + p * psi_d1(1.0 - s)) / (d * d);
}

inline double step_d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    const double p = psi(s), q = psi(1.0 - s);
    const double p1 = psi_d1(s), q1 = -psi_d1(1.0 - s);
    const double p2 = psi_d2(s), q2 = psi_d2(1.0 - s);
    const double num = p1 * q - p * q1;
    const double dnum = p2 * q - p * q2;
    const double d = p + q;
    return (dnum * d - 2.0 * num * (p1 + q1)) / (d * d * d);
}

/// Radial bump exp(-1/(1 - r^2)) on r < 1, exactly zero for r >= 1.
inline double bump(double r) {
    const double r2 = r * r;
    return r2 < 1.0 ? std::exp(-1.0 / (1.0 - r2)) : 0.0;
}

/// Time cutoff: 1 on (-inf, -eps], 0 on [eps, inf).
inline double beta(double t, double eps) { return 1.0 - step((t + eps) / (2.0 * eps)); }
inline double beta_d1(double t, double eps) { return -step_d1((t + eps) / (2.0 * eps)) / (2.0 * eps); }

/// Spatial step c: 0 below 1/4, 1 above 3/4.
inline double c_step(double x) { return step(2.0 * (x - 0.25)); }
/// Unit-mass profile a = c', supported in [1/4, 3/4].
inline double c_step_d1(double x) { return 2.0 * step_d1(2.0 * (x - 0.25)); }
inline double c_step_d2(double x) { return 4.0 * step_d2(2.0 * (x - 0.25)); }

/// Quintic smoothstep 6s^5 - 15s^4 + 10s^3 clamped to [0, 1], with derivatives.
inline double quintic(double s) {
    if (s <= 0.0) return 0.0;
    if (s >= 1.0) return 1.0;
    return s * s * s * (10.0 + s * (-15.0 + 6.0 * s));
}
inline double quintic_d1(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 30.0 * s * s * (1.0 - s) * (1.0 - s);
}
inline double quintic_d2(double s) {
    if (s <= 0.0 || s >= 1.0) return 0.0;
    return 60.0 * s * (1.0 - s) * (1.0 - 2.0 * s);
}

}  // namespace layerctl::smooth
