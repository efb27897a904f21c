#include <cmath>
#include <numbers>

#include "layerctl/errors.hpp"
#include "layerctl/fields.hpp"
#include "layerctl/smooth.hpp"

namespace layerctl {

namespace {

double param(const ParamMap& p, const std::string& key, double fallback) {
    auto it = p.find(key);
    return it == p.end() ? fallback : it->second;
}

Mat2 fd_gradient(const VelocityFn& u, double t, const Vec2& x) {
    const double h = 1e-5;
    Mat2 g;
    for (int j = 0; j < 2; ++j) {
        Vec2 xp = x, xm = x;
        xp[j] += h;
        xm[j] -= h;
        const Vec2 up = u(t, xp), um = u(t, xm);
        for (int i = 0; i < 2; ++i) g(i, j) = (up[i] - um[i]) / (2.0 * h);
    }
    return g;
}

void require_positive_horizon(double T) {
    if (!(T > 0.0)) throw PreconditionError("reference flow: horizon T must be positive");
}

}  // namespace

Vec2 ReferenceFlow::velocity(double t, const Vec2& x) const {
    if (t < 0.0 || t > T) return {};
    return u0(t, x);
}

Mat2 ReferenceFlow::gradient(double t, const Vec2& x) const {
    if (t < 0.0 || t > T) return Mat2::zero();
    return grad_u0 ? grad_u0(t, x) : fd_gradient(u0, t, x);
}

double channel_profile(double t, double T, double displacement) {
    return displacement / T * smooth::step_d1(t / T);
}

double channel_profile_d1(double t, double T, double displacement) {
    return displacement / (T * T) * smooth::step_d2(t / T);
}

double channel_displacement(double t, double T, double displacement) {
    return displacement * smooth::step(t / T);
}

ReferenceFlow make_reference_flow(std::string name, VelocityFn u0, GradientFn grad, double T,
                                  bool irrotational) {
    require_positive_horizon(T);
    if (!u0) throw PreconditionError("reference flow: velocity closure is empty");
    ReferenceFlow f;
    f.name = std::move(name);
    f.u0 = std::move(u0);
    f.grad_u0 = std::move(grad);
    f.T = T;
    f.irrotational = irrotational;
    return f;
}

ReferenceFlow make_reference_flow(const std::string& name, const ParamMap& params) {
    const double T = param(params, "T", 1.0);
    require_positive_horizon(T);

    if (name == "zero") {
        return make_reference_flow(
            name, [](double, const Vec2&) { return Vec2{}; }, [](double, const Vec2&) { return Mat2::zero(); },
            T, true);
    }

    if (name == "uniform-channel" || name == "perturbed-channel") {
        double D = param(params, "displacement", param(params, "amplitude", 1.2));
        if (D < 0.0) throw PreconditionError("reference flow: displacement must be nonnegative");
        const double flush_length = param(params, "flush_length", 0.0);
        if (flush_length > 0.0) D = std::max(D, 1.05 * flush_length);
        if (name == "uniform-channel") {
            return make_reference_flow(
                name, [T, D](double t, const Vec2&) { return Vec2{channel_profile(t, T, D), 0.0}; },
                [](double, const Vec2&) { return Mat2::zero(); }, T, true);
        }
        // Stream function h(t) (y + kappa sin(2 pi x) p(y)), p = y^2 (1 - y)^2: walls at y = 0, 1.
        const double kappa = param(params, "kappa", 0.2);
        constexpr double tau = 2.0 * std::numbers::pi;
        auto u = [T, D, kappa](double t, const Vec2& x) {
            const double h = channel_profile(t, T, D);
            const double y = x.y;
            const double p = y * y * (1 - y) * (1 - y);
            const double p1 = 2.0 * y * (1 - y) * (1 - 2 * y);
            return Vec2{h * (1.0 + kappa * std::sin(tau * x.x) * p1),
                        -h * kappa * tau * std::cos(tau * x.x) * p};
        };
        auto g = [T, D, kappa](double t, const Vec2& x) {
            const double h = channel_profile(t, T, D);
            const double y = x.y;
            const double p = y * y * (1 - y) * (1 - y);
            const double p1 = 2.0 * y * (1 - y) * (1 - 2 * y);
            const double p2 = 2.0 * (1.0 - 6.0 * y + 6.0 * y * y);
            const double s = std::sin(tau * x.x), c = std::cos(tau * x.x);
            Mat2 m;
            m(0, 0) = h * kappa * tau * c * p1;
            m(0, 1) = h * kappa * s * p2;
            m(1, 0) = h * kappa * tau * tau * s * p;
            m(1, 1) = -h * kappa * tau * c * p1;
            return m;
        };
        return make_reference_flow(name, u, g, T, kappa == 0.0);
    }

    if (name == "stagnation-corner") {
        const double strength = param(params, "strength", 1.0);
        if (!(strength > 0.0)) throw PreconditionError("reference flow: strength must be positive");
        const double xc = param(params, "center", 0.5);
        const double wall = param(params, "wall", 0.0);
        auto u = [T, strength, xc, wall](double t, const Vec2& x) {
            const double s = strength * smooth::step_d1(t / T);
            return Vec2{s * (x.x - xc), -s * (x.y - wall)};
        };
        auto g = [T, strength](double t, const Vec2&) {
            const double s = strength * smooth::step_d1(t / T);
            Mat2 m;
            m(0, 0) = s;
            m(1, 1) = -s;
            return m;
        };
        return make_reference_flow(name, u, g, T, true);
    }

    throw PreconditionError("reference flow: unknown family '" + name + "'");
}

FlowInvariantReport check_flow_invariants(const ReferenceFlow& flow, const Domain& domain,
                                          std::size_t samples) {
    FlowInvariantReport r;
    const auto walls = domain.wall_samples(samples);
    const auto interior = domain.mesh(samples, samples);
    for (std::size_t k = 0; k <= samples; ++k) {
        const double t = flow.T * static_cast<double>(k) / static_cast<double>(samples);
        for (const Vec2& x : walls) r.tangency = std::max(r.tangency, std::abs(dot(flow.velocity(t, x), domain.normal(x))));
        if (flow.irrotational) {
            for (const Vec2& x : interior) {
                const Mat2 g = fd_gradient(flow.u0, std::clamp(t, 1e-9, flow.T - 1e-9), x);
                r.curl = std::max(r.curl, std::abs(g(1, 0) - g(0, 1)));
            }
        }
    }
    for (const Vec2& x : interior) {
        r.endpoints = std::max({r.endpoints, norm(flow.velocity(0.0, x)), norm(flow.velocity(flow.T, x)),
                                norm(flow.u0(0.0, x)), norm(flow.u0(flow.T, x))});
    }
    return r;
}

}  // namespace layerctl
