#include <algorithm>
#include <cmath>

#include "layerctl/errors.hpp"
#include "layerctl/layer.hpp"
#include "layerctl/ode.hpp"
#include "control_engine.hpp"

namespace layerctl::layer {

namespace detail {

std::vector<double> initial_pass_state(const Vec2& x0, int top) {
    const PassLayout lay{top};
    std::vector<double> y(lay.size(), 0.0);
    y[0] = x0.x;
    y[1] = x0.y;
    for (int p = 0; p <= top; ++p) {
        y[lay.psi(p)] = 1.0;
        y[lay.psi(p) + 3] = 1.0;
    }
    return y;
}

double control_amplitude(const LagrangianControl& ctl, int p, double t, const Vec2& X) {
    double a = 0.0;
    for (const auto& b : ctl.active) {
        if (!b.order_enabled[static_cast<std::size_t>(p)]) continue;
        const double d = ctl.partition->beta_d1(b.ball, t);
        if (d == 0.0 || !b.patch.contains(X)) continue;
        a += d * b.weight;
    }
    return a;
}

std::vector<double> run_pass(const LayerSources& src, const ReferenceFlow& flow, const LagrangianControl& ctl,
                             int top, double t0, double t1, std::vector<double> y, double tol, double max_step) {
    const PassLayout lay{top};
    std::vector<double> K0(static_cast<std::size_t>(top) + 1), K1(K0.size());
    for (int p = 0; p <= top; ++p) {
        K0[static_cast<std::size_t>(p)] = kernel_g0_derivative(2 * p);
        K1[static_cast<std::size_t>(p)] = kernel_g1_derivative(2 * p);
    }
    auto rhs = [&](double t, const std::vector<double>& s, std::vector<double>& ds) {
        const Vec2 X{s[0], s[1]};
        const Vec2 u = flow.velocity(t, X);
        ds[0] = u.x;
        ds[1] = u.y;
        const Mat2 B = src.B(t, X);
        const double uf = src.u0_flat(t, X);
        const Vec2 G = src.G0(t, X);
        const Vec2 Gt = src.G0_tilde(t, X);
        for (int p = 0; p <= top; ++p) {
            const int k = 2 * p;
            const std::size_t iq = lay.q(p);
            const Vec2 Q{s[iq], s[iq + 1]};
            const Mat2 A = (static_cast<double>(k + 1) * uf) * Mat2::identity() - B;
            const Mat2 Psi = psi_at(s, lay.psi(p));
            Vec2 dQ = A * Q + K0[static_cast<std::size_t>(p)] * G + K1[static_cast<std::size_t>(p)] * Gt;
            if (p > 0) {
                const std::size_t il = lay.q(p - 1);
                dQ -= static_cast<double>(k * (k - 1)) * Vec2{s[il], s[il + 1]};
            }
            if (static_cast<std::size_t>(p) < ctl.coeff.size() && ctl.coeff[static_cast<std::size_t>(p)]) {
                const double a = control_amplitude(ctl, p, t, X);
                if (a != 0.0) dQ += a * (Psi * *ctl.coeff[static_cast<std::size_t>(p)]);
            }
            ds[iq] = dQ.x;
            ds[iq + 1] = dQ.y;
            const Mat2 dPsi = A * Psi;
            for (int i = 0; i < 4; ++i) ds[lay.psi(p) + static_cast<std::size_t>(i)] = dPsi.a[static_cast<std::size_t>(i)];
        }
    };
    ode::Options o;
    o.tol = tol;
    o.max_step = max_step;
    return ode::integrate(rhs, t0, t1, std::move(y), o);
}

}  // namespace detail

double MomentTrajectory::max_abs(int k) const {
    double m = 0.0;
    if (k < 0 || k > k_max) throw PreconditionError("max_abs: order out of range");
    for (const auto& q : final_state().Q) m = std::max(m, norm(q[static_cast<std::size_t>(k)]));
    return m;
}

double MomentTrajectory::max_normal_component(const Domain& d) const {
    double m = 0.0;
    for (const auto& s : snapshots)
        for (std::size_t i = 0; i < s.points.size(); ++i) {
            const Vec2 n = -d.grad_phi(s.points[i]);
            for (const auto& q : s.Q[i]) m = std::max(m, std::abs(dot(q, n)));
        }
    return m;
}

namespace {

double pass_max_step(const ReferenceFlow& flow, const Partition* partition) {
    if (partition && partition->window > 0.0) return partition->window / 8.0;
    return flow.T / 64.0;
}

}  // namespace

MomentTrajectory evolve_moments(const LayerSources& sources, const ReferenceFlow& flow,
                                const ControlSchedule& control, int k_max, const std::vector<Vec2>& cloud,
                                double T_end, const MomentOptions& opt) {
    if (k_max < 0) throw PreconditionError("evolve_moments: k_max must be nonnegative");
    if (!(T_end >= 0.0)) throw PreconditionError("evolve_moments: T_end must be nonnegative");
    const int top = k_max / 2;
    const ControlEngine* engine = control.engine();
    if (!control.empty() && !engine) throw PreconditionError("evolve_moments: control schedule has no engine");
    for (const auto& piece : control.pieces()) {
        if (piece.order % 2 != 0 || piece.profile != piece.order / 2)
            throw PreconditionError("evolve_moments: control piece references an unknown fast profile");
    }
    if (engine && engine->k_max() < 2 * top && !control.empty()) {
        for (const auto& piece : control.pieces())
            if (piece.order > engine->k_max())
                throw PreconditionError("evolve_moments: control order exceeds the engine order");
    }

    const std::size_t ns = std::max<std::size_t>(opt.snapshots, 1);
    MomentTrajectory traj;
    traj.k_max = k_max;
    traj.snapshots.resize(ns + 1);
    for (std::size_t i = 0; i <= ns; ++i) {
        auto& s = traj.snapshots[i];
        s.t = T_end * static_cast<double>(i) / static_cast<double>(ns);
        s.starts = cloud;
        s.points.assign(cloud.size(), Vec2{});
        s.Q.assign(cloud.size(), std::vector<Vec2>(static_cast<std::size_t>(k_max) + 1, Vec2{}));
    }
    const double hmax = pass_max_step(flow, engine ? &engine->partition() : nullptr);

    for (std::size_t c = 0; c < cloud.size(); ++c) {
        const Vec2 x0 = cloud[c];
        detail::LagrangianControl ctl;
        if (!control.empty()) ctl = engine->lagrangian_control(x0, control.pieces());
        for (int p = 0; p <= top; ++p) {
            // Each order is read from the lowest pass containing it, so lower orders never see higher controls.
            auto y = detail::initial_pass_state(x0, p);
            const detail::PassLayout lay{p};
            auto record = [&](std::size_t i) {
                auto& s = traj.snapshots[i];
                if (p == 0) s.points[c] = Vec2{y[0], y[1]};
                s.Q[c][static_cast<std::size_t>(2 * p)] = Vec2{y[lay.q(p)], y[lay.q(p) + 1]};
            };
            record(0);
            for (std::size_t i = 1; i <= ns; ++i) {
                y = detail::run_pass(sources, flow, ctl, p, traj.snapshots[i - 1].t, traj.snapshots[i].t, std::move(y),
                                     opt.tol, hmax);
                record(i);
            }
        }
    }
    return traj;
}

csv::Table moment_table(const MomentTrajectory& traj) {
    csv::Table t({"k", "x1", "x2", "abs_Qk"});
    const auto& s = traj.final_state();
    for (int k = 0; k <= traj.k_max; k += 2)
        for (std::size_t i = 0; i < s.starts.size(); ++i)
            t.add_row({static_cast<double>(k), s.starts[i].x, s.starts[i].y, norm(s.Q[i][static_cast<std::size_t>(k)])});
    return t;
}

}  // namespace layerctl::layer
