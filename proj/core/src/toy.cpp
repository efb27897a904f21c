#include "layerctl/toy.hpp"

#include <quadmath.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "layerctl/errors.hpp"
#include "layerctl/quadrature.hpp"
#include "layerctl/smooth.hpp"

namespace layerctl::toy {

namespace {

inline double rsin(double x) { return std::sin(x); }
inline Real rsin(Real x) { return sinq(x); }
inline double rabs(double x) { return std::abs(x); }
inline Real rabs(Real x) { return fabsq(x); }
template <class R>
R rpi() {
    if constexpr (std::is_same_v<R, Real>) return M_PIq;
    else return std::numbers::pi;
}

std::size_t aligned_steps(double T, std::size_t nx) {
    const double s = T * static_cast<double>(nx);
    const double r = std::round(s);
    if (!(T >= 0.0) || std::abs(s - r) > 1e-9)
        throw PreconditionError("solve_toy: CFL alignment violated, T must be a multiple of dt = dx = 1/nx");
    return static_cast<std::size_t>(r);
}

template <class R>
struct Sim {
    std::size_t nx, nz, m;
    R dt, dz, a;
    std::vector<R> cp, den;  // Thomas factors of (I - a/2 L) on the interior
    std::vector<std::vector<R>> sines;  // sines[n-1][j]

    Sim(const ToyGrid& grid, std::size_t n_max) : nx(grid.nx), nz(grid.nz) {
        if (nx < 2 || nz < 4) throw PreconditionError("solve_toy: grid too small");
        dt = R(1) / R(static_cast<double>(nx));
        dz = R(1) / R(static_cast<double>(nz));
        const double ratio = static_cast<double>(nz * nz) / static_cast<double>(nx);
        m = grid.substeps > 0 ? grid.substeps : static_cast<std::size_t>(std::ceil(ratio - 1e-12));
        m = std::max<std::size_t>(m, 1);
        a = dt / R(static_cast<double>(m)) / (dz * dz);
        const std::size_t n = nz - 1;
        cp.assign(n, R(0));
        den.assign(n, R(0));
        const R diag = R(1) + a, off = -a / R(2);
        den[0] = diag;
        cp[0] = off / den[0];
        for (std::size_t j = 1; j < n; ++j) {
            den[j] = diag - off * cp[j - 1];
            cp[j] = off / den[j];
        }
        const R pi = rpi<R>();
        for (std::size_t k = 1; k <= std::max<std::size_t>(n_max, 1); ++k) {
            std::vector<R> s(nz + 1, R(0));
            for (std::size_t j = 1; j < nz; ++j)
                s[j] = rsin(pi * R(static_cast<double>(k * j)) / R(static_cast<double>(nz)));
            sines.push_back(std::move(s));
        }
    }

    double z(std::size_t j) const { return static_cast<double>(j) / static_cast<double>(nz); }

    /// One step of Crank-Nicolson substeps along the path x(t) = x_start + (t - t0).
    void diffuse(std::vector<R>& col, const Pollution& g, double x_start, double t0) const {
        const std::size_t n = nz - 1;
        std::vector<R> rhs(n);
        const double h = 1.0 / static_cast<double>(nx) / static_cast<double>(m);
        const R half = a / R(2), keep = R(1) - a, off = -a / R(2);
        for (std::size_t s = 0; s < m; ++s) {
            const double tb = t0 + static_cast<double>(s + 1) * h;
            const R gb = g.g ? R(g.g(tb, x_start + (tb - t0))) : R(0);
            for (std::size_t j = 1; j < nz; ++j) rhs[j - 1] = keep * col[j] + half * (col[j - 1] + col[j + 1]);
            rhs[0] += half * gb;
            rhs[0] = rhs[0] / den[0];
            for (std::size_t j = 1; j < n; ++j) rhs[j] = (rhs[j] - off * rhs[j - 1]) / den[j];
            for (std::size_t j = n - 1; j-- > 0;) rhs[j] -= cp[j] * rhs[j + 1];
            for (std::size_t j = 1; j < nz; ++j) col[j] = rhs[j - 1];
            col[0] = gb;
            col[nz] = R(0);
        }
    }

    std::vector<R> inlet(const Pollution& g, const Inlet& q, std::size_t k) const {
        const double t = static_cast<double>(k) / static_cast<double>(nx);
        std::vector<R> col(nz + 1, R(0));
        const double g0 = g.g ? g.g(t, 0.0) : 0.0;
        if (q.q) {
            const double q0 = q.q(t, 0.0), q1 = q.q(t, 1.0);
            if (std::abs(q0 - g0) > 1e-10 || std::abs(q1) > 1e-10) {
                std::ostringstream os;
                os << "solve_toy: incompatible corner data at t = " << t << " (q(t,0) = " << q0 << ", g(t,0) = " << g0
                   << ", q(t,1) = " << q1 << ")";
                throw PreconditionError(os.str());
            }
            for (std::size_t j = 1; j < nz; ++j) col[j] = R(q.q(t, z(j)));
        } else if (g0 != 0.0) {
            throw PreconditionError("solve_toy: incompatible corner data (no inlet but g(t,0) != 0)");
        }
        if (auto it = q.impulses.find(k); it != q.impulses.end()) {
            for (std::size_t mm = 0; mm < it->second.size(); ++mm) {
                const R amp = R(2) * it->second[mm];
                const R pi = rpi<R>();
                for (std::size_t j = 1; j < nz; ++j)
                    col[j] += amp * rsin(pi * R(static_cast<double>((mm + 1) * j)) / R(static_cast<double>(nz)));
            }
        }
        col[0] = R(g0);
        col[nz] = R(0);
        return col;
    }

    std::vector<R> modes(const std::vector<R>& col, std::size_t n_max) const {
        std::vector<R> out(n_max, R(0));
        for (std::size_t k = 0; k < n_max; ++k) {
            R s = R(0);
            for (std::size_t j = 1; j < nz; ++j) {
                const R lifted = col[j] - (R(1) - R(z(j))) * col[0];
                s += lifted * sines[k][j];
            }
            out[k] = s * dz;
        }
        return out;
    }
};

template <class R>
ToyRun run(const Pollution& g, const Inlet& q, const ToyGrid& grid, double T_end, const ToyOptions& opt,
           std::vector<std::vector<std::vector<R>>>* modes_out) {
    const Sim<R> sim(grid, opt.n_max);
    const std::size_t steps = aligned_steps(T_end, grid.nx);
    const std::size_t nx = grid.nx, nz = grid.nz;
    std::vector<std::vector<R>> cols(nx + 1, std::vector<R>(nz + 1, R(0)));
    cols[0] = sim.inlet(g, q, 0);

    ToyRun out;
    auto snapshot = [&](std::size_t k) {
        ToyState s;
        s.step = k;
        s.t = static_cast<double>(k) / static_cast<double>(nx);
        s.nx = nx;
        s.nz = nz;
        s.v.resize((nx + 1) * (nz + 1));
        std::vector<std::vector<R>> mq;
        for (std::size_t i = 0; i <= nx; ++i) {
            for (std::size_t j = 0; j <= nz; ++j) s.v[i * (nz + 1) + j] = static_cast<double>(cols[i][j]);
            auto md = sim.modes(cols[i], opt.n_max);
            std::vector<double> row;
            for (const R& x : md) row.push_back(static_cast<double>(x));
            s.modes.push_back(std::move(row));
            mq.push_back(std::move(md));
        }
        out.states.push_back(std::move(s));
        if (modes_out) modes_out->push_back(std::move(mq));
    };
    auto record_sup = [&](std::size_t k) {
        R m = R(0);
        for (const auto& c : cols)
            for (const R& v : c) m = std::max(m, rabs(v));
        out.times.push_back(static_cast<double>(k) / static_cast<double>(nx));
        out.sup_norm.push_back(static_cast<double>(m));
        out.sup_norm_q.push_back(static_cast<Real>(m));
    };
    auto wants = [&](std::size_t k) {
        return std::find(opt.snapshot_steps.begin(), opt.snapshot_steps.end(), k) != opt.snapshot_steps.end();
    };
    record_sup(0);
    if (wants(0) && steps > 0) snapshot(0);
    for (std::size_t k = 0; k < steps; ++k) {
        const double t0 = static_cast<double>(k) / static_cast<double>(nx);
        for (std::size_t i = nx; i >= 1; --i) {
            cols[i] = std::move(cols[i - 1]);
            sim.diffuse(cols[i], g, static_cast<double>(i - 1) / static_cast<double>(nx), t0);
        }
        cols[0] = sim.inlet(g, q, k + 1);
        record_sup(k + 1);
        if (wants(k + 1) && k + 1 < steps) snapshot(k + 1);
    }
    snapshot(steps);
    return out;
}

struct ModalFactors {
    std::vector<Real> r, den, lift;
};

/// Per-substep amplification r_n, the factor 1 + a mu_n / 2, and the discrete mode of (1 - z).
ModalFactors lifted_modes(const Sim<Real>& sim, std::size_t N) {
    ModalFactors f;
    for (std::size_t n = 1; n <= N; ++n) {
        const Real s = sinq(M_PIq * Real(static_cast<double>(n)) * sim.dz / Real(2));
        const Real mu = Real(4) * s * s;
        const Real d = Real(1) + sim.a * mu / Real(2);
        f.r.push_back((Real(1) - sim.a * mu / Real(2)) / d);
        f.den.push_back(d);
        Real l = Real(0);
        for (std::size_t j = 1; j < sim.nz; ++j)
            l += (Real(1) - Real(sim.z(j))) * sinq(M_PIq * Real(static_cast<double>(n * j)) / Real(static_cast<double>(sim.nz)));
        f.lift.push_back(l * sim.dz);
    }
    return f;
}

}  // namespace

Pollution make_pollution(double amplitude, double T, double x0, double x1, double ramp) {
    if (!(x1 > x0) || x0 < 0.0 || !(ramp > 0.0) || !(T > 2.0 * ramp))
        throw PreconditionError("make_pollution: invalid support");
    const double c = 0.5 * (x0 + x1), r = 0.5 * (x1 - x0);
    auto rho = [=](double x) { return smooth::bump((x - c) / r); };
    auto rho_d1 = [=](double x) {
        const double s = (x - c) / r;
        if (s * s >= 1.0) return 0.0;
        return smooth::bump(s) * (-2.0 * s / ((1.0 - s * s) * (1.0 - s * s))) / r;
    };
    auto S = [=](double t) { return smooth::step(t / ramp) * (1.0 - smooth::step((t - (T - ramp)) / ramp)); };
    auto S_d1 = [=](double t) {
        const double up = smooth::step(t / ramp), dn = 1.0 - smooth::step((t - (T - ramp)) / ramp);
        return smooth::step_d1(t / ramp) / ramp * dn - up * smooth::step_d1((t - (T - ramp)) / ramp) / ramp;
    };
    Pollution p;
    p.g = [=](double t, double x) { return amplitude * S(t) * rho(x); };
    p.g_t = [=](double t, double x) { return amplitude * S_d1(t) * rho(x); };
    p.g_x = [=](double t, double x) { return amplitude * S(t) * rho_d1(x); };
    return p;
}

Pollution zero_pollution() {
    Pollution p;
    p.g = [](double, double) { return 0.0; };
    p.g_t = p.g;
    p.g_x = p.g;
    return p;
}

ToyRun solve_toy(const Pollution& g, const Inlet& q, const ToyGrid& grid, double T_end, const ToyOptions& opt) {
    if (opt.precision == Precision::binary128) return run<Real>(g, q, grid, T_end, opt, nullptr);
    return run<double>(g, q, grid, T_end, opt, nullptr);
}

double lift_coefficient(int n) { return 1.0 / (static_cast<double>(n) * std::numbers::pi); }

double mode_evolution(int n, const std::function<double(double)>& g_star_d1, double q_star_n, double T_star,
                      double T) {
    if (n < 1) throw PreconditionError("mode_evolution: n must be >= 1");
    if (T < T_star) throw PreconditionError("mode_evolution: need T* <= T");
    const double lambda = static_cast<double>(n * n) * std::numbers::pi * std::numbers::pi;
    const double forced =
        g_star_d1 ? quad::adaptive([&](double t) { return std::exp(-lambda * (T - t)) * g_star_d1(t); }, T_star, T,
                                   1e-15)
                  : 0.0;
    return std::exp(-lambda * (T - T_star)) * q_star_n - lift_coefficient(n) * forced;
}

double exact_control_data(int n, const std::function<double(double)>& g_star_d1, double T_star, double T) {
    if (n < 1) throw PreconditionError("exact_control_data: n must be >= 1");
    if (T < T_star) throw PreconditionError("exact_control_data: need T* <= T");
    const double lambda = static_cast<double>(n * n) * std::numbers::pi * std::numbers::pi;
    // int e^{lambda t} g' = e^{lambda T} int e^{-lambda (T - t)} g'
    const double inner =
        g_star_d1 ? quad::adaptive([&](double t) { return std::exp(-lambda * (T - t)) * g_star_d1(t); }, T_star, T,
                                   1e-15)
                  : 0.0;
    if (inner == 0.0) return 0.0;
    if (lambda * T > 700.0) {
        const double logmag = lambda * T + std::log(std::abs(inner)) + std::log(lift_coefficient(n));
        std::ostringstream os;
        os << "exact_control_data: overflow guard, ln|q*_" << n << "| = " << logmag;
        throw OverflowGuardError(os.str(), logmag);
    }
    return lift_coefficient(n) * std::exp(lambda * T) * inner;
}

LowModeReport lowmode_control(int N, const Pollution& g, const ToyGrid& grid, double T, double window) {
    if (N < 0 || N > 8) throw PreconditionError("lowmode_control: N must be in [0, 8]");
    if (!(window > 0.0)) throw PreconditionError("lowmode_control: decay window must be positive");
    const std::size_t nx = grid.nx, nz = grid.nz;
    const std::size_t steps_T = aligned_steps(T, nx);
    const std::size_t steps_end =
        steps_T + std::max<std::size_t>(2, static_cast<std::size_t>(std::lround(window * static_cast<double>(nx))));
    const double T_end = static_cast<double>(steps_end) / static_cast<double>(nx);

    Inlet base;
    base.q = [&g](double t, double z) { return (1.0 - z) * (g.g ? g.g(t, 0.0) : 0.0); };

    ToyOptions opt;
    opt.precision = Precision::binary128;
    opt.n_max = static_cast<std::size_t>(std::max(N, 1));
    opt.snapshot_steps = {steps_T};
    const Sim<Real> sim(grid, opt.n_max);

    LowModeReport rep;
    rep.modes = N;
    rep.T = T;
    rep.decay_window = window;
    rep.mode_table = csv::Table({"n", "x_star", "mode_at_T", "target"});
    rep.decay_series = csv::Table({"t", "sup_norm"});
    rep.inlet = csv::Table({"t", "z", "q"});

    Inlet control = base;
    const auto f = lifted_modes(sim, static_cast<std::size_t>(N));
    for (std::size_t i = 1; i <= nx; ++i) {
        if (i > steps_T) {
            ++rep.excluded_slices;
            continue;
        }
        ++rep.controlled_slices;
        if (N == 0) continue;
        // Discrete sine vectors diagonalize the Crank-Nicolson step, so the relation is solved mode by mode:
        // the free response A_n is propagated modally and the inlet datum is -A_n / r_n^(substeps).
        const std::size_t k0 = steps_T - i;
        std::vector<Real> A(static_cast<std::size_t>(N), Real(0)), R(A.size(), Real(1));
        const double h = 1.0 / static_cast<double>(nx) / static_cast<double>(sim.m);
        for (std::size_t step = 0; step < i; ++step) {
            const double t0 = static_cast<double>(k0 + step) / static_cast<double>(nx);
            const double xs = static_cast<double>(step) / static_cast<double>(nx);
            double ga = g.g ? g.g(t0, xs) : 0.0;
            for (std::size_t s = 0; s < sim.m; ++s) {
                const double tb = t0 + static_cast<double>(s + 1) * h;
                const double gb = g.g ? g.g(tb, xs + (tb - t0)) : 0.0;
                const Real dg = Real(gb) - Real(ga);
                for (int n = 1; n <= N; ++n) {
                    const auto u = static_cast<std::size_t>(n - 1);
                    A[u] = f.r[u] * A[u] - f.lift[u] * dg / f.den[u];
                    R[u] *= f.r[u];
                }
                ga = gb;
            }
        }
        std::vector<Real> amp(A.size());
        for (std::size_t u = 0; u < A.size(); ++u) amp[u] = -A[u] / R[u];
        control.impulses[k0] = std::move(amp);
    }

    std::vector<std::vector<std::vector<Real>>> modes;
    const ToyRun runres = run<Real>(g, control, grid, T_end, opt, &modes);
    const auto& MT = modes.front();
    for (std::size_t i = 1; i <= nx && i <= steps_T; ++i)
        for (int n = 1; n <= N; ++n) {
            const double v = static_cast<double>(MT[i][static_cast<std::size_t>(n - 1)]);
            rep.max_residual = std::max(rep.max_residual, std::abs(v));
            rep.mode_table.add_row({static_cast<double>(n), static_cast<double>(i) / static_cast<double>(nx), v, 0.0});
        }

    std::vector<double> ts, ls;
    for (std::size_t k = steps_T; k < runres.times.size(); ++k) {
        rep.decay_series.add_row({runres.times[k], runres.sup_norm[k]});
        if (runres.sup_norm_q[k] > 0) {
            ts.push_back(runres.times[k]);
            ls.push_back(static_cast<double>(logq(runres.sup_norm_q[k])));
        }
    }
    if (ts.size() >= 2) rep.decay_rate = -quad::fit_line(ts, ls).slope;

    for (std::size_t k = 0; k <= steps_T; ++k) {
        const auto col = sim.inlet(g, control, k);
        const double t = static_cast<double>(k) / static_cast<double>(nx);
        for (std::size_t j = 0; j <= nz; ++j) {
            const double v = static_cast<double>(col[j]);
            rep.max_inlet = std::max(rep.max_inlet, std::abs(v));
            rep.inlet.add_row({t, sim.z(j), v});
        }
    }
    return rep;
}

}  // namespace layerctl::toy
