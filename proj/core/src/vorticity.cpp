#include <algorithm>
#include <array>
#include <cmath>
#include <limits>

#include "layerctl/curl_lift.hpp"
#include "layerctl/errors.hpp"
#include "layerctl/ode.hpp"
#include "layerctl/quadrature.hpp"
#include "layerctl/smooth.hpp"

namespace layerctl::lift {

InitialVelocity bump_vortex(Vec2 center, double radius, double amplitude) {
    if (!(radius > 0.0)) throw PreconditionError("bump_vortex: radius must be positive");
    // psi = A g(q), q = |x - c|^2 / R^2, g(q) = (1 - q)^6.
    auto derivs = [=](const Vec2& x, double& f1, double& f2, Vec2& d) {
        d = x - center;
        const double q = dot(d, d) / (radius * radius);
        if (q >= 1.0) {
            f1 = f2 = 0.0;
            return;
        }
        const double s = 1.0 - q;
        f1 = -6.0 * std::pow(s, 5);
        f2 = 30.0 * std::pow(s, 4);
    };
    InitialVelocity v;
    v.support_center = center;
    v.support_radius = radius;
    v.u = [=](const Vec2& x) {
        double f1, f2;
        Vec2 d;
        derivs(x, f1, f2, d);
        const Vec2 g = (amplitude * f1 * 2.0 / (radius * radius)) * d;
        return Vec2{g.y, -g.x};
    };
    v.omega = [=](const Vec2& x) {
        double f1, f2;
        Vec2 d;
        derivs(x, f1, f2, d);
        const double r2 = radius * radius;
        const double lap = f2 * 4.0 * dot(d, d) / (r2 * r2) + f1 * 4.0 / r2;
        return -amplitude * lap;
    };
    return v;
}

namespace {

using Path = std::array<double, 3>;

struct Backtrace {
    Vec2 x0;
    double log_jac = 0.0;  ///< -int_0^t sigma along the path
};

Backtrace backtrace(const ReferenceFlow& flow, double t, const Vec2& x, double tol) {
    if (t == 0.0) return {x, 0.0};
    ode::Options o;
    o.tol = tol;
    o.max_step = flow.T / 16.0;
    auto rhs = [&](double s, const Path& y, Path& dy) {
        const Vec2 p{y[0], y[1]};
        const Vec2 u = flow.velocity(s, p);
        dy[0] = u.x;
        dy[1] = u.y;
        dy[2] = flow.sigma0(s, p);
    };
    const Path y = ode::integrate(rhs, t, 0.0, Path{x.x, x.y, 0.0}, o);
    return {{y[0], y[1]}, y[2]};
}

/// Patch geometry: physical point of unit coordinates and the scalings of the lifted force.
struct PatchMap {
    Box box;
    bool flipped = false;
    Vec2 point(double X1, double X2) const {
        return {box.x0 + box.width() * X1, flipped ? box.y1 - box.height() * X2 : box.y0 + box.height() * X2};
    }
};

class Pieces {
public:
    Pieces(const InitialVelocity& u, const ReferenceFlow& flow, const Partition& part, double tol)
        : u_(u), flow_(flow), part_(part), tol_(tol) {}

    /// curl(eta_l u*) at x.
    double initial(std::size_t l, const Vec2& x) const {
        if (part_.bump(l, x) == 0.0) return 0.0;
        const double h = 1e-5;
        Vec2 grad;
        for (int j = 0; j < 2; ++j) {
            Vec2 e;
            e[j] = h;
            grad[j] = (part_.weight(l, x - 2.0 * e) - 8.0 * part_.weight(l, x - e) + 8.0 * part_.weight(l, x + e) -
                       part_.weight(l, x + 2.0 * e)) /
                      (12.0 * h);
        }
        const Vec2 uv = u_.u(x);
        return part_.weight(l, x) * u_.omega(x) + grad.x * uv.y - grad.y * uv.x;
    }

    bool touches(std::size_t l) const {
        const Ball& b = part_.balls[l];
        return norm(b.center - u_.support_center) < b.radius + u_.support_radius;
    }

    const ReferenceFlow& flow() const { return flow_; }
    const Partition& partition() const { return part_; }
    const InitialVelocity& velocity() const { return u_; }
    double tol() const { return tol_; }

private:
    const InitialVelocity& u_;
    const ReferenceFlow& flow_;
    const Partition& part_;
    double tol_;
};

/// Bounding box of the image at time t of ball l, padded.
Box ball_image(const Pieces& P, std::size_t l, double t) {
    const Ball& b = P.partition().balls[l];
    Box box{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
            std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
    for (int k = 0; k < 32; ++k) {
        const double a = 2.0 * 3.14159265358979323846 * k / 32.0;
        const Vec2 p = flow_map(P.flow(), 0.0, t, b.center + b.radius * Vec2{std::cos(a), std::sin(a)}, P.tol());
        box.x0 = std::min(box.x0, p.x);
        box.x1 = std::max(box.x1, p.x);
        box.y0 = std::min(box.y0, p.y);
        box.y1 = std::max(box.y1, p.y);
    }
    const double pad = 0.25 * b.radius;
    return {box.x0 - pad, box.x1 + pad, box.y0 - pad, box.y1 + pad};
}

double row_simpson(const std::vector<double>& f, std::size_t n, double h) {
    const std::size_t N = n + 1;
    std::vector<double> rows(N), row(N);
    for (std::size_t j = 0; j < N; ++j) {
        for (std::size_t i = 0; i < N; ++i) row[i] = f[j * N + i];
        rows[j] = quad::simpson(row, h);
    }
    return quad::simpson(rows, h);
}

}  // namespace

Vec2 piece_force(const VorticityPiece& p, std::size_t s, const Box& patch, const Vec2& x) {
    if (!patch.contains(x) || s >= p.lifts.size()) return {};
    const LiftResult2& r = p.lifts[s];
    const std::size_t n = r.n, N = n + 1;
    const double X1 = (x.x - patch.x0) / patch.width();
    const double X2 = p.flipped ? (patch.y1 - x.y) / patch.height() : (x.y - patch.y0) / patch.height();
    const double fx = std::clamp(X1, 0.0, 1.0) * static_cast<double>(n);
    const double fy = std::clamp(X2, 0.0, 1.0) * static_cast<double>(n);
    const std::size_t i = std::min(static_cast<std::size_t>(fx), n - 1);
    const std::size_t j = std::min(static_cast<std::size_t>(fy), n - 1);
    const double a = fx - static_cast<double>(i), b = fy - static_cast<double>(j);
    auto bil = [&](const std::vector<double>& g) {
        return (1 - a) * (1 - b) * g[j * N + i] + a * (1 - b) * g[j * N + i + 1] + (1 - a) * b * g[(j + 1) * N + i] +
               a * b * g[(j + 1) * N + i + 1];
    };
    const double s1 = p.flipped ? -patch.height() : patch.height();
    return {s1 * bil(r.xi1), patch.width() * bil(r.xi2)};
}

VorticityReport vorticity_patch_control(const InitialVelocity& u_star, const ReferenceFlow& flow,
                                        const Domain& domain, const Partition& partition,
                                        const VorticityOptions& opt) {
    if (opt.patch_grid < 8 || opt.patch_grid % 2 != 0)
        throw PreconditionError("vorticity_patch_control: patch_grid must be even and at least 8");
    if (opt.samples_per_window < 1) throw PreconditionError("vorticity_patch_control: need window samples");
    if (!(partition.window > 0.0)) throw PreconditionError("vorticity_patch_control: partition has no window");
    const Pieces P(u_star, flow, partition, opt.tol);
    const Box ext = domain.extended_box();
    const double eps = partition.window;
    const std::size_t n = opt.patch_grid, N = n + 1;
    const double h = 1.0 / static_cast<double>(n);

    VorticityReport rep;
    std::vector<std::size_t> active;
    for (std::size_t l = 0; l < partition.balls.size(); ++l)
        if (P.touches(l)) active.push_back(l);

    // Profile for removing the discrete mean of an inner patch field.
    std::vector<double> prof(N);
    for (std::size_t i = 0; i < N; ++i) prof[i] = smooth::c_step_d1(static_cast<double>(i) * h);
    const double prof_mass = quad::simpson(prof, h);
    for (double& v : prof) v /= prof_mass;

    for (std::size_t l : active) {
        VorticityPiece piece;
        piece.ball = l;
        piece.patch = partition.targets[l];
        piece.t_center = partition.times[l];
        piece.eps = eps;
        const Box& box = partition.patches[piece.patch];
        PatchMap map{box, false};
        double extent = 1.0;
        if (domain.is_wall(Side::bottom) && box.y0 < ext.y0 && box.y1 > ext.y0) {
            piece.kind = PatchKind::boundary;
            map.flipped = piece.flipped = true;
            extent = (box.y1 - ext.y0) / box.height();
        } else if (domain.is_wall(Side::top) && box.y0 < ext.y1 && box.y1 > ext.y1) {
            piece.kind = PatchKind::boundary;
            extent = (ext.y1 - box.y0) / box.height();
        }
        const Ball& ball = partition.balls[l];
        for (std::size_t s = 0; s < opt.samples_per_window; ++s) {
            const double t = piece.t_center - eps +
                             2.0 * eps * (static_cast<double>(s) + 0.5) / static_cast<double>(opt.samples_per_window);
            const double db = partition.beta_d1(l, t);
            const Box image = ball_image(P, l, t);
            PatchField2 f;
            f.n = n;
            f.kind = piece.kind;
            f.interior_extent = extent;
            f.values.assign(N * N, 0.0);
            double wmax = 0.0;
            for (std::size_t j = 0; j < N; ++j)
                for (std::size_t i = 0; i < N; ++i) {
                    const Vec2 x = map.point(static_cast<double>(i) * h, static_cast<double>(j) * h);
                    if (!image.contains(x) || !domain.in_extended(x)) continue;
                    const Backtrace bt = backtrace(flow, t, x, opt.tol);
                    if (norm(bt.x0 - ball.center) >= ball.radius) continue;
                    const double v = db * P.initial(l, bt.x0) * std::exp(bt.log_jac);
                    f.values[j * N + i] = v;
                    wmax = std::max(wmax, std::abs(v));
                }
            if (piece.kind == PatchKind::inner) {
                const double d = row_simpson(f.values, n, h);
                for (std::size_t j = 0; j < N; ++j)
                    for (std::size_t i = 0; i < N; ++i) f.values[j * N + i] -= d * prof[i] * prof[j];
                piece.mean_defect = std::max(piece.mean_defect, std::abs(d));
            }
            LiftResult2 lr = lift2d(f);
            piece.curl_error = std::max(piece.curl_error, curl_error(f, lr));
            piece.support_defect = std::max(piece.support_defect, lr.support_defect);
            piece.max_forcing = std::max(piece.max_forcing, wmax);
            piece.times.push_back(t);
            piece.lifts.push_back(std::move(lr));
        }
        rep.max_curl_error = std::max(rep.max_curl_error, piece.curl_error);
        rep.max_forcing = std::max(rep.max_forcing, piece.max_forcing);
        rep.pieces.push_back(std::move(piece));
    }

    // Forces sampled on a ring just outside each patch.
    for (const VorticityPiece& p : rep.pieces) {
        const Box& b = partition.patches[p.patch];
        const double d = 1e-9 + 0.01 * b.width();
        for (int k = 0; k <= 16; ++k) {
            const double s = k / 16.0;
            const Vec2 ring[4] = {{b.x0 - d, b.y0 + s * b.height()}, {b.x1 + d, b.y0 + s * b.height()},
                                  {b.x0 + s * b.width(), b.y0 - d}, {b.x0 + s * b.width(), b.y1 + d}};
            for (const Vec2& x : ring)
                for (std::size_t si = 0; si < p.times.size(); ++si)
                    rep.max_force_outside = std::max(rep.max_force_outside, norm(piece_force(p, si, b, x)));
        }
    }

    // Check points: the physical box, the extended box and the patch squares.
    std::vector<Vec2> checks;
    const std::size_t m = std::max<std::size_t>(opt.check_grid, 2);
    for (const Box& b : {domain.physical_box(), ext})
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t i = 0; i < m; ++i)
                checks.push_back({b.x0 + b.width() * static_cast<double>(i) / static_cast<double>(m - 1),
                                  b.y0 + b.height() * static_cast<double>(j) / static_cast<double>(m - 1)});
    for (const VorticityPiece& p : rep.pieces) {
        const Box& b = partition.patches[p.patch];
        for (std::size_t j = 0; j <= 10; ++j)
            for (std::size_t i = 0; i <= 10; ++i) {
                const Vec2 x{b.x0 + b.width() * static_cast<double>(i) / 10.0,
                             b.y0 + b.height() * static_cast<double>(j) / 10.0};
                if (domain.in_extended(x)) checks.push_back(x);
            }
    }

    // omega(t) = free transport of omega* + sum_l (beta_l(t) - 1) omega_bar_l(t).
    auto omega_at = [&](double t, const Vec2& x) {
        const Backtrace bt = backtrace(flow, t, x, opt.tol);
        double v = u_star.omega(bt.x0);
        for (const VorticityPiece& p : rep.pieces) {
            const Ball& b = partition.balls[p.ball];
            if (norm(bt.x0 - b.center) >= b.radius) continue;
            v += (partition.beta(p.ball, t) - 1.0) * P.initial(p.ball, bt.x0);
        }
        return v * std::exp(bt.log_jac);
    };

    rep.history = csv::Table({"t", "max_abs_omega"});
    const std::size_t steps = 20;
    for (std::size_t k = 0; k <= steps; ++k) {
        const double t = flow.T * static_cast<double>(k) / static_cast<double>(steps);
        double mx = 0.0;
        for (const Vec2& x : checks) mx = std::max(mx, std::abs(omega_at(t, x)));
        rep.history.add_row({t, mx});
        if (k == 0) rep.max_initial = mx;
        if (k == steps) rep.max_omega_T = mx;
    }

    // Characteristic ODE with the lifted forcing beta_l' omega_bar_l.
    using Lag = std::array<double, 4>;
    ode::Options o;
    o.tol = 1e-2 * opt.tol;
    o.max_step = eps / 8.0;
    for (const Vec2& x : checks) {
        const Backtrace bt = backtrace(flow, flow.T, x, opt.tol);
        std::vector<std::pair<std::size_t, double>> src;
        for (const VorticityPiece& p : rep.pieces) {
            const Ball& b = partition.balls[p.ball];
            if (norm(bt.x0 - b.center) < b.radius) src.emplace_back(p.ball, P.initial(p.ball, bt.x0));
        }
        auto rhs = [&](double t, const Lag& y, Lag& dy) {
            const Vec2 pt{y[0], y[1]};
            const Vec2 u = flow.velocity(t, pt);
            const double sigma = flow.sigma0(t, pt);
            dy[0] = u.x;
            dy[1] = u.y;
            dy[2] = sigma;
            double forcing = 0.0;
            for (const auto& [l, w0] : src) forcing += partition.beta_d1(l, t) * w0;
            dy[3] = -sigma * y[3] + forcing * std::exp(-y[2]);
        };
        const Lag y = ode::integrate(rhs, 0.0, flow.T, Lag{bt.x0.x, bt.x0.y, 0.0, u_star.omega(bt.x0)}, o);
        rep.max_omega_T_ode = std::max(rep.max_omega_T_ode, std::abs(y[3]));
    }
    return rep;
}

}  // namespace layerctl::lift
