#include <array>
#include <cmath>
#include <limits>
#include <sstream>

#include "layerctl/csv.hpp"
#include "layerctl/errors.hpp"
#include "layerctl/fields.hpp"
#include "layerctl/ode.hpp"

namespace layerctl {

namespace {

using State = std::array<double, 2>;

auto velocity_rhs(const ReferenceFlow& flow) {
    return [&flow](double t, const State& y, State& dy) {
        const Vec2 u = flow.velocity(t, {y[0], y[1]});
        dy[0] = u.x;
        dy[1] = u.y;
    };
}

void check_times(const ReferenceFlow& flow, double t, double s) {
    if (t < 0.0 || s < 0.0 || t > flow.T || s > flow.T)
        throw PreconditionError("integrate_flow: times must lie in [0, T]");
}

/// Positions at each grid time, integrating from start time index k0 both ways.
void sweep_from(const ReferenceFlow& flow, const std::vector<double>& times, std::size_t k0,
                const Vec2& x, double tol, std::vector<Vec2>& out) {
    ode::Options opt;
    opt.tol = tol;
    out.assign(times.size(), x);
    auto rhs = velocity_rhs(flow);
    State y{x.x, x.y};
    for (std::size_t k = k0 + 1; k < times.size(); ++k) {
        y = ode::integrate(rhs, times[k - 1], times[k], y, opt);
        out[k] = {y[0], y[1]};
    }
    y = {x.x, x.y};
    for (std::size_t k = k0; k-- > 0;) {
        y = ode::integrate(rhs, times[k + 1], times[k], y, opt);
        out[k] = {y[0], y[1]};
    }
}

}  // namespace

FlowResult integrate_flow(const ReferenceFlow& flow, double t, double s, const Vec2& x, double tol,
                          const Domain* domain) {
    check_times(flow, t, s);
    if (domain && !domain->in_extended(x)) throw DomainError("integrate_flow: start point outside the extended box");
    FlowResult r;
    r.sample.start = x;
    r.sample.trajectory.emplace_back(t, x);
    ode::Options opt;
    opt.tol = tol;
    ode::Stats stats;
    const State y = ode::integrate(
        velocity_rhs(flow), t, s, State{x.x, x.y}, opt,
        [&](double tt, const State& yy) { r.sample.trajectory.emplace_back(tt, Vec2{yy[0], yy[1]}); }, &stats);
    r.point = {y[0], y[1]};
    r.sample.step = stats.last_step;
    return r;
}

Vec2 flow_map(const ReferenceFlow& flow, double t, double s, const Vec2& x, double tol) {
    ode::Options opt;
    opt.tol = tol;
    const State y = ode::integrate(velocity_rhs(flow), t, s, State{x.x, x.y}, opt);
    return {y[0], y[1]};
}

Vec2 flow_map_fixed(const ReferenceFlow& flow, double t, double s, const Vec2& x, std::size_t steps) {
    const State y = ode::integrate_fixed(velocity_rhs(flow), t, s, State{x.x, x.y}, steps);
    return {y[0], y[1]};
}

FlushingReport verify_flushing(const ReferenceFlow& flow, const Domain& domain,
                               const std::vector<Vec2>& grid, double delta, double dt_obs, double tol) {
    if (!(delta > 0.0)) throw PreconditionError("verify_flushing: delta must be positive");
    if (!(dt_obs > 0.0)) throw PreconditionError("verify_flushing: observation step must be positive");
    FlushingReport rep;
    rep.observation_step = dt_obs;
    const auto steps = static_cast<std::size_t>(std::ceil(flow.T / dt_obs - 1e-12));
    ode::Options opt;
    opt.tol = tol;
    auto rhs = velocity_rhs(flow);
    for (const Vec2& x : grid) {
        FlowSample fs;
        fs.start = x;
        fs.step = dt_obs;
        fs.trajectory.emplace_back(0.0, x);
        if (!domain.in_extended(x)) {
            rep.samples.push_back(std::move(fs));
            ++rep.failures;
            continue;
        }
        State y{x.x, x.y};
        double t = 0.0;
        for (std::size_t k = 1; k <= steps; ++k) {
            const double tn = std::min(flow.T, static_cast<double>(k) * dt_obs);
            y = ode::integrate(rhs, t, tn, y, opt);
            t = tn;
            const Vec2 p{y[0], y[1]};
            fs.trajectory.emplace_back(t, p);
            if (domain.distance_to_physical(p) >= delta) {
                fs.exit_time = t;
                break;
            }
        }
        if (!fs.exit_time) ++rep.failures;
        rep.samples.push_back(std::move(fs));
    }
    rep.success = rep.failures == 0;
    return rep;
}

double support_growth(const ReferenceFlow& flow, const Domain& domain, double delta, std::size_t samples,
                      std::size_t time_grid, double tol) {
    if (delta < 0.0) throw PreconditionError("support_growth: delta must be nonnegative");
    if (time_grid < 2) throw PreconditionError("support_growth: time grid needs >= 2 points");
    const Box& box = domain.extended_box();
    std::vector<Vec2> seeds;
    const std::size_t n_along = std::max<std::size_t>(samples, 2);
    const std::size_t n_off = delta > 0.0 ? std::max<std::size_t>(samples / 4, 2) : 1;
    for (std::size_t i = 0; i < n_along; ++i) {
        const double xx = box.x0 + box.width() * static_cast<double>(i) / static_cast<double>(n_along - 1);
        for (std::size_t j = 0; j < n_off; ++j) {
            const double d = n_off == 1 ? 0.0 : delta * static_cast<double>(j) / static_cast<double>(n_off - 1);
            if (domain.is_wall(Side::bottom)) seeds.push_back({xx, box.y0 + d});
            if (domain.is_wall(Side::top)) seeds.push_back({xx, box.y1 - d});
        }
    }
    if (delta > domain.eta_band()) {
        for (const Vec2& p : domain.mesh(n_along, n_along))
            if (domain.phi(p) <= delta) seeds.push_back(p);
    }
    std::vector<double> times(time_grid);
    for (std::size_t k = 0; k < time_grid; ++k)
        times[k] = flow.T * static_cast<double>(k) / static_cast<double>(time_grid - 1);
    double sup = -std::numeric_limits<double>::infinity();
    std::vector<Vec2> pos;
    for (const Vec2& x : seeds) {
        for (std::size_t k0 = 0; k0 < time_grid; ++k0) {
            sweep_from(flow, times, k0, x, tol, pos);
            for (const Vec2& p : pos) sup = std::max(sup, domain.phi(p));
        }
    }
    return sup;
}

std::string trajectory_csv(const FlowSample& sample, const Domain& domain) {
    csv::Table table({"t", "x1", "x2", "phi"});
    for (const auto& [t, p] : sample.trajectory) table.add_row({t, p.x, p.y, domain.phi(p)});
    return table.to_string();
}

}  // namespace layerctl
