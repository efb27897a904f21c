#include <array>
#include <cmath>
#include <numbers>
#include <sstream>

#include "layerctl/errors.hpp"
#include "layerctl/fields.hpp"
#include "layerctl/ode.hpp"
#include "layerctl/smooth.hpp"

namespace layerctl {

double Partition::bump(std::size_t l, const Vec2& x) const {
    const Ball& b = balls[l];
    const Vec2 d = x - b.center;
    const double q = 1.0 - dot(d, d) / (b.radius * b.radius);
    return q > 0.0 ? std::pow(q, 6) : 0.0;
}

std::vector<std::size_t> Partition::active(const Vec2& x) const {
    std::vector<std::size_t> out;
    for (std::size_t l = 0; l < balls.size(); ++l) {
        const Vec2 d = x - balls[l].center;
        if (dot(d, d) < balls[l].radius * balls[l].radius) out.push_back(l);
    }
    return out;
}

std::vector<double> Partition::weights(const Vec2& x) const {
    std::vector<double> w(balls.size(), 0.0);
    double sum = 0.0;
    for (std::size_t l : active(x)) {
        w[l] = bump(l, x);
        sum += w[l];
    }
    if (sum > 0.0)
        for (double& v : w) v /= sum;
    return w;
}

double Partition::weight(std::size_t l, const Vec2& x) const {
    const double own = bump(l, x);
    if (own == 0.0) return 0.0;
    double sum = 0.0;
    for (std::size_t k : active(x)) sum += bump(k, x);
    return own / sum;
}

double Partition::beta(std::size_t l, double t) const { return smooth::beta(t - times[l], window); }
double Partition::beta_d1(std::size_t l, double t) const { return smooth::beta_d1(t - times[l], window); }

namespace {

using State = std::array<double, 2>;

struct Cell {
    Box box;
    int depth = 0;
};

bool strictly_inside(const Box& b, const Vec2& p) {
    return p.x > b.x0 && p.x < b.x1 && p.y > b.y0 && p.y < b.y1;
}

/// Sampled positions of the ball's probe points on the observation grid.
std::vector<std::vector<Vec2>> probe_paths(const ReferenceFlow& flow, const Ball& ball,
                                           const std::vector<double>& times, std::size_t boundary_points,
                                           double tol) {
    std::vector<Vec2> probes{ball.center};
    for (std::size_t k = 0; k < boundary_points; ++k) {
        const double a = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(boundary_points);
        probes.push_back(ball.center + ball.radius * Vec2{std::cos(a), std::sin(a)});
    }
    ode::Options opt;
    opt.tol = tol;
    auto rhs = [&flow](double t, const State& y, State& dy) {
        const Vec2 u = flow.velocity(t, {y[0], y[1]});
        dy = {u.x, u.y};
    };
    std::vector<std::vector<Vec2>> paths;
    for (const Vec2& p : probes) {
        std::vector<Vec2> path{p};
        State y{p.x, p.y};
        for (std::size_t k = 1; k < times.size(); ++k) {
            y = ode::integrate(rhs, times[k - 1], times[k], y, opt);
            path.push_back({y[0], y[1]});
        }
        paths.push_back(std::move(path));
    }
    return paths;
}

}  // namespace

Partition build_partition(const ReferenceFlow& flow, const Domain& domain, const std::vector<Box>& patches,
                          double eps, const PartitionOptions& options) {
    if (!(eps > 0.0) || 2.0 * eps >= flow.T) throw PreconditionError("build_partition: need 0 < eps < T/2");
    if (patches.empty()) throw PreconditionError("build_partition: no target patches");
    if (!(options.coverage > 0.0 && options.coverage < 1.0))
        throw PreconditionError("build_partition: coverage must lie in (0, 1)");
    const Box& physical = domain.physical_box();
    for (const Box& p : patches)
        if (p.x0 < physical.x1 && p.x1 > physical.x0 && p.y0 < physical.y1 && p.y1 > physical.y0)
            throw PreconditionError("build_partition: patches must not meet the physical box");

    // Observation grid with window half-width spanning (window_samples - 1) / 2 steps.
    const std::size_t half = std::max<std::size_t>((options.window_samples - 1) / 2, 1);
    const double dt = eps / static_cast<double>(half);
    const auto n_steps = static_cast<std::size_t>(std::ceil(flow.T / dt - 1e-9));
    std::vector<double> times;
    for (std::size_t k = 0; k <= n_steps; ++k) times.push_back(std::min(flow.T, static_cast<double>(k) * dt));

    Partition part;
    part.patches = patches;
    part.window = eps;
    part.T = flow.T;

    const Box& ext = domain.extended_box();
    const double target = options.initial_radius * options.coverage * std::sqrt(2.0);
    const auto nx = static_cast<std::size_t>(std::max(1.0, std::ceil(ext.width() / target)));
    const auto ny = static_cast<std::size_t>(std::max(1.0, std::ceil(ext.height() / target)));
    std::vector<Cell> stack;
    for (std::size_t j = ny; j-- > 0;)
        for (std::size_t i = nx; i-- > 0;) {
            const double x0 = ext.x0 + ext.width() * static_cast<double>(i) / static_cast<double>(nx);
            const double x1 = ext.x0 + ext.width() * static_cast<double>(i + 1) / static_cast<double>(nx);
            const double y0 = ext.y0 + ext.height() * static_cast<double>(j) / static_cast<double>(ny);
            const double y1 = ext.y0 + ext.height() * static_cast<double>(j + 1) / static_cast<double>(ny);
            stack.push_back({{x0, x1, y0, y1}, 0});
        }

    while (!stack.empty()) {
        const Cell cell = stack.back();
        stack.pop_back();
        const Ball ball{cell.box.center(), 0.5 * std::hypot(cell.box.width(), cell.box.height()) / options.coverage};
        const auto paths = probe_paths(flow, ball, times, options.boundary_points, options.tol);
        bool found = false;
        for (std::size_t k = half; k + half < times.size() && !found; ++k) {
            const double tl = times[k];
            if (!(tl > eps && tl < flow.T - eps)) continue;
            for (std::size_t m = 0; m < patches.size() && !found; ++m) {
                bool ok = true;
                for (const auto& path : paths) {
                    for (std::size_t q = k - half; q <= k + half && ok; ++q)
                        ok = strictly_inside(patches[m], path[q]);
                    if (!ok) break;
                }
                if (ok) {
                    part.balls.push_back(ball);
                    part.times.push_back(tl);
                    part.targets.push_back(m);
                    found = true;
                }
            }
        }
        if (found) continue;
        if (cell.depth >= options.max_halvings) {
            std::ostringstream os;
            os << "build_partition: no admissible window for ball centered at (" << ball.center.x << ", "
               << ball.center.y << ") with radius " << ball.radius;
            throw PreconditionError(os.str());
        }
        const Vec2 c = cell.box.center();
        const Box& b = cell.box;
        stack.push_back({{c.x, b.x1, c.y, b.y1}, cell.depth + 1});
        stack.push_back({{b.x0, c.x, c.y, b.y1}, cell.depth + 1});
        stack.push_back({{c.x, b.x1, b.y0, c.y}, cell.depth + 1});
        stack.push_back({{b.x0, c.x, b.y0, c.y}, cell.depth + 1});
    }
    return part;
}

}  // namespace layerctl
