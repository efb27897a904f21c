#include <Eigen/Dense>

#include <cmath>
#include <sstream>

#include "control_engine.hpp"
#include "layerctl/errors.hpp"
#include "layerctl/smooth.hpp"

namespace layerctl::layer {

namespace {

Mat2 inverse(const Mat2& m) {
    const double det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
    if (det == 0.0 || !std::isfinite(det)) throw IntegrationError("control: singular propagator");
    return (1.0 / det) * Mat2{{m(1, 1), -m(0, 1), -m(1, 0), m(0, 0)}};
}

bool overlaps_interior(const Box& a, const Box& b) {
    return a.x0 < b.x1 && b.x0 < a.x1 && a.y0 < b.y1 && b.y0 < a.y1;
}

}  // namespace

// FastProfiles ----------------------------------------------------------------

FastProfiles::FastProfiles(int max_index) : J_(max_index) {
    if (max_index < 0 || max_index > 6) throw PreconditionError("FastProfiles: index must be in [0, 6]");
    const int n = J_ + 1;
    Eigen::MatrixXd A(n, n);
    for (int k = 0; k < n; ++k)
        for (int i = 0; i < n; ++i) A(k, i) = (k % 2 == 0 ? 1.0 : -1.0) * std::tgamma(k + i + 0.5);
    Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
    for (int j = 0; j < n; ++j) {
        Eigen::VectorXd e = Eigen::VectorXd::Zero(n);
        e(j) = 1.0;
        const Eigen::VectorXd c = lu.solve(e);
        c_.emplace_back(c.data(), c.data() + n);
    }
}

double FastProfiles::value(int j, double z) const {
    const auto& c = c_.at(static_cast<std::size_t>(j));
    const double z2 = z * z;
    double s = 0.0, p = 1.0;
    for (double ci : c) {
        s += ci * p;
        p *= z2;
    }
    return s * std::exp(-z2);
}

double FastProfiles::fourier_derivative(int j, int k) const {
    const auto& c = c_.at(static_cast<std::size_t>(j));
    double s = 0.0;
    for (std::size_t i = 0; i < c.size(); ++i) s += c[i] * std::tgamma(k + static_cast<double>(i) + 0.5);
    return (k % 2 == 0 ? 1.0 : -1.0) * s;
}

// ControlEngine ---------------------------------------------------------------

ControlEngine::ControlEngine(LayerSources sources, ReferenceFlow flow, Partition partition, int k_max,
                             MomentOptions opt)
    : sources_(std::move(sources)), flow_(std::move(flow)), partition_(std::move(partition)), k_max_(k_max),
      opt_(opt) {}

std::vector<detail::ActiveBall> ControlEngine::active_balls(const Vec2& x0) const {
    std::vector<detail::ActiveBall> out;
    for (std::size_t l : partition_.active(x0)) {
        const double w = partition_.weight(l, x0);
        if (w == 0.0) continue;
        detail::ActiveBall b;
        b.ball = l;
        b.weight = w;
        b.patch = partition_.patches[partition_.targets[l]];
        b.order_enabled.assign(static_cast<std::size_t>(k_max_ / 2) + 1, true);
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<Vec2> ControlEngine::coefficients(const Vec2& x0) const {
    const auto key = std::make_pair(x0.x, x0.y);
    {
        std::lock_guard lock(mutex_);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
    }
    const int top = k_max_ / 2;
    detail::LagrangianControl ctl;
    ctl.partition = &partition_;
    ctl.active = active_balls(x0);
    std::vector<Vec2> c;
    for (int p = 0; p <= top; ++p) {
        ctl.coeff.assign(static_cast<std::size_t>(p), std::nullopt);
        for (int q = 0; q < p; ++q) ctl.coeff[static_cast<std::size_t>(q)] = c[static_cast<std::size_t>(q)];
        const detail::PassLayout lay{p};
        auto y = detail::run_pass(sources_, flow_, ctl, p, 0.0, partition_.T, detail::initial_pass_state(x0, p),
                                  opt_.tol, max_step());
        const Vec2 Qsrc{y[lay.q(p)], y[lay.q(p) + 1]};
        c.push_back(ctl.active.empty() ? Vec2{} : inverse(detail::psi_at(y, lay.psi(p))) * Qsrc);
    }
    std::lock_guard lock(mutex_);
    cache_.emplace(key, c);
    return c;
}

Mat2 ControlEngine::propagator(const Vec2& x0, int p, double t) const {
    detail::LagrangianControl none;
    none.partition = &partition_;
    const detail::PassLayout lay{p};
    auto y = detail::run_pass(sources_, flow_, none, p, 0.0, t, detail::initial_pass_state(x0, p), opt_.tol,
                              max_step());
    return detail::psi_at(y, lay.psi(p));
}

detail::LagrangianControl ControlEngine::lagrangian_control(const Vec2& x0,
                                                            const std::vector<ControlSchedule::Piece>& pieces) const {
    detail::LagrangianControl ctl;
    ctl.partition = &partition_;
    ctl.active = active_balls(x0);
    const std::size_t orders = static_cast<std::size_t>(k_max_ / 2) + 1;
    std::vector<bool> used(orders, false);
    for (auto& b : ctl.active) {
        b.order_enabled.assign(orders, false);
        for (const auto& pc : pieces)
            if (pc.ball == b.ball && pc.order / 2 < static_cast<int>(orders)) {
                b.order_enabled[static_cast<std::size_t>(pc.order / 2)] = true;
                used[static_cast<std::size_t>(pc.order / 2)] = true;
            }
    }
    if (ctl.active.empty()) return ctl;
    const auto c = coefficients(x0);
    ctl.coeff.assign(orders, std::nullopt);
    for (std::size_t p = 0; p < orders; ++p)
        if (used[p]) ctl.coeff[p] = c[p];
    return ctl;
}

// ControlSchedule -------------------------------------------------------------

ControlSchedule::ControlSchedule(std::vector<Piece> pieces, std::shared_ptr<const ControlEngine> engine)
    : pieces_(std::move(pieces)), engine_(std::move(engine)) {
    if (!pieces_.empty() && !engine_) throw PreconditionError("ControlSchedule: pieces require an engine");
}

Vec2 ControlSchedule::evaluate_piece(std::size_t i, double t, const Vec2& x) const {
    const Piece& pc = pieces_.at(i);
    if (!(std::abs(t - pc.t_center) < pc.eps)) return {};
    const Partition& part = engine_->partition();
    if (!part.patches[pc.patch].contains(x)) return {};
    const double d = part.beta_d1(pc.ball, t);
    if (d == 0.0) return {};
    const Vec2 x0 = flow_map(engine_->flow(), t, 0.0, x, 1e-12);
    const double w = part.weight(pc.ball, x0);
    if (w == 0.0) return {};
    const auto c = engine_->coefficients(x0);
    const int p = pc.order / 2;
    return (d * w) * (engine_->propagator(x0, p, t) * c[static_cast<std::size_t>(p)]);
}

Vec2 ControlSchedule::evaluate(int order, double t, const Vec2& x) const {
    Vec2 s;
    for (std::size_t i = 0; i < pieces_.size(); ++i)
        if (pieces_[i].order == order) s += evaluate_piece(i, t, x);
    return s;
}

std::string ControlSchedule::manifest(std::size_t amplitude_grid) const {
    std::ostringstream os;
    os.precision(17);
    os << "schedule pieces=" << pieces_.size() << "\n";
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
        const Piece& pc = pieces_[i];
        os << "[piece " << i << "]\n";
        os << "ball = " << pc.ball << "\n";
        os << "window = " << pc.t_center - pc.eps << " " << pc.t_center + pc.eps << "\n";
        os << "order = " << pc.order << "\n";
        os << "profile = " << pc.profile << "\n";
        if (engine_) {
            const Box& b = engine_->partition().patches[pc.patch];
            os << "patch = " << pc.patch << " " << b.x0 << " " << b.x1 << " " << b.y0 << " " << b.y1 << "\n";
            if (amplitude_grid > 0) {
                os << "amplitude =";
                const double n = static_cast<double>(amplitude_grid);
                for (std::size_t jy = 0; jy < amplitude_grid; ++jy)
                    for (std::size_t jx = 0; jx < amplitude_grid; ++jx) {
                        const Vec2 x{b.x0 + (static_cast<double>(jx) + 0.5) * b.width() / n,
                                     b.y0 + (static_cast<double>(jy) + 0.5) * b.height() / n};
                        os << " " << norm(evaluate_piece(i, pc.t_center, x));
                    }
                os << "\n";
            }
        } else {
            os << "patch = " << pc.patch << "\n";
        }
    }
    return os.str();
}

// Synthesis -------------------------------------------------------------------

ControlSchedule synthesize_moment_control(const LayerSources& sources, const ReferenceFlow& flow,
                                          const Domain& domain, const Partition& partition, int k_max,
                                          const MomentOptions& opt) {
    if (k_max < 0) throw PreconditionError("synthesize_moment_control: k_max must be nonnegative");
    if (partition.balls.empty()) throw PreconditionError("synthesize_moment_control: empty partition");
    const double eps = partition.window;
    for (std::size_t l = 0; l < partition.balls.size(); ++l) {
        const double tl = partition.times[l];
        if (!(tl > eps && tl < partition.T - eps)) {
            std::ostringstream os;
            os << "synthesize_moment_control: window of ball " << l << " at t = " << tl << " leaves (0, T)";
            throw PreconditionError(os.str());
        }
    }
    for (std::size_t m = 0; m < partition.patches.size(); ++m)
        if (overlaps_interior(partition.patches[m], domain.physical_box()))
            throw PreconditionError("synthesize_moment_control: patch " + std::to_string(m) +
                                    " meets the physical domain");

    // No pollution means nothing to cancel.
    bool any = false;
    const auto mesh = domain.mesh(12, 12);
    for (int it = 0; it <= 16 && !any; ++it) {
        const double t = flow.T * it / 16.0;
        for (const auto& x : mesh)
            if (norm(sources.g0(t, x)) != 0.0 || norm(sources.G0(t, x)) != 0.0) {
                any = true;
                break;
            }
    }
    if (!any) return {};

    auto engine = std::make_shared<const ControlEngine>(sources, flow, partition, k_max - k_max % 2, opt);
    std::vector<ControlSchedule::Piece> pieces;
    for (std::size_t l = 0; l < partition.balls.size(); ++l)
        for (int k = 0; k <= k_max; k += 2)
            pieces.push_back({l, partition.times[l], eps, partition.targets[l], k, k / 2});
    return ControlSchedule(std::move(pieces), std::move(engine));
}

}  // namespace layerctl::layer
