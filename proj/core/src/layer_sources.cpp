#include <cmath>
#include <sstream>

#include "layerctl/errors.hpp"
#include "layerctl/layer.hpp"
#include "layerctl/smooth.hpp"

namespace layerctl::layer {

double ChiCutoff::operator()(const Domain& d, const Vec2& x) const {
    return 1.0 - smooth::step(d.phi(x) / eta);
}

Vec2 tangential(const Vec2& f, const Vec2& n) { return f - dot(f, n) * n; }

Vec2 navier_operator(const Vec2& f, const Mat2& grad, const Vec2& n, const Mat2& M) {
    const Mat2 D = 0.5 * (grad + transpose(grad));
    return tangential(D * n + M * f, n);
}

std::vector<double> support_chain(const ReferenceFlow& flow, const Domain& domain, double eta,
                                  const ChainOptions& opt) {
    std::vector<double> chain;
    double s = eta;
    for (int i = 0; i < 3; ++i) {
        s = support_growth(flow, domain, s, opt.samples, opt.time_grid);
        chain.push_back(s);
    }
    return chain;
}

ChiChoice choose_chi_width(const ReferenceFlow& flow, const Domain& domain, const ChainOptions& opt) {
    const double band = domain.eta_band();
    auto ok = [&](double eta) { return support_chain(flow, domain, eta, opt).back() <= band; };
    ChiChoice c;
    double hi = opt.safety * band;
    if (ok(hi)) {
        c.eta = hi;
    } else {
        double lo = 0.0;
        for (int it = 0; it < opt.iterations; ++it) {
            const double mid = 0.5 * (lo + hi);
            (ok(mid) ? lo : hi) = mid;
        }
        if (!(lo > 0.0)) throw PreconditionError("choose_chi_width: no positive width satisfies the support chain");
        c.eta = lo;
    }
    c.chain = support_chain(flow, domain, c.eta, opt);
    return c;
}

double flat_velocity(const VelocityFn& u, const Domain& domain, double t, const Vec2& x, double fallback_level) {
    auto quotient = [&](const Vec2& p) { return -dot(u(t, p), -domain.grad_phi(p)) / domain.phi(p); };
    const double phi = domain.phi(x);
    if (phi >= fallback_level) return quotient(x);
    // Move inward along grad phi to the levels s0 and 2 s0 and extrapolate linearly in phi.
    const Vec2 inward = domain.grad_phi(x);
    const double s0 = fallback_level;
    const Vec2 p1 = x + (s0 - phi) * inward;
    const Vec2 p2 = x + (2.0 * s0 - phi) * inward;
    const double q1 = quotient(p1), q2 = quotient(p2);
    const double l1 = domain.phi(p1), l2 = domain.phi(p2);
    return q1 + (phi - l1) * (q2 - q1) / (l2 - l1);
}

LayerSources assemble_layer_sources(const ReferenceFlow& flow, const Domain& domain, const FrictionFn& M,
                                    const ChiCutoff& chi, const SourceOptions& opt) {
    if (!(chi.eta > 0.0)) throw PreconditionError("assemble_layer_sources: chi width must be positive");
    if (opt.check_chain) {
        const auto chain = support_chain(flow, domain, chi.eta, opt.chain);
        if (chain.back() > domain.eta_band()) {
            std::ostringstream os;
            os << "assemble_layer_sources: chi support too large; S-chain " << chain[0] << ", " << chain[1] << ", "
               << chain[2] << " exceeds eta_band " << domain.eta_band();
            throw PreconditionError(os.str());
        }
    }
    // The closures share these copies read-only.
    auto dom = std::make_shared<const Domain>(domain);
    auto fl = std::make_shared<const ReferenceFlow>(flow);
    const FrictionFn friction = M ? M : FrictionFn([](const Vec2&) { return Mat2::zero(); });
    const ChiCutoff cut = chi;

    LayerSources s;
    s.chi_eta = chi.eta;
    s.T = flow.T;
    s.chi = [dom, cut](const Vec2& x) { return cut(*dom, x); };

    s.g0 = [dom, fl, friction, cut](double t, const Vec2& x) {
        const double c = cut(*dom, x);
        if (c == 0.0) return Vec2{};
        const Vec2 n = -dom->grad_phi(x);
        return 2.0 * c * navier_operator(fl->velocity(t, x), fl->gradient(t, x), n, friction(x));
    };

    s.B = [dom, fl](double t, const Vec2& x) {
        const Mat2 G = fl->gradient(t, x);
        const Vec2 n = -dom->grad_phi(x);
        const Mat2 gn = dom->grad_normal(x);  // gn(j, k) = d_k n_j
        const Vec2 a = gn * fl->velocity(t, x);
        return G - outer(n, transpose(G) * n) + outer(n, a);
    };

    s.u0_flat = [dom, fl, fb = opt.fallback_level](double t, const Vec2& x) {
        const ReferenceFlow* f = fl.get();
        return flat_velocity([f](double tt, const Vec2& p) { return f->velocity(tt, p); }, *dom, t, x, fb);
    };

    const VectorField g0 = s.g0;
    const MatrixField B = s.B;
    const ScalarField uflat = s.u0_flat;
    const double h = opt.fd_step;
    auto d4 = [h](const auto& f) {
        return (f(-2.0 * h) - 8.0 * f(-h) + 8.0 * f(h) - f(2.0 * h)) * (1.0 / (12.0 * h));
    };
    s.G0 = [g0, B, fl, d4](double t, const Vec2& x) {
        const Vec2 g = g0(t, x);
        const Vec2 dt = d4([&](double e) { return g0(t + e, x); });
        const Vec2 dx = d4([&](double e) { return g0(t, x + Vec2{e, 0.0}); });
        const Vec2 dy = d4([&](double e) { return g0(t, x + Vec2{0.0, e}); });
        const Vec2 u = fl->velocity(t, x);
        return dt - g + u.x * dx + u.y * dy + B(t, x) * g;
    };
    s.G0_tilde = [g0, uflat](double t, const Vec2& x) { return -uflat(t, x) * g0(t, x); };
    return s;
}

double kernel_g0_derivative(int k) {
    if (k < 0 || k % 2 == 1) return 0.0;
    const int m = k / 2;
    return 2.0 * (m % 2 == 0 ? 1.0 : -1.0) * std::tgamma(static_cast<double>(k) + 1.0);
}

double kernel_g1_derivative(int k) {
    if (k < 0 || k % 2 == 1) return 0.0;
    const int m = k / 2;
    return 2.0 * (m % 2 == 0 ? 1.0 : -1.0) * static_cast<double>(2 * m + 1) * std::tgamma(static_cast<double>(k) + 1.0);
}

}  // namespace layerctl::layer
