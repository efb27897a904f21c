#include <cmath>
#include <sstream>

#include "layerctl/errors.hpp"
#include "layerctl/layer.hpp"
#include "layerctl/quadrature.hpp"

namespace layerctl::layer {

namespace {

constexpr double fd_h = 1e-5;
constexpr double dz_h = 1e-3;

Mat2 layer_gradient(const LayerField& v, const Vec2& x, double z) {
    if (v.gradient) return v.gradient(x, z);
    Mat2 g;
    for (int j = 0; j < 2; ++j) {
        Vec2 e;
        e[j] = fd_h;
        const Vec2 d = (v.value(x - 2.0 * e, z) - 8.0 * v.value(x - e, z) + 8.0 * v.value(x + e, z) -
                        v.value(x + 2.0 * e, z)) *
                       (1.0 / (12.0 * fd_h));
        g(0, j) = d.x;
        g(1, j) = d.y;
    }
    return g;
}

Vec2 unit_normal_checked(const Domain& domain, const Vec2& x) {
    const Vec2 n = -domain.grad_phi(x);
    if (std::abs(norm(n) - 1.0) > 1e-9) {
        std::ostringstream os;
        os << "corrector: |n| = " << norm(n) << " at (" << x.x << ", " << x.y << ") on the support of v";
        throw DomainError(os.str());
    }
    return n;
}

bool supported_at(const LayerField& v, const Vec2& x) {
    for (double z : {0.0, 0.5, 1.0, 2.0, 4.0})
        if (norm(v.value(x, z)) != 0.0) return true;
    return false;
}

void check_tangential(const LayerField& v, const Vec2& x, const Vec2& n) {
    for (double z : {0.0, 0.5, 1.0, 2.0}) {
        const Vec2 val = v.value(x, z);
        if (std::abs(dot(val, n)) > 1e-8 * std::max(1.0, norm(val)))
            throw PreconditionError("corrector: v is not tangential");
    }
}

/// Fourth-order difference in z; one-sided near z = 0 so v is never sampled at negative z.
template <class F>
Vec2 dz4(const F& f, double z) {
    const double h = dz_h;
    if (z >= 2.0 * h) return (f(z - 2.0 * h) - 8.0 * f(z - h) + 8.0 * f(z + h) - f(z + 2.0 * h)) * (1.0 / (12.0 * h));
    return (-25.0 * f(z) + 48.0 * f(z + h) - 36.0 * f(z + 2.0 * h) + 16.0 * f(z + 3.0 * h) - 3.0 * f(z + 4.0 * h)) *
           (1.0 / (12.0 * h));
}

}  // namespace

double tail_integral(const std::function<double(double)>& f, double z, const TailOptions& opt) {
    const double zm = opt.z_max;
    double s = 0.0;
    if (z < zm) {
        const double span = zm - z;
        const auto panels = std::max<std::size_t>(1, static_cast<std::size_t>(
                                                         std::ceil(static_cast<double>(opt.panels) * span / zm)));
        s = quad::composite_gl(f, z, zm, panels, opt.order);
    }
    // Exponential tail beyond max(z, z_max) fitted from two samples.
    const double a = std::max(z, zm);
    const double f1 = f(a - 0.5), f2 = f(a);
    if (f1 != 0.0 && f2 != 0.0 && (f1 > 0.0) == (f2 > 0.0) && std::abs(f2) < std::abs(f1)) {
        const double lambda = std::log(f1 / f2) / 0.5;
        s += f2 / lambda;
    }
    return s;
}

Vec2 corrector_w_at(const LayerField& v, const Domain& domain, const FrictionFn& M, const Vec2& x, double z,
                    const TailOptions& opt) {
    if (!supported_at(v, x)) return {};
    const Vec2 n = unit_normal_checked(domain, x);
    const Mat2 m = M ? M(x) : Mat2::zero();
    const Vec2 N0 = navier_operator(v.value(x, 0.0), layer_gradient(v, x, 0.0), n, m);
    const double tail = tail_integral([&](double zz) { return layer_gradient(v, x, zz).trace(); }, z, opt);
    return -2.0 * std::exp(-z) * N0 - tail * n;
}

CorrectorW corrector_w(const LayerField& v, const Domain& domain, const FrictionFn& M, const std::vector<Vec2>& xs,
                       const std::vector<double>& zs, const TailOptions& opt) {
    CorrectorW out;
    out.xs = xs;
    out.zs = zs;
    for (const Vec2& x : xs) {
        std::vector<Vec2> wrow, drow;
        std::vector<double> divrow;
        const bool active = supported_at(v, x);
        Vec2 n{}, N0{};
        if (active) {
            n = unit_normal_checked(domain, x);
            check_tangential(v, x, n);
            N0 = navier_operator(v.value(x, 0.0), layer_gradient(v, x, 0.0), n, M ? M(x) : Mat2::zero());
        }
        out.navier_v0.push_back(N0);
        auto w_of = [&](double z) { return corrector_w_at(v, domain, M, x, z, opt); };
        for (double z : zs) {
            const Vec2 w = active ? w_of(z) : Vec2{};
            const Vec2 dw = active ? dz4(w_of, z) : Vec2{};
            const double div = active ? layer_gradient(v, x, z).trace() : 0.0;
            wrow.push_back(w);
            drow.push_back(dw);
            divrow.push_back(div);
            if (active) out.diverg_residual = std::max(out.diverg_residual, std::abs(dot(n, dw) - div));
        }
        if (active) {
            const Vec2 dw0 = dz4(w_of, 0.0);
            const Vec2 tan = dw0 - dot(dw0, n) * n;
            out.navier_residual = std::max(out.navier_residual, norm(N0 - 0.5 * tan));
        }
        out.w.push_back(std::move(wrow));
        out.dz_w.push_back(std::move(drow));
        out.div_v.push_back(std::move(divrow));
    }
    return out;
}

std::vector<std::vector<double>> layer_pressure_q(const LayerField& v, const ReferenceFlow& flow,
                                                  const Domain& domain, double t, const std::vector<Vec2>& xs,
                                                  const std::vector<double>& zs, const TailOptions& opt) {
    std::vector<std::vector<double>> q;
    for (const Vec2& x : xs) {
        std::vector<double> row;
        const Vec2 n = -domain.grad_phi(x);
        const Vec2 u = flow.velocity(t, x);
        const Mat2 gu = flow.gradient(t, x);
        auto integrand = [&](double z) {
            const Vec2 val = v.value(x, z);
            return dot(layer_gradient(v, x, z) * u + gu * val, n);
        };
        const double far = integrand(opt.z_max);
        if (std::abs(far) > 1e-12 * std::max(1.0, std::abs(integrand(0.0))))
            throw TruncationError("layer_pressure_q: integrand does not decay by z_max");
        for (double z : zs) row.push_back(-tail_integral(integrand, z, opt));
        q.push_back(std::move(row));
    }
    return q;
}

}  // namespace layerctl::layer
