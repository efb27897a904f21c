#include "layerctl/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>

#include "layerctl/errors.hpp"

namespace layerctl::quad {

namespace {

Rule build_gl(std::size_t n) {
    Rule r;
    r.nodes.resize(n);
    r.weights.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                            (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= n; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) p0 = 1.0, p1 = x;
            dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        r.nodes[i] = x;
        r.weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
    return r;
}

// Kronrod 15 / Gauss 7 nodes and weights on [-1, 1].
constexpr double xgk[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                           0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                           0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                           0.207784955007898467600689403773245, 0.000000000000000000000000000000000};
constexpr double wgk[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                           0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                           0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                           0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double wg[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                          0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

void gk15(const std::function<double(double)>& f, double a, double b, double& result, double& err) {
    const double c = 0.5 * (a + b), hl = 0.5 * (b - a);
    const double fc = f(c);
    double rk = fc * wgk[7];
    double rg = fc * wg[3];
    for (int j = 0; j < 7; ++j) {
        const double dx = hl * xgk[j];
        const double s = f(c - dx) + f(c + dx);
        rk += wgk[j] * s;
        if (j % 2 == 1) rg += wg[j / 2] * s;
    }
    result = rk * hl;
    err = std::abs((rk - rg) * hl);
}

double adapt(const std::function<double(double)>& f, double a, double b, double tol, int depth) {
    double r = 0.0, e = 0.0;
    gk15(f, a, b, r, e);
    if (e <= tol || depth <= 0 || std::abs(b - a) < 1e-15 * (1.0 + std::abs(a))) return r;
    const double m = 0.5 * (a + b);
    return adapt(f, a, m, 0.5 * tol, depth - 1) + adapt(f, m, b, 0.5 * tol, depth - 1);
}

}  // namespace

const Rule& gauss_legendre(std::size_t n) {
    static std::mutex mtx;
    static std::map<std::size_t, Rule> cache;
    std::lock_guard lock(mtx);
    auto it = cache.find(n);
    if (it == cache.end()) it = cache.emplace(n, build_gl(n)).first;
    return it->second;
}

double composite_gl(const std::function<double(double)>& f, double a, double b,
                    std::size_t panels, std::size_t order) {
    const Rule& r = gauss_legendre(order);
    const double w = (b - a) / static_cast<double>(panels);
    double sum = 0.0;
    for (std::size_t p = 0; p < panels; ++p) {
        const double lo = a + static_cast<double>(p) * w;
        double s = 0.0;
        for (std::size_t i = 0; i < order; ++i) s += r.weights[i] * f(lo + 0.5 * w * (r.nodes[i] + 1.0));
        sum += 0.5 * w * s;
    }
    return sum;
}

double adaptive(const std::function<double(double)>& f, double a, double b, double tol,
                int max_depth) {
    if (a == b) return 0.0;
    return adapt(f, a, b, tol, max_depth);
}

void cumulative_simpson_strided(const double* f, std::size_t n, std::ptrdiff_t stride, double h,
                                double* out, std::ptrdiff_t out_stride) {
    if (n == 0) return;
    auto F = [&](std::size_t i) { return f[static_cast<std::ptrdiff_t>(i) * stride]; };
    auto O = [&](std::size_t i) -> double& { return out[static_cast<std::ptrdiff_t>(i) * out_stride]; };
    O(0) = 0.0;
    if (n == 1) return;
    if (n == 2) {
        O(1) = 0.5 * h * (F(0) + F(1));
        return;
    }
    for (std::size_t i = 2; i < n; i += 2)
        O(i) = O(i - 2) + h / 3.0 * (F(i - 2) + 4.0 * F(i - 1) + F(i));
    for (std::size_t i = 1; i < n; i += 2) {
        if (i + 1 < n)
            O(i) = O(i - 1) + h / 12.0 * (5.0 * F(i - 1) + 8.0 * F(i) - F(i + 1));
        else
            O(i) = O(i - 1) + h / 12.0 * (-F(i - 2) + 8.0 * F(i - 1) + 5.0 * F(i));
    }
}

std::vector<double> cumulative_simpson(const std::vector<double>& f, double h) {
    std::vector<double> out(f.size(), 0.0);
    cumulative_simpson_strided(f.data(), f.size(), 1, h, out.data(), 1);
    return out;
}

double simpson(const std::vector<double>& f, double h) {
    const std::size_t n = f.size();
    if (n < 2) return 0.0;
    if (n == 2) return 0.5 * h * (f[0] + f[1]);
    const std::size_t intervals = n - 1;
    std::size_t end = intervals % 2 == 0 ? n - 1 : n - 4;
    double s = 0.0;
    if (intervals == 3) end = 0;
    for (std::size_t i = 0; i + 2 <= end; i += 2) s += h / 3.0 * (f[i] + 4.0 * f[i + 1] + f[i + 2]);
    if (intervals % 2 == 1)
        s += 3.0 * h / 8.0 * (f[end] + 3.0 * f[end + 1] + 3.0 * f[end + 2] + f[end + 3]);
    return s;
}

double trapezoid(const std::vector<double>& f, double h) {
    if (f.size() < 2) return 0.0;
    double s = 0.5 * (f.front() + f.back());
    for (std::size_t i = 1; i + 1 < f.size(); ++i) s += f[i];
    return s * h;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("fit_line: need >= 2 paired samples");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) mx += x[i], my += y[i];
    mx /= n;
    my /= n;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    LineFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.slope * x[i] + fit.intercept);
        rss += r * r;
    }
    fit.residual_rms = std::sqrt(rss / n);
    return fit;
}

}  // namespace layerctl::quad
