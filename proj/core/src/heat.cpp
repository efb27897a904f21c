#include "layerctl/heat.hpp"

#include <cmath>
#include <limits>
#include <complex>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "layerctl/errors.hpp"
#include "layerctl/quadrature.hpp"

namespace layerctl::heat {

namespace {

constexpr double edge_tol = 1e-12;

/// Edge magnitude; values below the transform round-off floor (64 eps sum |f_j|) count as zero.
double edge_value(const ProfileZ& f) {
    double mass = 0.0;
    for (double v : f.values) mass += std::abs(v);
    const double e = std::max(std::abs(f.values.front()), std::abs(f.values.back()));
    return e <= 64.0 * std::numeric_limits<double>::epsilon() * mass ? 0.0 : e;
}

void check_grid(const ProfileZ& f) {
    const std::size_t n = f.size();
    if (n < 4 || (n & (n - 1)) != 0) throw PreconditionError("heat: grid size must be a power of two >= 4");
    if (!(f.L > 0.0)) throw PreconditionError("heat: truncation half-width must be positive");
}

/// Physicists' Hermite polynomial H_n(u).
double hermite(int n, double u) {
    double h0 = 1.0, h1 = 2.0 * u;
    if (n == 0) return h0;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * u * h1 - 2.0 * static_cast<double>(k) * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

std::vector<double> derivative(const ProfileZ& f, int order) {
    if (order == 0) return f.values;
    const std::size_t n = f.size();
    auto c = detail::r2c(f.values);
    const double dz = std::numbers::pi / f.L;
    const std::complex<double> I(0.0, 1.0);
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (k == n / 2 && order % 2 == 1) {
            c[k] = 0.0;
            continue;
        }
        c[k] *= std::pow(I * (dz * static_cast<double>(k)), order) / static_cast<double>(n);
    }
    return detail::c2r(std::move(c), n);
}

}  // namespace

ZGrid default_grid(double width, double t_max) {
    if (!(width > 0.0)) throw PreconditionError("heat: width must be positive");
    ZGrid g;
    g.L = 40.0 * width * std::max(1.0, std::sqrt(1.0 + 4.0 * t_max));
    g.N = 4096;
    while (2.0 * g.L / static_cast<double>(g.N) > 0.25 * width) g.N *= 2;
    return g;
}

double moment(const ProfileZ& f, int k) {
    check_grid(f);
    if (k < 0) throw PreconditionError("moment: order must be nonnegative");
    const double Lk = std::pow(f.L, k);
    if (Lk * edge_value(f) > edge_tol) {
        std::ostringstream os;
        os << "moment: truncation insufficient for k = " << k << " (edge value " << Lk * edge_value(f) << ")";
        throw TruncationError(os.str());
    }
    double s = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) s += std::pow(f.z(j), k) * f.values[j];
    return s * f.h();
}

MomentVector moments(const ProfileZ& f, int k_max) {
    MomentVector m;
    for (int k = 0; k <= k_max; ++k) m.push_back(moment(f, k));
    return m;
}

double weighted_norm(const ProfileZ& f, int s, int n) {
    check_grid(f);
    if (s < 0 || s > 4) throw PreconditionError("weighted_norm: derivative order must be in [0, 4]");
    if (n < 0) throw PreconditionError("weighted_norm: weight exponent must be nonnegative");
    const double w_edge = std::pow(1.0 + f.L * f.L, 0.5 * n);
    if (w_edge * edge_value(f) > edge_tol) {
        std::ostringstream os;
        os << "weighted_norm: truncation insufficient for weight n = " << n;
        throw TruncationError(os.str());
    }
    double total = 0.0;
    for (int a = 0; a <= s; ++a) {
        const auto d = derivative(f, a);
        double acc = 0.0;
        for (std::size_t j = 0; j < d.size(); ++j) {
            const double z = f.z(j);
            acc += std::pow(1.0 + z * z, n) * d[j] * d[j];
        }
        total += acc * f.h();
    }
    return std::sqrt(total);
}

ProfileZ make_vanishing_moment_data(int n, double width, std::optional<ZGrid> grid) {
    if (n < 0 || n > 8) throw PreconditionError("make_vanishing_moment_data: n must be in [0, 8]");
    const ZGrid g = grid ? *grid : default_grid(width);
    const double sign = n % 2 == 0 ? 1.0 : -1.0;
    const double scale = sign / std::pow(width, n);
    return sample(
        [&](double z) {
            const double u = z / width;
            return scale * hermite(n, u) * std::exp(-u * u);
        },
        g, n % 2 == 0 ? Parity::even : Parity::odd);
}

double profile_width(const ProfileZ& f) {
    double m0 = 0.0, m2 = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
        const double a = std::abs(f.values[j]);
        const double z = f.z(j);
        m0 += a;
        m2 += z * z * a;
    }
    return m0 > 0.0 ? std::sqrt(2.0 * m2 / m0) : 0.0;
}

ProfileZ heat_evolve(const ProfileZ& f0, double t) {
    check_grid(f0);
    if (t < 0.0) throw PreconditionError("heat_evolve: time must be nonnegative");
    const double w = profile_width(f0);
    const double spread = std::sqrt(w * w + 4.0 * t);
    if (spread > 0.25 * f0.L) {
        std::ostringstream os;
        os << "heat_evolve: spread " << spread << " exceeds L/4 = " << 0.25 * f0.L;
        throw TruncationError(os.str());
    }
    ProfileZ out = f0;
    if (t == 0.0) return out;
    const std::size_t N = f0.size();
    const std::size_t M = N / 2;
    const double dz = std::numbers::pi / f0.L;
    auto decay = [&](std::size_t k) {
        const double zeta = dz * static_cast<double>(k);
        return std::exp(-t * zeta * zeta);
    };

    switch (f0.parity) {
    case Parity::even: {
        std::vector<double> r(M + 1);
        for (std::size_t k = 0; k < M; ++k) r[k] = f0.values[M + k];
        r[M] = f0.values[0];
        detail::r2r(r, FFTW_REDFT00);
        for (std::size_t k = 0; k <= M; ++k) r[k] *= decay(k) / (2.0 * static_cast<double>(M));
        detail::r2r(r, FFTW_REDFT00);
        out.values[M] = r[0];
        out.values[0] = r[M];
        for (std::size_t k = 1; k < M; ++k) out.values[M + k] = out.values[M - k] = r[k];
        break;
    }
    case Parity::odd: {
        std::vector<double> r(M - 1);
        for (std::size_t k = 0; k + 1 < M; ++k) r[k] = f0.values[M + k + 1];
        detail::r2r(r, FFTW_RODFT00);
        for (std::size_t k = 0; k + 1 < M; ++k) r[k] *= decay(k + 1) / (2.0 * static_cast<double>(M));
        detail::r2r(r, FFTW_RODFT00);
        out.values[M] = 0.0;
        out.values[0] = 0.0;
        for (std::size_t k = 0; k + 1 < M; ++k) {
            out.values[M + k + 1] = r[k];
            out.values[M - k - 1] = -r[k];
        }
        break;
    }
    case Parity::none: {
        auto c = detail::r2c(f0.values);
        for (std::size_t k = 0; k < c.size(); ++k) c[k] *= decay(k) / static_cast<double>(N);
        out.values = detail::c2r(std::move(c), N);
        break;
    }
    }
    return out;
}

std::vector<double> geometric_ladder(double t0, double t1, std::size_t n) {
    if (!(t0 > 0.0) || !(t1 > t0) || n < 2) throw PreconditionError("geometric_ladder: need 0 < t0 < t1, n >= 2");
    std::vector<double> out(n);
    const double r = std::log(t1 / t0);
    for (std::size_t i = 0; i < n; ++i)
        out[i] = t0 * std::exp(r * static_cast<double>(i) / static_cast<double>(n - 1));
    out.back() = t1;
    return out;
}

DecayFit verify_decay(const ProfileZ& f0, int n, int m, int s, const std::vector<double>& times) {
    if (m < 0 || m > n) throw PreconditionError("verify_decay: need 0 <= m <= n");
    if (times.size() < 3) throw PreconditionError("verify_decay: ladder needs at least 3 times");
    for (int k = 0; k < n; ++k) {
        double scale = 0.0;
        for (std::size_t j = 0; j < f0.size(); ++j) scale += std::pow(std::abs(f0.z(j)), k) * std::abs(f0.values[j]);
        scale *= f0.h();
        const double mk = moment(f0, k);
        if (std::abs(mk) > 1e-8 * std::max(1.0, scale)) {
            std::ostringstream os;
            os << "verify_decay: moment " << k << " = " << mk << " does not vanish";
            throw PreconditionError(os.str());
        }
    }
    DecayFit fit;
    fit.exponent = 0.25 + 0.5 * n - 0.5 * m;
    fit.times = times;
    std::vector<double> lx, lg, ly;
    for (double t : times) {
        const double v = weighted_norm(heat_evolve(f0, t), s, m);
        fit.norms.push_back(v);
        lx.push_back(std::log(2.0 + t));
        lg.push_back(std::log(std::log(2.0 + t) / (2.0 + t)));
        ly.push_back(std::log(v));
    }
    fit.slope = -quad::fit_line(lx, ly).slope;
    fit.log_model_slope = quad::fit_line(lg, ly).slope;

    std::vector<double> base;
    for (double t : times) base.push_back(std::pow(std::log(2.0 + t) / (2.0 + t), fit.exponent));
    fit.C_fit = std::max(fit.norms[0] / base[0], fit.norms[1] / base[1]);
    fit.bound_ok = true;
    for (std::size_t i = 0; i < times.size(); ++i) {
        fit.model.push_back(fit.C_fit * base[i]);
        fit.ratio.push_back(fit.norms[i] / fit.model[i]);
        if (fit.norms[i] > 1.05 * fit.C_fit * base[i]) fit.bound_ok = false;
    }
    return fit;
}

csv::Table decay_table(const DecayFit& fit) {
    csv::Table t({"t", "norm", "model", "ratio"});
    for (std::size_t i = 0; i < fit.times.size(); ++i)
        t.add_row({fit.times[i], fit.norms[i], fit.model[i], fit.ratio[i]});
    return t;
}

std::vector<double> time_integral_partial_sums(const ProfileZ& f0, int s, int m, const std::vector<double>& times) {
    std::vector<double> sums;
    double acc = 0.0;
    double prev_t = times.front();
    double prev_v = weighted_norm(heat_evolve(f0, prev_t), s, m);
    for (std::size_t i = 1; i < times.size(); ++i) {
        const double v = weighted_norm(heat_evolve(f0, times[i]), s, m);
        acc += 0.5 * (times[i] - prev_t) * (v + prev_v);
        sums.push_back(acc);
        prev_t = times[i];
        prev_v = v;
    }
    return sums;
}

}  // namespace layerctl::heat
