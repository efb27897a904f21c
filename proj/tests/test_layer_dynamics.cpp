#include <cmath>
#include <complex>
#include <numbers>

#include "doctest.h"
#include "layerctl/errors.hpp"
#include "layerctl/layer.hpp"
#include "layerctl/quadrature.hpp"

using namespace layerctl;
using namespace layerctl::layer;

namespace {

constexpr double pi = std::numbers::pi;

Domain channel() { return Domain::strip({0.0, 1.0, 0.0, 1.0}, {-0.05, 2.3, 0.0, 1.0}); }
ReferenceFlow uniform() { return make_reference_flow("uniform-channel", {{"T", 1.0}, {"displacement", 1.2}}); }

/// k-th derivative at 0 through the Cauchy integral on |z| = r (trapezoid rule, spectrally accurate).
template <class F>
double cauchy_derivative(F f, int k, double r = 0.5, int m = 256) {
    std::complex<double> s = 0.0;
    for (int j = 0; j < m; ++j) {
        const double th = 2.0 * pi * j / m;
        const std::complex<double> z = std::polar(r, th);
        s += f(z) * std::polar(1.0, -k * th);
    }
    return std::real(s) / m * std::tgamma(k + 1.0) / std::pow(r, k);
}

LayerField wall_field(double sign_top) {
    // Tangential near the bottom wall (sign_top = 0) or the top wall (sign_top = 1).
    LayerField v;
    v.value = [sign_top](const Vec2& x, double z) {
        const double y = sign_top ? 1.0 - x.y : x.y;
        return Vec2{std::cos(2.0 * x.x) * (1.0 + y * y) * z * std::exp(-z * z), 0.0};
    };
    v.gradient = [sign_top](const Vec2& x, double z) {
        const double y = sign_top ? 1.0 - x.y : x.y;
        const double dy = sign_top ? -1.0 : 1.0;
        const double p = z * std::exp(-z * z);
        Mat2 m;
        m(0, 0) = -2.0 * std::sin(2.0 * x.x) * (1.0 + y * y) * p;
        m(0, 1) = std::cos(2.0 * x.x) * 2.0 * y * dy * p;
        return m;
    };
    return v;
}

}  // namespace

TEST_CASE("fast profiles have unit Fourier derivatives on the diagonal") {
    const FastProfiles fp(3);
    for (int j = 0; j <= 3; ++j)
        for (int k = 0; k <= 3; ++k) {
            const double closed = fp.fourier_derivative(j, k);
            // d^{2k} hat(phi)(0) = (-1)^k int z^{2k} phi(z) dz
            const double q = (k % 2 ? -1.0 : 1.0) *
                             quad::adaptive([&](double z) { return std::pow(z, 2 * k) * fp.value(j, z); }, -14.0, 14.0, 1e-13);
            CHECK(closed == doctest::Approx(j == k ? 1.0 : 0.0).scale(1.0).epsilon(1e-9));
            CHECK(q == doctest::Approx(j == k ? 1.0 : 0.0).scale(1.0).epsilon(1e-8));
        }
    CHECK_THROWS_AS(FastProfiles(7), PreconditionError);
}

TEST_CASE("rational kernel derivatives match the Cauchy integral") {
    for (int k = 0; k <= 8; ++k) {
        const double g0 = cauchy_derivative([](std::complex<double> z) { return 2.0 / (1.0 + z * z); }, k);
        const double g1 =
            cauchy_derivative([](std::complex<double> z) { return 2.0 * (1.0 - z * z) / ((1.0 + z * z) * (1.0 + z * z)); }, k);
        CHECK(kernel_g0_derivative(k) == doctest::Approx(g0).scale(1.0).epsilon(1e-9));
        CHECK(kernel_g1_derivative(k) == doctest::Approx(g1).scale(1.0).epsilon(1e-9));
    }
}

TEST_CASE("navier operator by hand") {
    // grad u = [[0, 1], [0, 0]]: D = [[0, 1/2], [1/2, 0]]; n = (0, -1): D n = (-1/2, 0).
    Mat2 g;
    g(0, 1) = 1.0;
    const Vec2 n{0.0, -1.0};
    const Vec2 r = navier_operator({2.0, 0.0}, g, n, 0.5 * Mat2::identity());
    CHECK(r.x == doctest::Approx(-0.5 + 1.0));
    CHECK(r.y == 0.0);
    CHECK(tangential({3.0, 4.0}, n).y == 0.0);
}

TEST_CASE("chi cutoff is one on the wall and zero beyond eta") {
    const Domain d = channel();
    const ChiCutoff chi{0.1};
    CHECK(chi(d, {0.5, 0.0}) == 1.0);
    CHECK(chi(d, {0.5, 1.0}) == doctest::Approx(1.0));
    CHECK(chi(d, {0.5, 0.1}) == 0.0);
    CHECK(chi(d, {0.5, 0.5}) == 0.0);
    const double mid = chi(d, {0.5, 0.05});
    CHECK(mid > 0.0);
    CHECK(mid < 1.0);
}

TEST_CASE("chi width for a wall-parallel flow hits the safety cap") {
    const auto c = choose_chi_width(uniform(), channel());
    CHECK(c.eta == doctest::Approx(0.75 * 0.2));
    REQUIRE(c.chain.size() == 3);
    for (double s : c.chain) CHECK(s == doctest::Approx(c.eta).epsilon(1e-9));
}

TEST_CASE("flat velocity extrapolates to the wall") {
    const Domain d = channel();
    const double a = 0.7;
    VelocityFn u = [a](double, const Vec2& x) { return Vec2{1.0, -a * x.y}; };
    for (double y : {0.0, 1e-6, 0.05}) CHECK(flat_velocity(u, d, 0.0, {0.3, y}) == doctest::Approx(-a).epsilon(1e-9));
}

TEST_CASE("layer sources: g0 is tangential and cut off away from the walls") {
    const Domain d = channel();
    const auto flow = uniform();
    const auto s = assemble_layer_sources(flow, d, [](const Vec2&) { return 0.5 * Mat2::identity(); }, ChiCutoff{0.15});
    // Uniform flow: D(u) = 0, so g0 = 2 chi M u0 on the wall.
    const Vec2 g = s.g0(0.5, {0.4, 0.0});
    CHECK(g.x == doctest::Approx(2.0 * 0.5 * channel_profile(0.5, 1.0, 1.2)));
    CHECK(g.y == 0.0);
    CHECK(norm(s.g0(0.5, {0.4, 0.5})) == 0.0);
    CHECK(norm(s.g0(0.0, {0.4, 0.0})) == 0.0);
}

TEST_CASE("tail integral against closed forms") {
    for (double z : {0.0, 0.5, 2.0, 5.0}) {
        CHECK(tail_integral([](double s) { return std::exp(-s * s); }, z) ==
              doctest::Approx(0.5 * std::sqrt(pi) * std::erfc(z)).epsilon(1e-12).scale(1e-300));
        CHECK(tail_integral([](double s) { return std::exp(-s); }, z) == doctest::Approx(std::exp(-z)).epsilon(1e-11));
    }
    // Slow tail beyond z_max is recovered by the exponential correction.
    TailOptions o;
    o.z_max = 10.0;
    CHECK(tail_integral([](double s) { return std::exp(-0.5 * s); }, 0.0, o) == doctest::Approx(2.0).epsilon(1e-10));
}

TEST_CASE("corrector identities for manufactured layer fields") {
    const Domain d = channel();
    const auto M = [](const Vec2&) { return 0.3 * Mat2::identity(); };
    std::vector<double> zs;
    for (int j = 0; j <= 20; ++j) zs.push_back(0.3 * j);
    for (double top : {0.0, 1.0}) {
        std::vector<Vec2> xs;
        for (int i = 0; i < 5; ++i) xs.push_back({0.2 + 0.4 * i, top ? 0.97 : 0.02});
        const auto c = corrector_w(wall_field(top), d, M, xs, zs);
        CHECK(c.diverg_residual <= 1e-10);
        CHECK(c.navier_residual <= 1e-10);
        // w decays: the tail and e^{-z} both vanish at large z.
        for (const auto& row : c.w) CHECK(norm(row.back()) < 1e-6);
    }
}

TEST_CASE("corrector refuses a normal layer field") {
    LayerField v;
    v.value = [](const Vec2&, double z) { return Vec2{0.0, std::exp(-z)}; };
    CHECK_THROWS_AS(corrector_w(v, channel(), nullptr, {{0.5, 0.0}}, {0.0, 1.0}), PreconditionError);
}

TEST_CASE("layer pressure vanishes for a wall-parallel flow and tangential field") {
    const auto q = layer_pressure_q(wall_field(0.0), uniform(), channel(), 0.5, {{0.3, 0.0}, {0.8, 0.05}}, {0.0, 1.0});
    for (const auto& row : q)
        for (double v : row) CHECK(std::abs(v) <= 1e-12);
}

TEST_CASE("solve_theta: second-order manufactured convergence and compatibility") {
    const Box box{0.0, 2.0, -1.0, 1.0};
    // theta = cos(pi x / 2) sin(pi y / 2) + x^2 y: flux data from the exact normal derivative.
    auto theta = [](const Vec2& x) { return std::cos(pi * x.x / 2) * std::sin(pi * x.y / 2) + x.x * x.x * x.y; };
    auto grad = [](const Vec2& x) {
        return Vec2{-pi / 2 * std::sin(pi * x.x / 2) * std::sin(pi * x.y / 2) + 2 * x.x * x.y,
                    pi / 2 * std::cos(pi * x.x / 2) * std::cos(pi * x.y / 2) + x.x * x.x};
    };
    auto source = [](const Vec2& x) {
        return pi * pi / 2 * std::cos(pi * x.x / 2) * std::sin(pi * x.y / 2) - 2 * x.y;
    };
    auto flux = [grad](const Vec2& x, const Vec2& n) { return -dot(grad(x), n); };
    std::vector<double> err;
    for (std::size_t n : {17, 33, 65}) {
        const auto s = solve_theta(box, n, n, source, flux, 1e-2);
        double wsum = 0.0, m = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                const double w = (i == 0 || i + 1 == n ? 0.5 : 1.0) * (j == 0 || j + 1 == n ? 0.5 : 1.0);
                wsum += w;
                m += w * theta({box.x0 + i * s.hx, box.y0 + j * s.hy});
            }
        m /= wsum;
        double e = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                e = std::max(e, std::abs(s.at(i, j) - s.mean - theta({box.x0 + i * s.hx, box.y0 + j * s.hy}) + m));
        err.push_back(e);
        CHECK(s.residual <= 1e-8);
    }
    CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.1));
    CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("solve_theta rejects incompatible data with the defect") {
    try {
        (void)solve_theta({0, 1, 0, 1}, 9, 9, [](const Vec2&) { return 1.0; }, [](const Vec2&, const Vec2&) { return 0.0; });
        FAIL("expected DefectError");
    } catch (const DefectError& e) {
        CHECK(e.defect() == doctest::Approx(1.0));
    }
    CHECK_THROWS_AS(solve_theta({0, 1, 0, 1}, 2, 9, nullptr, nullptr), PreconditionError);
}

TEST_CASE("moment control cancels Q0 and Q2 on a small cloud") {
    const Domain d = channel();
    const auto flow = uniform();
    const auto chi = choose_chi_width(flow, d);
    const auto src = assemble_layer_sources(flow, d, [](const Vec2&) { return 0.5 * Mat2::identity(); }, {chi.eta});
    std::vector<Box> patches;
    for (double x = 1.1; x <= 2.3 + 1e-9; x += 0.15)
        for (double y = -0.15; y <= 0.85 + 1e-9; y += 0.15) patches.push_back({x, x + 0.3, y, y + 0.3});
    const Partition part = build_partition(flow, d, patches, 0.05);
    const auto sched = synthesize_moment_control(src, flow, d, part, 2);
    std::vector<Vec2> cloud{{0.0, 0.02}, {0.5, 0.1}, {0.9, 0.95}, {1.5, 0.0}};
    const auto unc = evolve_moments(src, flow, ControlSchedule{}, 2, cloud, 1.0);
    const auto ctl = evolve_moments(src, flow, sched, 2, cloud, 1.0);
    CHECK(unc.max_abs(0) > 1e-3);
    CHECK(ctl.max_abs(0) <= 1e-8);
    CHECK(ctl.max_abs(2) <= 1e-8);
    CHECK(ctl.max_abs(1) == 0.0);
    CHECK(ctl.max_normal_component(d) <= 1e-12);
    // Pieces vanish on the physical box.
    for (double t : {0.3, 0.6, 0.9}) CHECK(norm(sched.evaluate(0, t, {0.5, 0.5})) == 0.0);
    const std::string m = sched.manifest(2);
    CHECK(m.find("window") != std::string::npos);
    const auto tab = moment_table(ctl);
    CHECK(tab.columns() == std::vector<std::string>{"k", "x1", "x2", "abs_Qk"});
}
