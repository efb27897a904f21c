#include <cmath>
#include <numbers>

#include "doctest.h"
#include "layerctl/errors.hpp"
#include "layerctl/toy.hpp"

using namespace layerctl;
using namespace layerctl::toy;

namespace {
constexpr double pi = std::numbers::pi;
}

TEST_CASE("lift coefficient is the sine mode of 1 - z") {
    for (int n = 1; n <= 5; ++n) {
        double s = 0.0;
        const int m = 20000;
        for (int j = 1; j < m; ++j) {
            const double z = static_cast<double>(j) / m;
            s += (1.0 - z) * std::sin(n * pi * z);
        }
        CHECK(lift_coefficient(n) == doctest::Approx(s / m).epsilon(1e-7));
    }
}

TEST_CASE("exact control data grows like the closed form") {
    const auto one = [](double) { return 1.0; };
    double prev = -INFINITY;
    for (int n = 1; n <= 4; ++n) {
        const double lam = n * n * pi * pi;
        const double closed = (std::exp(lam * 0.5) - 1.0) / (n * n * n * pi * pi * pi);
        const double q = exact_control_data(n, one, 0.0, 0.5);
        CHECK(q == doctest::Approx(closed).epsilon(1e-9));
        CHECK(std::log(q) > prev);
        prev = std::log(q);
    }
}

TEST_CASE("exact control data trips the overflow guard with the log magnitude") {
    const auto one = [](double) { return 1.0; };
    try {
        (void)exact_control_data(9, one, 0.0, 1.0);
        FAIL("expected OverflowGuardError");
    } catch (const OverflowGuardError& e) {
        const double lam = 81 * pi * pi;
        CHECK(e.log_magnitude() == doctest::Approx(lam + std::log((1.0 - std::exp(-lam)) / (729 * pi * pi * pi))));
    }
    CHECK(exact_control_data(3, nullptr, 0.0, 2.0) == 0.0);
}

TEST_CASE("mode evolution with exact data reaches zero") {
    const auto g = [](double t) { return std::cos(3.0 * t); };
    for (int n = 1; n <= 3; ++n) {
        const double q = exact_control_data(n, g, 0.1, 0.4);
        // The decayed q* must balance the forced part: the mode at T is zero.
        const double qn = q * std::exp(-n * n * pi * pi * 0.1);
        CHECK(std::abs(mode_evolution(n, g, qn, 0.1, 0.4)) <= 1e-12 * std::max(1.0, std::abs(qn)));
    }
    CHECK_THROWS_AS(mode_evolution(0, g, 0.0, 0.0, 1.0), PreconditionError);
    CHECK_THROWS_AS(mode_evolution(1, g, 0.0, 1.0, 0.5), PreconditionError);
}

TEST_CASE("zero pollution and zero inlet stay zero") {
    Inlet in;
    in.q = [](double, double) { return 0.0; };
    ToyGrid grid{16, 16, 0};
    const auto run = solve_toy(zero_pollution(), in, grid, 0.5);
    for (double s : run.sup_norm) CHECK(s == 0.0);
}

TEST_CASE("a free sine column decays at the discrete Crank-Nicolson rate") {
    Inlet in;
    in.q = [](double t, double z) { return t == 0.0 ? std::sin(pi * z) : 0.0; };
    ToyGrid grid{32, 64, 0};
    ToyOptions opt;
    opt.n_max = 2;
    const auto run = solve_toy(zero_pollution(), in, grid, 0.5, opt);
    const auto& st = run.states.back();
    const double m1 = st.modes[16][0];
    CHECK(m1 == doctest::Approx(0.5 * std::exp(-pi * pi * 0.5)).epsilon(2e-3));
    CHECK(std::abs(st.modes[16][1]) <= 1e-14);
}

TEST_CASE("slice modes converge to the modal ODE at second order") {
    const auto g = make_pollution(1.0, 1.0);
    const auto gd = [&g](double t) { return g.g_t(t, t) + g.g_x(t, t); };
    std::vector<double> err;
    for (std::size_t base : {16, 32, 64}) {
        Inlet in;
        in.q = [](double, double) { return 0.0; };
        ToyOptions o;
        o.n_max = 1;
        const auto run = solve_toy(g, in, ToyGrid{2 * base, base, 0}, 0.5, o);
        err.push_back(std::abs(run.states.back().modes[base][0] - mode_evolution(1, gd, 0.0, 0.0, 0.5)));
    }
    CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.2));
    CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.2));
}

TEST_CASE("binary128 and binary64 agree on a smooth problem") {
    const auto g = make_pollution(1.0, 1.0);
    Inlet in;
    in.q = [](double, double) { return 0.0; };
    ToyOptions a, b;
    b.precision = Precision::binary128;
    const auto ra = solve_toy(g, in, ToyGrid{16, 32, 0}, 0.5, a);
    const auto rb = solve_toy(g, in, ToyGrid{16, 32, 0}, 0.5, b);
    for (std::size_t k = 0; k < ra.sup_norm.size(); ++k)
        CHECK(ra.sup_norm[k] == doctest::Approx(rb.sup_norm[k]).epsilon(1e-12).scale(1e-300));
}

TEST_CASE("incompatible corner data is refused") {
    Pollution g;
    g.g = [](double t, double) { return t; };
    g.g_t = [](double, double) { return 1.0; };
    g.g_x = [](double, double) { return 0.0; };
    Inlet in;
    in.q = [](double, double) { return 0.0; };
    CHECK_THROWS_AS(solve_toy(g, in, ToyGrid{16, 16, 0}, 0.5), PreconditionError);
}

TEST_CASE("low-mode control kills the first N modes and decays at the gap") {
    const auto g = make_pollution(1.0, 1.0);
    const auto rep = lowmode_control(2, g, ToyGrid{16, 32, 0}, 1.0);
    CHECK(rep.max_residual <= 1e-8);
    CHECK(rep.decay_rate >= 0.98 * 9 * pi * pi);
    CHECK(rep.controlled_slices > 0);
    CHECK(rep.mode_table.columns() == std::vector<std::string>{"n", "x_star", "mode_at_T", "target"});
    CHECK_THROWS_AS(lowmode_control(9, g, ToyGrid{}, 1.0), PreconditionError);
}
