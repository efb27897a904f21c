// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "layerctl/curl_lift.hpp"
#include "layerctl/errors.hpp"
#include "layerctl/heat.hpp"
#include "layerctl/report.hpp"
#include "layerctl/smooth.hpp"
#include "layerctl/toy.hpp"

using namespace layerctl;
namespace fs = std::filesystem;

namespace {

constexpr double pi = std::numbers::pi;

struct Outcome {
    bool passed = true;
    std::string detail;

    void require(bool ok, const std::string& what) {
        passed = passed && ok;
        if (!detail.empty()) detail += "; ";
        detail += what + (ok ? "" : " [fail]");
    }
};

std::string fmt(const char* f, double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, v);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path g_workdir;

report::RunReport run(const std::string& scenario, const std::string& tag,
                      std::map<std::string, std::string> params = {}, std::uint64_t seed = 7) {
    report::RunConfig c;
    c.scenario = scenario;
    c.seed = seed;
    c.output_dir = (g_workdir / tag).string();
    c.raw_params = std::move(params);
    fs::remove_all(c.output_dir);
    return report::run_scenario(c);
}

const report::Check* find_check(const report::RunReport& r, const std::string& name) {
    for (const auto& c : r.checks)
        if (c.name == name) return &c;
    return nullptr;
}

void require_checks(Outcome& o, const report::RunReport& r, const std::vector<std::string>& names) {
    for (const auto& n : names) {
        const auto* c = find_check(r, n);
        o.require(c && c->passed, r.scenario + "." + n + (c ? "=" + fmt("%.3g", c->value) : " missing"));
    }
    for (const auto& e : r.errors) o.require(false, "error: " + e);
}

double hermite(int n, double x) {
    double a = 1.0, b = 2.0 * x;
    if (n == 0) return a;
    for (int k = 1; k < n; ++k) {
        const double c = 2.0 * x * b - 2.0 * k * a;
        a = b;
        b = c;
    }
    return b;
}

// 1. The fitted exponent of the log model must sit within 0.05 of 1/4 + n/2 - m/2.
Outcome criterion1() {
    Outcome o;
    const auto times = heat::geometric_ladder();
    const std::vector<std::pair<int, int>> cases{{0, 0}, {1, 0}, {2, 0}, {3, 0}, {2, 2}};
    for (const auto& [n, m] : cases) {
        const auto fit = heat::verify_decay(heat::make_vanishing_moment_data(n), n, m, 0, times);
        const double expected = 0.25 + 0.5 * n - 0.5 * m;
        o.require(std::abs(fit.log_model_slope - expected) <= 0.05,
                  "(n=" + std::to_string(n) + ",m=" + std::to_string(m) + ") log-model " +
                      fmt("%.4f", fit.log_model_slope) + " vs " + fmt("%.4f", expected) + ", power-law " +
                      fmt("%.4f", fit.slope));
    }
    return o;
}

// 2. Heat evolution of Gaussian derivatives against the Hermite closed form.
Outcome criterion2() {
    Outcome o;
    const heat::ZGrid grid = heat::default_grid(1.0, 100.0);
    double worst = 0.0;
    for (int n = 0; n <= 3; ++n) {
        const auto f0 = heat::make_vanishing_moment_data(n, 1.0, grid);
        for (double t : {0.1, 1.0, 10.0}) {
            const auto f = heat::heat_evolve(f0, t);
            const double a = 1.0 + 4.0 * t, s = std::sqrt(a);
            for (std::size_t j = 0; j < f.size(); ++j) {
                const double z = f.z(j);
                const double ex = std::pow(-1.0 / s, n) * hermite(n, z / s) * std::exp(-z * z / a) / s;
                worst = std::max(worst, std::abs(f.values[j] - ex));
            }
        }
    }
    o.require(worst <= 1e-8, "max error " + fmt("%.2e", worst));
    return o;
}

// 3. Moment control on the default cloud.
Outcome criterion3() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run("moment-control", "c3");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require_checks(o, r, {"Q0_at_T", "Q2_at_T", "uncontrolled_nontrivial", "control_zero_on_closed_domain",
                          "control_zero_outside_horizon"});
    o.require(wall < 60.0, "wall " + fmt("%.1f s", wall));
    return o;
}

// 4. Exact control data against an independently integrated closed form.
Outcome criterion4() {
    Outcome o;
    const double Ts = 0.0, T = 0.5;
    const auto one = [](double) { return 1.0; };
    double worst = 0.0, prev = -INFINITY;
    bool increasing = true;
    for (int n = 1; n <= 4; ++n) {
        const double lam = n * n * pi * pi;
        // q*_n = int_T*^T e^{lam (s - T*)} ds / (n pi) for g*' = 1.
        const double closed = std::expm1(lam * (T - Ts)) / (lam * n * pi);
        const double q = toy::exact_control_data(n, one, Ts, T);
        worst = std::max(worst, std::abs(q - closed) / std::abs(closed));
        increasing = increasing && std::log(std::abs(q)) > prev;
        prev = std::log(std::abs(q));
    }
    o.require(worst <= 1e-6, "relative error " + fmt("%.2e", worst));
    o.require(increasing, "log magnitude increasing");
    const auto r = run("toy-exact-growth", "c4");
    require_checks(o, r, {"closed_form", "log_magnitude_increasing"});
    return o;
}

// 5. Low-mode control of the toy problem.
Outcome criterion5() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run("toy-lowmode", "c5");
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    require_checks(o, r, {"targeted_modes", "post_horizon_decay"});
    o.require(r.scalars.count("decay_rate") && r.scalars.at("decay_rate") >= 0.98 * 25.0 * pi * pi,
              "rate " + fmt("%.2f", r.scalars.count("decay_rate") ? r.scalars.at("decay_rate") : 0.0) +
                  " against " + fmt("%.2f", 0.98 * 25.0 * pi * pi));
    o.require(wall < 60.0, "wall " + fmt("%.1f s", wall));
    return o;
}

// 6. Curl lifting in two and three dimensions.
Outcome criterion6() {
    Outcome o;
    auto phi = [](double x) { return smooth::bump((x - 0.5) / 0.3); };
    auto dphi = [phi](double x) {
        const double r = (x - 0.5) / 0.3;
        if (r * r >= 1.0) return 0.0;
        return phi(x) * (-2.0 * r / ((1.0 - r * r) * (1.0 - r * r))) / 0.3;
    };
    lift::PointwiseLift2 pl{[=](double a, double b) { return dphi(a) * phi(b); }};
    double sym = 0.0;
    for (int i = 0; i <= 20; ++i)
        for (int j = 0; j <= 20; ++j) {
            const double a = i / 20.0, b = j / 20.0;
            const Vec2 xi = pl.xi(a, b);
            sym = std::max({sym, std::abs(xi.x), std::abs(xi.y - phi(a) * phi(b))});
        }
    o.require(sym <= 1e-12, "symbolic " + fmt("%.1e", sym));
    const auto r2 = run("curl-lift-2d", "c6_2d");
    require_checks(o, r2, {"symbolic_exact", "refinement_slope", "support_exact", "zero_average"});
    const auto r3 = run("curl-lift-3d", "c6_3d");
    require_checks(o, r3, {"refinement_slope", "support_exact", "k_obstruction"});
    return o;
}

// 7. Flushing exit times and support growth.
Outcome criterion7() {
    Outcome o;
    const auto r = run("flushing", "c7");
    require_checks(o, r, {"all_points_flushed", "exit_times_match_prediction", "support_growth_identity",
                          "support_growth_monotone"});
    const auto p = run("flushing", "c7_perturbed", {{"flow", "perturbed-channel"}});
    require_checks(o, p, {"all_points_flushed", "support_growth_monotone"});
    return o;
}

// 8. Corrector identities and the Neumann solver.
Outcome criterion8() {
    Outcome o;
    const auto r = run("correctors", "c8");
    require_checks(o, r, {"divergence_identity", "navier_identity", "theta_order", "rejects_incompatible_data"});
    return o;
}

// 9. Vorticity patch control.
Outcome criterion9() {
    Outcome o;
    const auto r = run("vorticity-patch", "c9");
    require_checks(o, r, {"vorticity_at_T", "vorticity_at_T_characteristics", "forces_inside_patches",
                          "lift_support_exact"});
    return o;
}

// 10. Byte-identical reruns and toy parity at two resolutions.
Outcome criterion10() {
    Outcome o;
    const auto a = run("curl-lift-2d", "c10_a"), b = run("curl-lift-2d", "c10_b");
    bool same = a.series_files == b.series_files && !a.series_files.empty();
    for (const auto& [name, file] : a.series_files)
        same = same && slurp(fs::path(a.output_dir) / file) == slurp(fs::path(b.output_dir) / file);
    o.require(same, "curl-lift-2d series byte-identical");
    const auto d = report::compare_runs(a.output_dir, b.output_dir, 0.0);
    o.require(d.empty(), "compare reports " + std::to_string(d.cells.size()) + " cells");

    const auto g = toy::make_pollution(1.0, 0.5);
    const auto gd = [&g](double t) { return g.g_t(t, t) + g.g_x(t, t); };
    std::vector<double> err;
    for (std::size_t base : {32, 64, 128}) {
        toy::Inlet in;
        in.q = [](double, double) { return 0.0; };
        toy::ToyOptions opt;
        opt.n_max = 2;
        const auto runq = toy::solve_toy(g, in, toy::ToyGrid{2 * base, base, 0}, 0.5, opt);
        double e = 0.0;
        for (int n = 1; n <= 2; ++n)
            e = std::max(e, std::abs(runq.states.back().modes[base][n - 1] - toy::mode_evolution(n, gd, 0.0, 0.0, 0.5)));
        err.push_back(e);
    }
    for (std::size_t k = 0; k + 1 < err.size(); ++k) {
        const double ratio = err[k] / err[k + 1];
        o.require(std::abs(ratio - 4.0) <= 0.8, "parity ratio " + fmt("%.3f", ratio));
    }
    const auto par = run("toy-lowmode", "c10_parity", {{"N", "1"}, {"parity", "true"}});
    require_checks(o, par, {"mode_parity_order"});
    return o;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"acceptance criteria"};
    std::string workdir = (fs::temp_directory_path() / "layerctl_acceptance").string();
    app.add_option("--workdir", workdir, "directory for scenario outputs");
    CLI11_PARSE(app, argc, argv);
    g_workdir = workdir;
    fs::create_directories(g_workdir);

    const std::vector<std::function<Outcome()>> criteria{criterion1, criterion2, criterion3, criterion4,
                                                         criterion5, criterion6, criterion7, criterion8,
                                                         criterion9, criterion10};
    int failures = 0;
    for (std::size_t k = 0; k < criteria.size(); ++k) {
        Outcome o;
        try {
            o = criteria[k]();
        } catch (const std::exception& e) {
            o.require(false, std::string("exception: ") + e.what());
        }
        failures += !o.passed;
        std::printf("CRITERION %zu %s %s\n", k + 1, o.passed ? "PASS" : "FAIL", o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    return failures == 0 ? 0 : 1;
}
