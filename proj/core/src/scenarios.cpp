#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "layerctl/curl_lift.hpp"
#include "layerctl/heat.hpp"
#include "layerctl/layer.hpp"
#include "layerctl/quadrature.hpp"
#include "layerctl/report.hpp"
#include "layerctl/smooth.hpp"
#include "layerctl/toy.hpp"

namespace layerctl::report {

void ScenarioOutput::check(std::string name, bool passed, double value, double threshold, std::string detail) {
    checks.push_back({std::move(name), passed, value, threshold, std::move(detail)});
}

namespace {

constexpr double pi = std::numbers::pi;

ParamSpec integer(std::string name, std::int64_t def, double lo, double hi, std::string help) {
    return {std::move(name), ParamType::integer, def, lo, hi, {}, std::move(help)};
}
ParamSpec real(std::string name, double def, std::optional<double> lo, std::optional<double> hi, std::string help) {
    return {std::move(name), ParamType::real, def, lo, hi, {}, std::move(help)};
}
ParamSpec boolean(std::string name, bool def, std::string help) {
    return {std::move(name), ParamType::boolean, def, std::nullopt, std::nullopt, {}, std::move(help)};
}
ParamSpec choice(std::string name, std::string def, std::vector<std::string> options, std::string help) {
    return {std::move(name), ParamType::string, std::move(def), std::nullopt, std::nullopt, std::move(options),
            std::move(help)};
}

std::size_t as_size(std::int64_t v) { return static_cast<std::size_t>(v); }

double ols_slope(const std::vector<double>& x, const std::vector<double>& y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return quad::fit_line(lx, ly).slope;
}

/// Physicists' Hermite polynomial H_n.
double hermite(int n, double x) {
    double h0 = 1.0, h1 = 2.0 * x;
    if (n == 0) return h0;
    for (int k = 1; k < n; ++k) {
        const double h2 = 2.0 * x * h1 - 2.0 * k * h0;
        h0 = h1;
        h1 = h2;
    }
    return h1;
}

/// n-th derivative of sqrt(a0 / a) exp(-z^2 / a) with a = a0 + 4t.
double gaussian_kernel_derivative(int n, double width, double t, double z) {
    const double a0 = width * width, a = a0 + 4.0 * t, s = std::sqrt(a);
    return std::sqrt(a0 / a) * std::pow(-1.0 / s, n) * hermite(n, z / s) * std::exp(-z * z / a);
}

// heat-decay --------------------------------------------------------------------------------

void run_heat_decay(const Params& p, std::uint64_t, ScenarioOutput& out) {
    const int n = static_cast<int>(p.integer("n"));
    const int m = static_cast<int>(p.integer("m"));
    const int s = static_cast<int>(p.integer("s"));
    const double t0 = p.real("t0"), t1 = p.real("t1"), width = p.real("width");
    if (m > n) throw ConfigError("parameter 'm' must not exceed n", "m");
    if (!(t1 > t0)) throw ConfigError("parameter 't1' must exceed t0", "t1");
    const auto times = heat::geometric_ladder(t0, t1, as_size(p.integer("points")));
    const heat::ZGrid grid = heat::default_grid(width, t1);
    const auto f0 = heat::make_vanishing_moment_data(n, width, grid);
    const heat::DecayFit fit = heat::verify_decay(f0, n, m, s, times);

    out.scalars["expected_exponent"] = fit.exponent;
    out.scalars["fit_slope"] = fit.slope;
    out.scalars["log_model_slope"] = fit.log_model_slope;
    out.scalars["loglog_slope"] = -fit.slope;
    out.scalars["C_fit"] = fit.C_fit;
    out.scalars["grid_L"] = grid.L;
    out.scalars["grid_N"] = static_cast<double>(grid.N);

    out.check("power_law_exponent", std::abs(fit.slope - fit.exponent) <= 0.05, std::abs(fit.slope - fit.exponent),
              0.05, "fitted exponent of the norm against (2 + t)");
    out.check("log_model_exponent", std::abs(fit.log_model_slope - fit.exponent) <= 0.05,
              std::abs(fit.log_model_slope - fit.exponent), 0.05,
              "fitted beta of the norm against ln(2 + t) / (2 + t)");
    out.check("log_model_bound", fit.bound_ok, fit.bound_ok ? 1.0 : 0.0, 1.0,
              "norm <= 1.05 C (ln(2 + t) / (2 + t))^exponent on the ladder");

    // Spectral solver against the closed-form Gaussian kernel.
    double kernel_err = 0.0;
    csv::Table kernel({"t", "max_error"});
    const auto g0 = heat::sample([&](double z) { return gaussian_kernel_derivative(n, width, 0.0, z); }, grid,
                                 n % 2 == 0 ? heat::Parity::even : heat::Parity::odd);
    for (double t : {0.1, 1.0, 10.0}) {
        const auto ft = heat::heat_evolve(g0, t);
        double e = 0.0;
        for (std::size_t j = 0; j < ft.size(); ++j)
            e = std::max(e, std::abs(ft.values[j] - gaussian_kernel_derivative(n, width, t, ft.z(j))));
        kernel.add_row({t, e});
        kernel_err = std::max(kernel_err, e);
    }
    out.scalars["kernel_max_error"] = kernel_err;
    out.check("kernel_exactness", kernel_err <= 1e-8, kernel_err, 1e-8, "max-norm error at t = 0.1, 1, 10");

    out.add_series("decay", heat::decay_table(fit));
    csv::Table ll({"two_plus_t", "norm", "model"});
    for (std::size_t i = 0; i < fit.times.size(); ++i) ll.add_row({2.0 + fit.times[i], fit.norms[i], fit.model[i]});
    out.add_series("loglog", std::move(ll));
    out.add_series("kernel", std::move(kernel));
    out.plots.push_back({"loglog", "loglog", true, "loglog_slope"});
}

// moment-control ----------------------------------------------------------------------------

std::vector<Box> channel_patches(double x_start, double x_end, double size, double step) {
    std::vector<Box> patches;
    for (double x = x_start; x <= x_end + 1e-9; x += step)
        for (double y = -0.5 * size; y <= 1.0 - 0.5 * size + 1e-9; y += 0.5 * size)
            patches.push_back({x, x + size, y, y + size});
    return patches;
}

struct ChannelSetup {
    Domain domain;
    ReferenceFlow flow;
    std::vector<Box> patches;
};

ChannelSetup channel_setup(const Params& p) {
    const Box physical{0.0, 1.0, 0.0, 1.0};
    const Box extended{-0.05, p.real("extended_x1"), 0.0, 1.0};
    ChannelSetup s{Domain::strip(physical, extended),
                   make_reference_flow("uniform-channel", {{"T", p.real("T")}, {"displacement", p.real("displacement")}}),
                   channel_patches(1.1, extended.x1, 0.3, 0.15)};
    return s;
}

void run_moment_control(const Params& p, std::uint64_t, ScenarioOutput& out) {
    const auto setup = channel_setup(p);
    const Domain& dom = setup.domain;
    const ReferenceFlow& flow = setup.flow;
    const double alpha = p.real("alpha");
    const int k_max = static_cast<int>(p.integer("k_max"));
    if (k_max % 2 != 0) throw ConfigError("parameter 'k_max' must be even", "k_max");

    const auto chi = layer::choose_chi_width(flow, dom);
    layer::ChiCutoff cutoff{chi.eta};
    const auto src =
        layer::assemble_layer_sources(flow, dom, [alpha](const Vec2&) { return alpha * Mat2::identity(); }, cutoff);
    const Partition part = build_partition(flow, dom, setup.patches, p.real("eps"));
    layer::MomentOptions mo;
    mo.tol = p.real("tol");
    const auto sched = layer::synthesize_moment_control(src, flow, dom, part, k_max, mo);

    const std::size_t nc = as_size(p.integer("cloud"));
    const Box& ext = dom.extended_box();
    std::vector<Vec2> cloud;
    for (std::size_t i = 0; i < nc; ++i)
        for (std::size_t j = 0; j < nc; ++j)
            cloud.push_back({ext.x0 + ext.width() * (static_cast<double>(i) + 0.5) / static_cast<double>(nc),
                             ext.y0 + ext.height() * (static_cast<double>(j) + 0.5) / static_cast<double>(nc)});
    const auto unc = layer::evolve_moments(src, flow, layer::ControlSchedule{}, k_max, cloud, flow.T, mo);
    const auto ctl = layer::evolve_moments(src, flow, sched, k_max, cloud, flow.T, mo);

    out.scalars["chi_eta"] = chi.eta;
    out.scalars["balls"] = static_cast<double>(part.balls.size());
    out.scalars["pieces"] = static_cast<double>(sched.pieces().size());
    out.scalars["normal_component"] = ctl.max_normal_component(dom);
    for (int k = 0; k <= k_max; k += 2) {
        const std::string ks = std::to_string(k);
        out.scalars["uncontrolled_Q" + ks] = unc.max_abs(k);
        out.scalars["controlled_Q" + ks] = ctl.max_abs(k);
        out.check("Q" + ks + "_at_T", ctl.max_abs(k) <= 1e-8, ctl.max_abs(k), 1e-8,
                  "max over the cloud of |Q_" + ks + "(T)|");
    }
    out.check("uncontrolled_nontrivial", unc.max_abs(0) > 1e-4, unc.max_abs(0), 1e-4,
              "the layer source is active without control");

    // Support audit: exact zeros on the closed physical box and outside (0, T).
    double inside = 0.0, outside_time = 0.0;
    const Box& phys = dom.physical_box();
    for (int k = 0; k <= k_max; k += 2) {
        for (int it = 0; it <= 32; ++it) {
            const double t = flow.T * it / 32.0;
            for (int i = 0; i <= 16; ++i)
                for (int j = 0; j <= 16; ++j) {
                    const Vec2 x{phys.x0 + phys.width() * i / 16.0, phys.y0 + phys.height() * j / 16.0};
                    inside = std::max(inside, norm(sched.evaluate(k, t, x)));
                }
        }
        for (double t : {-0.25 * flow.T, 0.0, flow.T, 1.25 * flow.T})
            for (const Vec2& x : dom.mesh(24, 12)) outside_time = std::max(outside_time, norm(sched.evaluate(k, t, x)));
    }
    bool windows_ok = true;
    for (const auto& pc : sched.pieces())
        windows_ok = windows_ok && pc.t_center - pc.eps > 0.0 && pc.t_center + pc.eps < flow.T &&
                     part.patches[pc.patch].x0 > phys.x1;
    out.check("control_zero_on_closed_domain", inside == 0.0, inside, 0.0, "sampled |control| on the physical box");
    out.check("control_zero_outside_horizon", outside_time == 0.0 && windows_ok, outside_time, 0.0,
              "sampled at t <= 0 and t >= T; piece windows inside (0, T)");

    out.add_series("moments", layer::moment_table(ctl));
    csv::Table hist({"t", "uncontrolled_Q0", "controlled_Q0"});
    for (std::size_t s = 0; s < ctl.snapshots.size() && s < unc.snapshots.size(); ++s) {
        double a = 0.0, b = 0.0;
        for (const auto& q : unc.snapshots[s].Q) a = std::max(a, norm(q[0]));
        for (const auto& q : ctl.snapshots[s].Q) b = std::max(b, norm(q[0]));
        hist.add_row({ctl.snapshots[s].t, a, b});
    }
    out.add_series("q0_history", std::move(hist));
    out.plots.push_back({"q0_history", "linear", false, {}});
    out.texts.emplace_back("control_schedule.txt", sched.manifest(as_size(p.integer("amplitude_grid"))));
}

// toy-exact-growth --------------------------------------------------------------------------

void run_toy_exact_growth(const Params& p, std::uint64_t, ScenarioOutput& out) {
    const double T = p.real("T"), Ts = p.real("T_star");
    if (!(T > Ts)) throw ConfigError("parameter 'T' must exceed T_star", "T");
    const int nmax = static_cast<int>(p.integer("n_max"));
    csv::Table tab({"n", "q_star", "closed_form", "rel_error", "log_magnitude"});
    double worst = 0.0, prev_log = -INFINITY;
    bool monotone = true;
    int guarded = 0;
    for (int n = 1; n <= nmax; ++n) {
        const double lam = n * n * pi * pi;
        const double closed = (std::exp(lam * T) - std::exp(lam * Ts)) / (n * n * n * pi * pi * pi);
        double q = 0.0, logmag = 0.0;
        try {
            q = toy::exact_control_data(n, [](double) { return 1.0; }, Ts, T);
            logmag = std::log(std::abs(q));
        } catch (const OverflowGuardError& e) {
            if (!guarded) guarded = n;
            logmag = e.log_magnitude();
            q = INFINITY;
        }
        const double rel = std::isfinite(q) ? std::abs(q - closed) / std::abs(closed) : 0.0;
        if (std::isfinite(q)) worst = std::max(worst, rel);
        monotone = monotone && logmag > prev_log;
        prev_log = logmag;
        tab.add_row({static_cast<double>(n), std::isfinite(q) ? q : 0.0, std::isfinite(closed) ? closed : 0.0, rel,
                     logmag});
    }
    out.scalars["max_rel_error"] = worst;
    out.scalars["first_guarded_mode"] = guarded;
    out.check("closed_form", worst <= 1e-6, worst, 1e-6, "relative error against the closed form");
    out.check("log_magnitude_increasing", monotone, monotone ? 1.0 : 0.0, 1.0, "ln |q*_n| strictly increasing in n");
    out.add_series("growth", std::move(tab));
}

// toy-lowmode -------------------------------------------------------------------------------

void run_toy_lowmode(const Params& p, std::uint64_t, ScenarioOutput& out) {
    const int N = static_cast<int>(p.integer("N"));
    const double T = p.real("T");
    const auto g = toy::make_pollution(p.real("amplitude"), T);
    toy::ToyGrid grid;
    grid.nx = as_size(p.integer("nx"));
    grid.nz = as_size(p.integer("nz"));
    const auto rep = toy::lowmode_control(N, g, grid, T, p.real("window"));
    const double gap = (N + 1) * (N + 1) * pi * pi;
    out.scalars["max_residual"] = rep.max_residual;
    out.scalars["decay_rate"] = rep.decay_rate;
    out.scalars["spectral_gap"] = gap;
    out.scalars["controlled_slices"] = static_cast<double>(rep.controlled_slices);
    out.scalars["excluded_slices"] = static_cast<double>(rep.excluded_slices);
    out.scalars["max_inlet"] = rep.max_inlet;
    out.check("targeted_modes", rep.max_residual <= 1e-8, rep.max_residual, 1e-8,
              "max |v^n(T)| over controlled slices and n <= N");
    out.check("post_horizon_decay", rep.decay_rate >= 0.98 * gap, rep.decay_rate, 0.98 * gap,
              "log-slope of sup |v| after T against 0.98 (N + 1)^2 pi^2");
    out.add_series("modes", rep.mode_table);
    out.add_series("decay", rep.decay_series);
    out.add_series("inlet", rep.inlet);
    out.plots.push_back({"decay", "linear", false, {}});

    if (!p.boolean("parity")) return;
    // Modes of the slice entering at t = 0 against the modal ODE at three resolutions.
    const double Tp = p.real("parity_T");
    auto gd = [&g](double t) { return g.g_t(t, t) + g.g_x(t, t); };
    csv::Table par({"nz", "n", "computed", "oracle", "error", "ratio"});
    std::vector<std::vector<double>> errs;
    double worst_ratio_dev = 0.0;
    for (std::size_t base : {32, 64, 128}) {
        toy::ToyGrid gr;
        gr.nx = 2 * base;
        gr.nz = base;
        toy::Inlet in;
        in.q = [](double, double) { return 0.0; };
        toy::ToyOptions o;
        o.n_max = 2;
        const auto run = toy::solve_toy(g, in, gr, Tp, o);
        const auto& st = run.states.back();
        const auto i = static_cast<std::size_t>(std::lround(Tp * static_cast<double>(gr.nx)));
        std::vector<double> e;
        for (int n = 1; n <= 2; ++n) {
            const double ex = toy::mode_evolution(n, gd, 0.0, 0.0, Tp);
            const double c = st.modes[i][static_cast<std::size_t>(n - 1)];
            e.push_back(std::abs(c - ex));
            double ratio = 0.0;
            if (!errs.empty()) {
                ratio = errs.back()[static_cast<std::size_t>(n - 1)] / e.back();
                worst_ratio_dev = std::max(worst_ratio_dev, std::abs(ratio - 4.0) / 4.0);
            }
            par.add_row({static_cast<double>(base), static_cast<double>(n), c, ex, e.back(), ratio});
        }
        errs.push_back(std::move(e));
    }
    out.scalars["parity_ratio_deviation"] = worst_ratio_dev;
    out.check("mode_parity_order", worst_ratio_dev <= 0.2, worst_ratio_dev, 0.2,
              "error ratio per halving of dt and dz within 4 +- 20%");
    out.add_series("parity", std::move(par));
}

// curl-lift ---------------------------------------------------------------------------------

std::vector<std::size_t> levels(const Params& p) {
    std::vector<std::size_t> ns;
    std::size_t n = as_size(p.integer("n0"));
    for (std::int64_t l = 0; l < p.integer("levels"); ++l, n *= 2) ns.push_back(n);
    return ns;
}

void run_curl_lift_2d(const Params& p, std::uint64_t seed, ScenarioOutput& out) {
    const int modes = static_cast<int>(p.integer("modes"));
    csv::Table conv({"h", "curl_error", "average", "support_defect"});
    std::vector<double> hs, es;
    double worst_avg = 0.0, worst_support = 0.0;
    lift::TestField coarse;
    lift::LiftResult2 coarse_lift;
    for (std::size_t n : levels(p)) {
        auto tf = lift::sample_test_field(2, seed, modes, n);
        const auto r = lift::lift2d(tf.f2);
        const double e = lift::curl_error(tf.f2, r);
        hs.push_back(1.0 / static_cast<double>(n));
        es.push_back(e);
        worst_avg = std::max(worst_avg, std::abs(r.average));
        worst_support = std::max(worst_support, lift::support_violation(r, lift::PatchKind::inner));
        conv.add_row({hs.back(), e, r.average, r.support_defect});
        if (coarse.f2.n == 0) {
            coarse = tf;
            coarse_lift = r;
        }
    }
    const double slope = ols_slope(hs, es);

    // Boundary kind on the coarsest level: outside rows may carry arbitrary data.
    auto btf = lift::sample_test_field(2, seed + 1, modes, levels(p).front());
    btf.f2.kind = lift::PatchKind::boundary;
    btf.f2.interior_extent = 0.6;
    const auto br = lift::lift2d(btf.f2);
    const double b_support = lift::support_violation(br, lift::PatchKind::boundary);

    // Symbolic case w = phi'(x1) phi(x2) with lift (0, phi(x1) phi(x2)).
    auto phi = [](double x) { return smooth::bump((x - 0.5) / 0.3); };
    auto dphi = [phi](double x) {
        const double r = (x - 0.5) / 0.3;
        if (r * r >= 1.0) return 0.0;
        return phi(x) * (-2.0 * r / ((1.0 - r * r) * (1.0 - r * r))) / 0.3;
    };
    lift::PointwiseLift2 pl{[=](double a, double b) { return dphi(a) * phi(b); }};
    double sym = 0.0;
    for (int i = 1; i < 10; ++i)
        for (int j = 1; j < 10; ++j) {
            const double a = i / 10.0, b = j / 10.0;
            const Vec2 xi = pl.xi(a, b);
            sym = std::max({sym, std::abs(xi.x), std::abs(xi.y - phi(a) * phi(b)),
                            std::abs(pl.curl(a, b) - dphi(a) * phi(b))});
        }

    out.scalars["refinement_slope"] = slope;
    out.scalars["symbolic_error"] = sym;
    out.scalars["max_average"] = worst_avg;
    out.scalars["boundary_curl_error"] = lift::curl_error(btf.f2, br);
    out.check("symbolic_exact", sym <= 1e-12, sym, 1e-12, "pointwise lift of phi'(x1) phi(x2)");
    out.check("refinement_slope", std::abs(slope - 2.0) <= 0.2, slope, 2.0, "OLS slope of curl error against h");
    out.check("support_exact", worst_support == 0.0 && b_support == 0.0, std::max(worst_support, b_support), 0.0,
              "lift values on the excluded sides");
    out.check("zero_average", worst_avg <= 1e-14, worst_avg, 1e-14, "quadrature of the inner input");
    out.add_series("convergence", std::move(conv));
    out.add_series("patch", lift::patch_table(coarse.f2, &coarse_lift));
    out.plots.push_back({"convergence", "loglog", true, "refinement_slope"});
}

void run_curl_lift_3d(const Params& p, std::uint64_t seed, ScenarioOutput& out) {
    const int modes = static_cast<int>(p.integer("modes"));
    csv::Table conv({"h", "curl_error", "k_max", "divergence"});
    std::vector<double> hs, es;
    double worst_k = 0.0, worst_support = 0.0;
    for (std::size_t n : levels(p)) {
        const auto tf = lift::sample_test_field(3, seed, modes, n);
        const auto r = lift::lift3d(tf.f3);
        const double e = lift::curl_error(tf.f3, r);
        hs.push_back(1.0 / static_cast<double>(n));
        es.push_back(e);
        worst_k = std::max(worst_k, r.k_max);
        worst_support = std::max(worst_support, lift::support_violation(r, lift::PatchKind::inner));
        conv.add_row({hs.back(), e, r.k_max, r.divergence});
    }
    const double slope = ols_slope(hs, es);

    const std::size_t n0 = levels(p).front();
    auto btf = lift::sample_test_field(3, seed + 1, modes, n0);
    btf.f3.kind = lift::PatchKind::boundary;
    btf.f3.interior_extent = 0.6;
    const auto br = lift::lift3d(btf.f3);
    const double b_support = lift::support_violation(br, lift::PatchKind::boundary);

    // A field with nonzero divergence must be refused.
    auto bad = lift::sample_test_field(3, seed + 2, modes, n0);
    for (std::size_t i = 0; i < bad.f3.values.size(); i += 3) bad.f3.values[i] += bad.f3.values[i + 1];
    bool rejected = false;
    double bad_div = lift::relative_divergence(bad.f3);
    try {
        (void)lift::lift3d(bad.f3);
    } catch (const DefectError&) {
        rejected = true;
    }

    out.scalars["refinement_slope"] = slope;
    out.scalars["max_k"] = worst_k;
    out.scalars["boundary_curl_error"] = lift::curl_error(btf.f3, br);
    out.scalars["rejected_divergence"] = bad_div;
    out.check("refinement_slope", std::abs(slope - 2.0) <= 0.2, slope, 2.0, "OLS slope of curl error against h");
    out.check("support_exact", worst_support == 0.0 && b_support == 0.0, std::max(worst_support, b_support), 0.0,
              "lift values on the excluded faces");
    out.check("k_obstruction", worst_k <= 1e-10, worst_k, 1e-10, "max |k(x3)|");
    out.check("rejects_divergent_input", rejected, bad_div, 0.1, "relative divergence of the perturbed field");
    out.add_series("convergence", std::move(conv));
    out.plots.push_back({"convergence", "loglog", true, "refinement_slope"});
}

// flushing ----------------------------------------------------------------------------------

void run_flushing(const Params& p, std::uint64_t, ScenarioOutput& out) {
    const std::string family = p.string("flow");
    const double T = p.real("T"), D = p.real("displacement"), delta = p.real("delta"), dt = p.real("dt_obs");
    const Box physical{0.0, 1.0, 0.0, 1.0};
    const Box extended{-0.05, p.real("extended_x1"), 0.0, 1.0};
    const Domain dom = Domain::strip(physical, extended);
    const ReferenceFlow flow =
        make_reference_flow(family, {{"T", T}, {"displacement", D}, {"kappa", p.real("kappa")}});
    const std::size_t g = as_size(p.integer("grid"));
    std::vector<Vec2> pts;
    for (std::size_t i = 0; i < g; ++i)
        for (std::size_t j = 0; j < g; ++j)
            pts.push_back({extended.x0 + extended.width() * (static_cast<double>(i) + 0.5) / static_cast<double>(g),
                           extended.y0 + extended.height() * (static_cast<double>(j) + 0.5) / static_cast<double>(g)});
    const auto rep = verify_flushing(flow, dom, pts, delta, dt, p.real("tol"));
    out.scalars["failures"] = static_cast<double>(rep.failures);
    out.check("all_points_flushed", rep.success, static_cast<double>(rep.failures), 0.0,
              "grid points leaving the physical box by delta before T");

    const bool uniform = family == "uniform-channel";
    csv::Table exits({"x1", "x2", "exit_time", "predicted", "difference"});
    double worst = 0.0;
    for (const auto& s : rep.samples) {
        double pred = NAN;
        if (uniform) {
            // First t with dist(x0 + int_0^t h, box) >= delta: fine scan of the quadrature, then bisection.
            auto disp = [&](double t) {
                return quad::adaptive([&](double u) { return channel_profile(u, T, D); }, 0.0, t, 1e-14);
            };
            auto gap = [&](double t) { return physical.distance({s.start.x + disp(t), s.start.y}) - delta; };
            if (gap(0.0) >= 0.0 && s.start.x > physical.x1) {
                pred = 0.0;
            } else {
                constexpr int scan = 2048;
                double lo = 0.0, hi = NAN;
                for (int k = 1; k <= scan; ++k) {
                    const double t = T * k / scan;
                    if (gap(t) >= 0.0) {
                        hi = t;
                        break;
                    }
                    lo = t;
                }
                if (std::isfinite(hi)) {
                    for (int it = 0; it < 60; ++it) {
                        const double mid = 0.5 * (lo + hi);
                        (gap(mid) >= 0.0 ? hi : lo) = mid;
                    }
                    pred = hi;
                }
            }
        }
        const double et = s.exit_time ? *s.exit_time : NAN;
        const double diff = et - pred;
        if (uniform) worst = std::max(worst, std::isfinite(diff) ? std::abs(diff) : INFINITY);
        exits.add_row({s.start.x, s.start.y, s.exit_time ? et : -1.0, std::isfinite(pred) ? pred : -1.0,
                       std::isfinite(diff) ? diff : 0.0});
    }
    if (uniform) {
        out.scalars["max_exit_difference"] = worst;
        out.check("exit_times_match_prediction", worst <= dt, worst, dt,
                  "observed minus predicted exit time, at most one observation step");
    }

    csv::Table growth({"delta", "S"});
    const std::vector<double> ladder{0.02, 0.04, 0.06, 0.08, 0.12, 0.16};
    double prev = -INFINITY, flat_err = 0.0;
    bool monotone = true;
    for (double d : ladder) {
        const double S = support_growth(flow, dom, d, 16, as_size(p.integer("time_grid")), p.real("tol"));
        growth.add_row({d, S});
        monotone = monotone && S >= prev;
        prev = S;
        flat_err = std::max(flat_err, std::abs(S - d));
    }
    out.check("support_growth_monotone", monotone, monotone ? 1.0 : 0.0, 1.0, "S nondecreasing on the delta ladder");
    if (uniform)
        out.check("support_growth_identity", flat_err <= 1e-9, flat_err, 1e-9, "|S(delta) - delta| for a parallel flow");
    out.scalars["max_support_growth_gap"] = flat_err;

    out.add_series("exits", std::move(exits));
    out.add_series("support_growth", std::move(growth));
    out.plots.push_back({"support_growth", "linear", false, {}});
    // Trajectory of the slowest point.
    std::size_t slow = 0;
    for (std::size_t i = 0; i < rep.samples.size(); ++i)
        if (rep.samples[i].exit_time && rep.samples[slow].exit_time &&
            *rep.samples[i].exit_time > *rep.samples[slow].exit_time)
            slow = i;
    out.add_series("trajectory", csv::Table::parse(trajectory_csv(rep.samples[slow], dom)));
}

// correctors --------------------------------------------------------------------------------

void run_correctors(const Params& p, std::uint64_t, ScenarioOutput& out) {
    const Domain dom = Domain::strip({0.0, 1.0, 0.0, 1.0}, {-0.05, 2.3, 0.0, 1.0});
    const double alpha = p.real("alpha");
    // Tangential layer field near the bottom wall, where n = (0, -1).
    auto prof = [](double z) { return (1.0 + z * z) * std::exp(-z * z); };
    layer::LayerField v;
    v.value = [prof](const Vec2& x, double z) { return Vec2{std::sin(pi * x.x) * (1.0 + x.y) * prof(z), 0.0}; };
    v.gradient = [prof](const Vec2& x, double z) {
        Mat2 m;
        m(0, 0) = pi * std::cos(pi * x.x) * (1.0 + x.y) * prof(z);
        m(0, 1) = std::sin(pi * x.x) * prof(z);
        return m;
    };
    std::vector<Vec2> xs;
    for (int i = 0; i < 8; ++i)
        for (double y : {0.0, 0.03, 0.08}) xs.push_back({0.1 + 0.25 * i, y});
    std::vector<double> zs;
    for (int j = 0; j <= 24; ++j) zs.push_back(0.25 * j);
    const auto M = [alpha](const Vec2&) { return alpha * Mat2::identity(); };
    const auto cw = layer::corrector_w(v, dom, M, xs, zs);
    out.scalars["divergence_residual"] = cw.diverg_residual;
    out.scalars["navier_residual"] = cw.navier_residual;
    out.check("divergence_identity", cw.diverg_residual <= 1e-10, cw.diverg_residual, 1e-10,
              "max |n . d_z w - div_x v|");
    out.check("navier_identity", cw.navier_residual <= 1e-10, cw.navier_residual, 1e-10,
              "max |N(v)(0) - [d_z w]_tan(0) / 2|");
    csv::Table wt({"x1", "x2", "z", "w1", "w2", "div_v"});
    for (std::size_t i = 0; i < cw.xs.size(); ++i)
        for (std::size_t j = 0; j < cw.zs.size(); ++j)
            wt.add_row({cw.xs[i].x, cw.xs[i].y, cw.zs[j], cw.w[i][j].x, cw.w[i][j].y, cw.div_v[i][j]});
    out.add_series("corrector_w", std::move(wt));

    // Neumann problem with a known solution.
    auto theta = [](const Vec2& x) { return std::cos(pi * x.x) * std::cos(2 * pi * x.y) + std::cos(3 * pi * x.x); };
    auto source = [](const Vec2& x) {
        return 5 * pi * pi * std::cos(pi * x.x) * std::cos(2 * pi * x.y) + 9 * pi * pi * std::cos(3 * pi * x.x);
    };
    auto no_flux = [](const Vec2&, const Vec2&) { return 0.0; };
    const Box box{0.0, 1.0, 0.0, 1.0};
    csv::Table conv({"h", "max_error", "residual"});
    std::vector<double> hs, es;
    std::size_t n = as_size(p.integer("n0"));
    for (std::int64_t l = 0; l < p.integer("levels"); ++l, n = 2 * n - 1) {
        const auto sol = layer::solve_theta(box, n, n, source, no_flux);
        // Compare after removing trapezoid means from both.
        double wsum = 0.0, msum = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i) {
                const double w = (i == 0 || i + 1 == n ? 0.5 : 1.0) * (j == 0 || j + 1 == n ? 0.5 : 1.0);
                wsum += w;
                msum += w * theta({i * sol.hx, j * sol.hy});
            }
        const double mean = msum / wsum;
        double e = 0.0;
        for (std::size_t j = 0; j < n; ++j)
            for (std::size_t i = 0; i < n; ++i)
                e = std::max(e, std::abs((sol.at(i, j) - sol.mean) - (theta({i * sol.hx, j * sol.hy}) - mean)));
        hs.push_back(sol.hx);
        es.push_back(e);
        conv.add_row({sol.hx, e, sol.residual});
    }
    const double order = ols_slope(hs, es);
    out.scalars["theta_order"] = order;
    out.check("theta_order", std::abs(order - 2.0) <= 0.2, order, 2.0, "OLS slope of max error against h");

    bool rejected = false;
    double defect = 0.0;
    try {
        (void)layer::solve_theta(box, 17, 17, [](const Vec2&) { return 1.0; }, no_flux);
    } catch (const DefectError& e) {
        rejected = true;
        defect = e.defect();
    }
    out.scalars["incompatible_defect"] = defect;
    out.check("rejects_incompatible_data", rejected, defect, 1e-8, "unit source with zero flux");
    out.add_series("theta_convergence", std::move(conv));
    out.plots.push_back({"theta_convergence", "loglog", true, "theta_order"});
}

// vorticity-patch ---------------------------------------------------------------------------

void run_vorticity(const Params& p, std::uint64_t, ScenarioOutput& out) {
    const auto setup = channel_setup(p);
    const Partition part = build_partition(setup.flow, setup.domain, setup.patches, p.real("eps"));
    const auto u = lift::bump_vortex({p.real("vortex_x"), p.real("vortex_y")}, p.real("vortex_radius"),
                                     p.real("vortex_amplitude"));
    lift::VorticityOptions o;
    o.patch_grid = as_size(p.integer("patch_grid"));
    o.samples_per_window = as_size(p.integer("samples_per_window"));
    o.check_grid = as_size(p.integer("check_grid"));
    o.tol = p.real("tol");
    const auto rep = lift::vorticity_patch_control(u, setup.flow, setup.domain, part, o);

    double support = 0.0, mean_defect = 0.0;
    std::size_t boundary = 0;
    csv::Table pieces({"ball", "patch", "boundary", "flipped", "t_center", "max_forcing", "curl_error", "mean_defect"});
    for (const auto& pc : rep.pieces) {
        for (const auto& l : pc.lifts) support = std::max(support, lift::support_violation(l, pc.kind));
        mean_defect = std::max(mean_defect, pc.mean_defect);
        boundary += pc.kind == lift::PatchKind::boundary;
        pieces.add_row({static_cast<double>(pc.ball), static_cast<double>(pc.patch),
                        pc.kind == lift::PatchKind::boundary ? 1.0 : 0.0, pc.flipped ? 1.0 : 0.0, pc.t_center,
                        pc.max_forcing, pc.curl_error, pc.mean_defect});
    }
    out.scalars["pieces"] = static_cast<double>(rep.pieces.size());
    out.scalars["boundary_pieces"] = static_cast<double>(boundary);
    out.scalars["max_omega_T"] = rep.max_omega_T;
    out.scalars["max_omega_T_ode"] = rep.max_omega_T_ode;
    out.scalars["max_initial"] = rep.max_initial;
    out.scalars["max_forcing"] = rep.max_forcing;
    out.scalars["max_curl_error"] = rep.max_curl_error;
    out.scalars["relative_curl_error"] = rep.max_forcing > 0.0 ? rep.max_curl_error / rep.max_forcing : 0.0;
    out.scalars["max_mean_defect"] = mean_defect;
    out.check("vorticity_at_T", rep.max_omega_T <= 1e-8, rep.max_omega_T, 1e-8, "max |omega(T)| on the check grids");
    out.check("vorticity_at_T_characteristics", rep.max_omega_T_ode <= 1e-8, rep.max_omega_T_ode, 1e-8,
              "same target integrated along characteristics with the lifted forces");
    out.check("forces_inside_patches", rep.max_force_outside == 0.0, rep.max_force_outside, 0.0,
              "forces sampled outside their patches");
    out.check("lift_support_exact", support == 0.0, support, 0.0, "lift values on the excluded sides");
    out.add_series("history", rep.history);
    out.add_series("pieces", std::move(pieces));
    out.plots.push_back({"history", "linear", false, {}});
}

std::vector<ParamSpec> channel_schema() {
    return {real("T", 1.0, 1e-3, 100.0, "horizon of the reference flow"),
            real("displacement", 1.2, 0.0, 100.0, "integral of the channel velocity profile"),
            real("extended_x1", 2.3, 1.5, 10.0, "right end of the extended box"),
            real("eps", 0.05, 1e-3, 0.2, "half-width of the control windows")};
}

std::vector<Scenario> build() {
    std::vector<Scenario> s;
    s.push_back({"heat-decay", "weighted heat decay of data with vanishing moments",
                 {integer("n", 1, 0, 6, "number of vanishing moments"),
                  integer("m", 0, 0, 6, "weight index of the measured norm"),
                  integer("s", 0, 0, 3, "derivative order of the measured norm"),
                  real("t0", 10.0, 1e-3, 1e6, "first time of the ladder"),
                  real("t1", 1e4, 1e-2, 1e6, "last time of the ladder"),
                  integer("points", 32, 3, 512, "ladder size"),
                  real("width", 1.0, 0.1, 10.0, "Gaussian width of the initial datum")},
                 run_heat_decay});
    auto mc = channel_schema();
    mc.push_back(real("alpha", 0.5, -10.0, 10.0, "friction coefficient (M = alpha I)"));
    mc.push_back(integer("k_max", 2, 0, 6, "highest even moment to cancel"));
    mc.push_back(integer("cloud", 20, 2, 100, "Lagrangian cloud points per side"));
    mc.push_back(real("tol", 1e-12, 1e-15, 1e-6, "integrator tolerance"));
    mc.push_back(integer("amplitude_grid", 3, 0, 16, "amplitude samples per side in the schedule manifest"));
    s.push_back({"moment-control", "moment cascade preparation on the channel", mc, run_moment_control});
    s.push_back({"toy-exact-growth", "growth of exact inlet data for the toy layer",
                 {real("T", 0.5, 1e-3, 10.0, "final time"), real("T_star", 0.0, 0.0, 10.0, "entry time"),
                  integer("n_max", 4, 1, 16, "highest mode")},
                 run_toy_exact_growth});
    s.push_back({"toy-lowmode", "low-mode inlet control of the toy layer",
                 {integer("N", 4, 0, 8, "controlled modes"), real("T", 1.0, 0.25, 10.0, "control horizon"),
                  integer("nx", 32, 8, 512, "slices per unit length (also 1 / dt)"),
                  integer("nz", 64, 8, 1024, "intervals in z"),
                  real("window", 0.2, 0.05, 2.0, "free decay window after T"),
                  real("amplitude", 1.0, -100.0, 100.0, "pollution amplitude"),
                  boolean("parity", true, "run the modal parity study"),
                  real("parity_T", 0.5, 0.1, 0.9, "horizon of the parity study")},
                 run_toy_lowmode});
    const std::vector<ParamSpec> lift_schema{integer("modes", 3, 1, 16, "random terms per potential"),
                                             integer("n0", 32, 4, 256, "coarsest grid intervals"),
                                             integer("levels", 3, 2, 5, "refinement levels")};
    s.push_back({"curl-lift-2d", "planar curl lifting on the unit square", lift_schema, run_curl_lift_2d});
    s.push_back({"curl-lift-3d", "spatial curl lifting on the unit cube", lift_schema, run_curl_lift_3d});
    s.push_back({"flushing", "flushing and support growth of a reference flow",
                 {choice("flow", "uniform-channel", {"uniform-channel", "perturbed-channel"}, "flow family"),
                  real("T", 1.0, 1e-3, 100.0, "horizon"), real("displacement", 1.2, 0.0, 100.0, "channel displacement"),
                  real("kappa", 0.2, 0.0, 1.0, "perturbation strength"),
                  real("extended_x1", 2.3, 1.5, 10.0, "right end of the extended box"),
                  real("delta", 0.05, 1e-4, 1.0, "exit margin"),
                  real("dt_obs", 1.0 / 256, 1e-5, 0.5, "observation step"), integer("grid", 16, 2, 128, "points per side"),
                  integer("time_grid", 32, 2, 256, "time grid of the support growth sweep"),
                  real("tol", 1e-10, 1e-14, 1e-4, "integrator tolerance")},
                 run_flushing});
    s.push_back({"correctors", "corrector identities and the Neumann solver",
                 {real("alpha", 0.5, -10.0, 10.0, "friction coefficient"),
                  integer("n0", 17, 5, 513, "coarsest node count"), integer("levels", 4, 2, 6, "refinement levels")},
                 run_correctors});
    auto vs = channel_schema();
    vs.push_back(integer("patch_grid", 32, 8, 256, "patch grid intervals (even)"));
    vs.push_back(integer("samples_per_window", 9, 2, 64, "force samples per window"));
    vs.push_back(integer("check_grid", 21, 3, 201, "check points per side"));
    vs.push_back(real("tol", 1e-12, 1e-15, 1e-6, "integrator tolerance"));
    vs.push_back(real("vortex_x", 0.5, 0.0, 1.0, "vortex center x"));
    vs.push_back(real("vortex_y", 0.5, 0.0, 1.0, "vortex center y"));
    vs.push_back(real("vortex_radius", 0.12, 0.01, 0.5, "vortex radius"));
    vs.push_back(real("vortex_amplitude", 1.0, -100.0, 100.0, "stream function amplitude"));
    s.push_back({"vorticity-patch", "patchwise vorticity control by curl lifting", vs, run_vorticity});
    return s;
}

}  // namespace

const std::vector<Scenario>& scenarios() {
    static const std::vector<Scenario> all = build();
    return all;
}

const Scenario* find_scenario(const std::string& name) {
    for (const Scenario& s : scenarios())
        if (s.name == name) return &s;
    return nullptr;
}

}  // namespace layerctl::report
