#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "doctest.h"
#include "layerctl/report.hpp"

using namespace layerctl;
using namespace layerctl::report;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const char* root = std::getenv("LAYERCTL_TEST_TMP");
    fs::path p = fs::path(root && *root ? root : fs::temp_directory_path().string()) / ("report_" + name);
    fs::remove_all(p);
    return p;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

RunConfig config(const std::string& scenario, const fs::path& dir, std::map<std::string, std::string> params = {}) {
    RunConfig c;
    c.scenario = scenario;
    c.output_dir = dir.string();
    c.seed = 3;
    c.raw_params = std::move(params);
    return c;
}

std::size_t count_elements(const boost::property_tree::ptree& t, const std::string& name) {
    std::size_t n = 0;
    for (const auto& [k, v] : t) n += (k == name) + count_elements(v, name);
    return n;
}

}  // namespace

TEST_CASE("config text parses into sections") {
    const auto c = parse_config("[run]\nscenario = heat-decay\nseed = 11\noutput_dir = out/x\n\n[params]\nn = 2\n");
    CHECK(c.scenario == "heat-decay");
    CHECK(c.seed == 11);
    CHECK(c.output_dir == "out/x");
    CHECK(c.raw_params.at("n") == "2");
    CHECK(parse_config("[run]\nscenario = flushing\n").output_dir == "runs/flushing");
}

TEST_CASE("malformed configs name the offending field") {
    auto field_of = [](const std::string& text) {
        try {
            (void)parse_config(text);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of("[run]\nseed = 1\n") == "scenario");
    CHECK(field_of("[run]\nscenario = a\nseed = -3\n") == "seed");
    CHECK(field_of("[run]\nscenario = a\ncolour = red\n") == "colour");
    CHECK(field_of("[other]\nx = 1\n") == "other");
    CHECK_THROWS_AS(parse_config("[run\nscenario = a\n"), ConfigError);
    CHECK_THROWS_AS(parse_config("[run]\nscenario = a\nscenario = b\n"), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/file.ini"), ConfigError);
}

TEST_CASE("parameters are validated against the schema") {
    const Scenario* s = find_scenario("heat-decay");
    REQUIRE(s);
    const Params p = validate(*s, {{"n", "3"}, {"width", "1.5"}});
    CHECK(p.integer("n") == 3);
    CHECK(p.real("width") == 1.5);
    CHECK(p.integer("m") == 0);
    auto field_of = [&](std::map<std::string, std::string> raw) {
        try {
            (void)validate(*s, raw);
        } catch (const ConfigError& e) {
            return e.field();
        }
        return std::string("<none>");
    };
    CHECK(field_of({{"n", "1.5"}}) == "n");
    CHECK(field_of({{"n", "99"}}) == "n");
    CHECK(field_of({{"width", "wide"}}) == "width");
    CHECK(field_of({{"width", "nan"}}) == "width");
    CHECK(field_of({{"nn", "1"}}) == "nn");
    const Scenario* f = find_scenario("flushing");
    REQUIRE(f);
    CHECK_THROWS_AS(validate(*f, {{"flow", "vortex"}}), ConfigError);
    CHECK(validate(*f, {{"flow", "perturbed-channel"}}).string("flow") == "perturbed-channel");
}

TEST_CASE("all shipped scenarios are registered") {
    for (const char* name : {"heat-decay", "moment-control", "toy-exact-growth", "toy-lowmode", "curl-lift-2d",
                             "curl-lift-3d", "flushing", "correctors", "vorticity-patch"})
        CHECK(find_scenario(name) != nullptr);
    CHECK(find_scenario("nope") == nullptr);
}

TEST_CASE("unknown scenario writes nothing") {
    const fs::path dir = scratch("unknown");
    CHECK_THROWS_AS(run_scenario(config("does-not-exist", dir)), ConfigError);
    CHECK_THROWS_AS(run_scenario(config("heat-decay", dir, {{"n", "x"}})), ConfigError);
    CHECK_FALSE(fs::exists(dir));
}

TEST_CASE("heat-decay report carries the fitted slope and pass flags") {
    const fs::path dir = scratch("heat");
    const RunReport r = run_scenario(config("heat-decay", dir));
    CHECK(r.scalars.at("fit_slope") == doctest::Approx(0.75).epsilon(0.05 / 0.75));
    bool found = false;
    for (const Check& c : r.checks)
        if (c.name == "power_law_exponent") {
            found = true;
            CHECK(c.passed);
        }
    CHECK(found);
    CHECK(fs::exists(dir / "manifest.json"));
    CHECK(fs::exists(dir / "decay.csv"));
    CHECK(fs::exists(dir / "loglog.svg"));
    // The exit code follows the checks.
    CHECK(r.exit_code() == (r.passed() ? 0 : 1));
}

TEST_CASE("annotated slope matches the report scalar") {
    const fs::path dir = scratch("slope");
    const RunReport r = run_scenario(config("heat-decay", dir, {{"n", "2"}}));
    const std::string svg = slurp(dir / "loglog.svg");
    const auto pos = svg.find("slope = ");
    REQUIRE(pos != std::string::npos);
    const double shown = std::stod(svg.substr(pos + 8, 12));
    CHECK(std::abs(shown - r.scalars.at("loglog_slope")) <= 5e-4);
}

TEST_CASE("same config and seed give identical series bytes") {
    const fs::path a = scratch("det_a"), b = scratch("det_b");
    const RunReport ra = run_scenario(config("curl-lift-2d", a));
    const RunReport rb = run_scenario(config("curl-lift-2d", b));
    REQUIRE(ra.series_files == rb.series_files);
    for (const auto& [name, file] : ra.series_files) CHECK(slurp(a / file) == slurp(b / file));
    for (const auto& file : ra.plots) CHECK(slurp(a / file) == slurp(b / file));
    const auto d = compare_runs(a.string(), (b / "manifest.json").string(), 0.0);
    CHECK(d.empty());
    CHECK(d.compared.size() == ra.series_files.size());
}

TEST_CASE("different seeds change the random fields") {
    const fs::path a = scratch("seed_a"), b = scratch("seed_b");
    RunConfig ca = config("curl-lift-2d", a), cb = config("curl-lift-2d", b);
    cb.seed = 4;
    (void)run_scenario(ca);
    (void)run_scenario(cb);
    CHECK(slurp(a / "patch.csv") != slurp(b / "patch.csv"));
    const auto d = compare_runs(a.string(), b.string(), 0.0);
    CHECK_FALSE(d.empty());
    // Generous tolerance hides the field differences but keeps shape.
    CHECK(compare_runs(a.string(), b.string(), 1e3).empty());
}

TEST_CASE("compare_runs lists only cells above tolerance across resolutions") {
    const fs::path a = scratch("res_a"), b = scratch("res_b");
    (void)run_scenario(config("correctors", a, {{"n0", "17"}}));
    (void)run_scenario(config("correctors", b, {{"n0", "33"}}));
    const auto d = compare_runs(a.string(), b.string(), 1e-3);
    CHECK_FALSE(d.empty());
    for (const auto& c : d.cells) CHECK(std::abs(c.a - c.b) > 1e-3);
    CHECK(d.to_string().find("divergent cells") != std::string::npos);
}

TEST_CASE("compare_runs schema errors") {
    const fs::path a = scratch("schema_a"), b = scratch("schema_b");
    (void)run_scenario(config("toy-exact-growth", a));
    (void)run_scenario(config("correctors", b));
    CHECK_THROWS_AS(compare_runs(a.string(), b.string(), 0.0), SchemaError);
    // Remove a series from a copy of the manifest.
    const fs::path c = scratch("schema_c");
    (void)run_scenario(config("correctors", c));
    std::string m = slurp(c / "manifest.json");
    const auto pos = m.find("\"theta_convergence\": \"theta_convergence.csv\"");
    REQUIRE(pos != std::string::npos);
    m.replace(pos, std::string("\"theta_convergence\": \"theta_convergence.csv\"").size(), "\"other\": \"corrector_w.csv\"");
    std::ofstream(c / "manifest.json", std::ios::binary) << m;
    CHECK_THROWS_AS(compare_runs(b.string(), c.string(), 0.0), SchemaError);
    CHECK_THROWS_AS(compare_runs(b.string(), (c / "missing.json").string(), 0.0), SchemaError);
}

TEST_CASE("emit_plot produces well-formed SVG with one path per series") {
    csv::Table t({"t", "a", "b", "c"});
    for (int i = 1; i <= 10; ++i) t.add_row({double(i), 1.0 / i, 1.0 / (i * i), std::exp(-i)});
    for (const char* style : {"loglog", "linear"}) {
        PlotOptions o;
        o.style = style;
        o.annotate_slope = true;
        o.title = "a < b & c";
        std::istringstream in(emit_plot(t, o));
        boost::property_tree::ptree tree;
        REQUIRE_NOTHROW(boost::property_tree::read_xml(in, tree));
        CHECK(count_elements(tree, "path") == 3);
        CHECK(count_elements(tree, "svg") == 1);
    }
    CHECK(plot_slope(t, "loglog") == doctest::Approx(-1.0));
}

TEST_CASE("emit_plot rejects empty or non-numeric series") {
    CHECK_THROWS_AS(emit_plot(csv::Table({"t", "y"})), PreconditionError);
    csv::Table bad({"t", "y"});
    bad.add_row({1.0, NAN});
    CHECK_THROWS_AS(emit_plot(bad), PreconditionError);
    CHECK_THROWS_AS(csv::Table::parse("t,y\n1,abc\n"), PreconditionError);
    csv::Table ok({"t", "y"});
    ok.add_row({1.0, 2.0});
    PlotOptions o;
    o.style = "polar";
    CHECK_THROWS_AS(emit_plot(ok, o), PreconditionError);
}

TEST_CASE("output root override applies to relative paths only") {
    ::setenv("LAYERCTL_OUTPUT_ROOT", "/tmp/root_override", 1);
    CHECK(resolve_output_dir("runs/a") == "/tmp/root_override/runs/a");
    CHECK(resolve_output_dir("/abs/b") == "/abs/b");
    ::unsetenv("LAYERCTL_OUTPUT_ROOT");
    CHECK(resolve_output_dir("runs/a") == "runs/a");
}

TEST_CASE("CSV round-trips with 17 significant digits") {
    csv::Table t({"x"});
    t.add_row({0.1});
    t.add_row({1.0 / 3.0});
    t.add_row({-2.5e-300});
    const auto back = csv::Table::parse(t.to_string());
    for (std::size_t i = 0; i < t.size(); ++i) CHECK(back.rows()[i][0] == t.rows()[i][0]);
}
