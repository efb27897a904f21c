// Command-line runner: run, compare, plot, scenarios.
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "layerctl/report.hpp"

namespace rpt = layerctl::report;

namespace {

constexpr int exit_usage = 2;

int print_config_error(const rpt::ConfigError& e) {
    std::cerr << "config error";
    if (!e.field().empty()) std::cerr << " [" << e.field() << "]";
    std::cerr << ": " << e.what() << '\n';
    return exit_usage;
}

void apply_override(rpt::RunConfig& cfg, const std::string& kv) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw rpt::ConfigError("--set expects key=value, got '" + kv + "'", kv);
    const std::string key = kv.substr(0, eq), value = kv.substr(eq + 1);
    if (key == "seed" || key == "run.seed") {
        std::istringstream in(value);
        std::uint64_t s = 0;
        if (!(in >> s) || !in.eof()) throw rpt::ConfigError("seed must be a non-negative integer", "seed");
        cfg.seed = s;
    } else if (key == "output_dir" || key == "run.output_dir") {
        cfg.output_dir = value;
    } else if (key == "scenario" || key == "run.scenario") {
        cfg.scenario = value;
    } else {
        cfg.raw_params[key.rfind("params.", 0) == 0 ? key.substr(7) : key] = value;
    }
}

int cmd_run(const std::string& path, const std::vector<std::string>& sets, bool quiet) {
    try {
        rpt::RunConfig cfg = rpt::load_config(path);
        for (const auto& kv : sets) apply_override(cfg, kv);
        const rpt::RunReport rep = rpt::run_scenario(cfg);
        if (!quiet) {
            for (const auto& c : rep.checks)
                std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << "  value=" << c.value
                          << "  threshold=" << c.threshold << '\n';
            for (const auto& e : rep.errors) std::cout << "ERROR " << e << '\n';
            std::cout << rep.scenario << ": " << (rep.passed() ? "passed" : "failed") << " in " << rep.wall_time
                      << " s, output in " << rep.output_dir << '\n';
        }
        return rep.exit_code();
    } catch (const rpt::ConfigError& e) {
        return print_config_error(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}

int cmd_compare(const std::string& a, const std::string& b, double tol) {
    try {
        const auto d = rpt::compare_runs(a, b, tol);
        std::cout << d.to_string();
        return d.empty() ? 0 : 1;
    } catch (const rpt::SchemaError& e) {
        std::cerr << "schema error: " << e.what() << '\n';
        return exit_usage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

int cmd_plot(const std::string& csv_path, const std::string& style, bool annotate, const std::string& out) {
    try {
        const auto table = layerctl::csv::Table::read(csv_path);
        rpt::PlotOptions po;
        po.style = style;
        po.annotate_slope = annotate;
        po.title = csv_path;
        const std::string svg = rpt::emit_plot(table, po);
        if (out.empty()) {
            std::cout << svg;
        } else {
            std::ofstream f(out, std::ios::binary);
            if (!(f << svg)) throw layerctl::Error("cannot write '" + out + "'");
        }
        if (annotate) std::cerr << "slope = " << layerctl::csv::format_number(rpt::plot_slope(table, style)) << '\n';
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_usage;
    }
}

int cmd_scenarios() {
    for (const auto& s : rpt::scenarios()) {
        std::cout << s.name << "  " << s.description << '\n';
        for (const auto& p : s.schema) {
            std::cout << "    " << p.name << " = ";
            std::visit([](const auto& v) { std::cout << v; }, p.default_value);
            std::cout << "  " << p.help << '\n';
        }
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"layerctl scenario runner"};
    app.require_subcommand(1);

    std::string config;
    std::vector<std::string> sets;
    bool quiet = false;
    auto* run = app.add_subcommand("run", "run a scenario from a config file");
    run->add_option("config", config, "config file ([run] and [params] sections)")->required();
    run->add_option("--set", sets, "override key=value (seed, output_dir or a parameter)");
    run->add_flag("-q,--quiet", quiet, "suppress the check listing");

    std::string a, b;
    double tol = 0.0;
    auto* cmp = app.add_subcommand("compare", "compare two run directories or manifests");
    cmp->add_option("a", a)->required();
    cmp->add_option("b", b)->required();
    cmp->add_option("--tol", tol, "absolute tolerance per cell")->default_val(0.0);

    std::string csv_path, style = "loglog", out;
    bool annotate = false;
    auto* plot = app.add_subcommand("plot", "render a CSV series as SVG");
    plot->add_option("csv", csv_path)->required();
    plot->add_option("--style", style)->check(CLI::IsMember({"loglog", "linear"}))->default_val("loglog");
    plot->add_flag("--annotate", annotate, "print the fitted slope of the first y column");
    plot->add_option("--out,-o", out, "output file (default stdout)");

    auto* list = app.add_subcommand("scenarios", "list scenarios and their parameters");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : exit_usage;
    }
    if (*run) return cmd_run(config, sets, quiet);
    if (*cmp) return cmd_compare(a, b, tol);
    if (*plot) return cmd_plot(csv_path, style, annotate, out);
    if (*list) return cmd_scenarios();
    return exit_usage;
}
