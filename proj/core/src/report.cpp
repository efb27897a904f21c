#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "layerctl/report.hpp"

namespace layerctl::report {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json to_json(const Value& v) {
    return std::visit([](const auto& x) { return json(x); }, v);
}

json number(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

void write_file(const fs::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot write '" + path.string() + "'");
    out << content;
    if (!out) throw Error("write failed for '" + path.string() + "'");
}

fs::path manifest_path(const std::string& p) {
    fs::path path(p);
    if (fs::is_directory(path)) path /= "manifest.json";
    return path;
}

json read_manifest(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw SchemaError("cannot read manifest '" + path.string() + "'");
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw SchemaError("manifest '" + path.string() + "' does not parse: " + e.what());
    }
}

}  // namespace

bool RunReport::passed() const {
    if (!errors.empty() || checks.empty()) return false;
    for (const Check& c : checks)
        if (!c.passed) return false;
    return true;
}

std::string resolve_output_dir(const std::string& dir) {
    const fs::path p(dir);
    if (p.is_absolute()) return p.lexically_normal().string();
    if (const char* root = std::getenv("LAYERCTL_OUTPUT_ROOT"); root && *root)
        return (fs::path(root) / p).lexically_normal().string();
    return p.lexically_normal().string();
}

RunReport run_scenario(const RunConfig& config) {
    const Scenario* sc = find_scenario(config.scenario);
    if (!sc) {
        std::string names;
        for (const Scenario& s : scenarios()) names += (names.empty() ? "" : ", ") + s.name;
        throw ConfigError("unknown scenario '" + config.scenario + "' (available: " + names + ")", "scenario");
    }
    if (config.output_dir.empty()) throw ConfigError("run.output_dir is empty", "output_dir");
    const Params params = validate(*sc, config.raw_params);

    RunReport rep;
    rep.scenario = sc->name;
    rep.seed = config.seed;
    rep.params = params.values();
    rep.output_dir = resolve_output_dir(config.output_dir);

    // Compute everything in memory first so configuration errors leave no files behind.
    ScenarioOutput out;
    const auto start = std::chrono::steady_clock::now();
    try {
        sc->run(params, config.seed, out);
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        rep.errors.push_back(e.what());
        out.check("execution", false, 0.0, 0.0, e.what());
    }
    rep.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::vector<std::pair<std::string, std::string>> svgs;
    for (const PlotSpec& ps : out.plots) {
        const auto it = std::find_if(out.series.begin(), out.series.end(),
                                     [&](const auto& s) { return s.first == ps.series; });
        if (it == out.series.end()) continue;
        try {
            PlotOptions po;
            po.style = ps.style;
            po.annotate_slope = ps.annotate_slope;
            po.title = sc->name + ": " + ps.series;
            svgs.emplace_back(ps.series + ".svg", emit_plot(it->second, po));
            if (ps.annotate_slope && !ps.slope_scalar.empty() && out.scalars.count(ps.slope_scalar)) {
                const double a = plot_slope(it->second, ps.style), b = out.scalars.at(ps.slope_scalar);
                out.check("plot_annotation_" + ps.series, std::abs(a - b) <= 5e-4, std::abs(a - b), 5e-4,
                          "annotated slope against scalar " + ps.slope_scalar);
            }
        } catch (const Error& e) {
            rep.errors.push_back(std::string("plot ") + ps.series + ": " + e.what());
        }
    }
    rep.scalars = out.scalars;
    rep.checks = out.checks;

    const fs::path dir(rep.output_dir);
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) throw Error("cannot create output directory '" + dir.string() + "': " + ec.message());
    for (const auto& [name, table] : out.series) {
        const std::string file = name + ".csv";
        write_file(dir / file, table.to_string());
        rep.series_files[name] = file;
    }
    for (const auto& [file, text] : svgs) {
        write_file(dir / file, text);
        rep.plots.push_back(file);
    }
    std::vector<std::string> texts;
    for (const auto& [file, text] : out.texts) {
        write_file(dir / file, text);
        texts.push_back(file);
    }

    json m;
    m["scenario"] = rep.scenario;
    m["seed"] = rep.seed;
    json pj = json::object();
    for (const auto& [k, v] : rep.params) pj[k] = to_json(v);
    m["params"] = pj;
    m["series"] = rep.series_files;
    m["plots"] = rep.plots;
    m["texts"] = texts;
    json sj = json::object();
    for (const auto& [k, v] : rep.scalars) sj[k] = number(v);
    m["scalars"] = sj;
    json cj = json::array();
    for (const Check& c : rep.checks)
        cj.push_back({{"name", c.name},
                      {"passed", c.passed},
                      {"value", number(c.value)},
                      {"threshold", number(c.threshold)},
                      {"detail", c.detail}});
    m["checks"] = cj;
    m["errors"] = rep.errors;
    m["passed"] = rep.passed();
    m["wall_time_s"] = rep.wall_time;
    write_file(dir / "manifest.json", m.dump(2) + "\n");
    return rep;
}

std::string DiffSummary::to_string() const {
    std::ostringstream os;
    os << "scenario " << scenario << ": " << compared.size() << " series compared, " << cells.size()
       << " divergent cells\n";
    for (const auto& s : shape_notes) os << "  note: " << s << '\n';
    for (const DiffCell& c : cells)
        os << "  " << c.series << "[" << c.row << "]." << c.column << ": " << csv::format_number(c.a) << " vs "
           << csv::format_number(c.b) << " (|diff| " << csv::format_number(std::abs(c.a - c.b)) << ")\n";
    return os.str();
}

DiffSummary compare_runs(const std::string& a, const std::string& b, double tol) {
    if (!(tol >= 0.0)) throw PreconditionError("compare_runs: tol must be nonnegative");
    const fs::path pa = manifest_path(a), pb = manifest_path(b);
    const json ma = read_manifest(pa), mb = read_manifest(pb);
    if (!ma.contains("scenario") || !mb.contains("scenario") || !ma.contains("series") || !mb.contains("series"))
        throw SchemaError("compare_runs: manifest lacks scenario or series");
    DiffSummary d;
    d.scenario = ma["scenario"].get<std::string>();
    if (d.scenario != mb["scenario"].get<std::string>())
        throw SchemaError("compare_runs: scenario mismatch (" + d.scenario + " vs " +
                          mb["scenario"].get<std::string>() + ")");
    const auto& sa = ma["series"];
    const auto& sb = mb["series"];
    for (const auto& [name, _] : sb.items())
        if (!sa.contains(name)) throw SchemaError("compare_runs: series '" + name + "' missing from " + pa.string());
    for (const auto& [name, file] : sa.items()) {
        if (!sb.contains(name)) throw SchemaError("compare_runs: series '" + name + "' missing from " + pb.string());
        const csv::Table ta = csv::Table::read((pa.parent_path() / file.get<std::string>()).string());
        const csv::Table tb = csv::Table::read((pb.parent_path() / sb[name].get<std::string>()).string());
        d.compared.push_back(name);
        if (ta.size() != tb.size())
            d.shape_notes.push_back(name + ": " + std::to_string(ta.size()) + " vs " + std::to_string(tb.size()) +
                                    " rows, shared rows compared");
        const std::size_t rows = std::min(ta.size(), tb.size());
        for (std::size_t ca = 0; ca < ta.columns().size(); ++ca) {
            const std::string& col = ta.columns()[ca];
            const auto it = std::find(tb.columns().begin(), tb.columns().end(), col);
            if (it == tb.columns().end()) {
                d.shape_notes.push_back(name + ": column '" + col + "' only in the first run");
                continue;
            }
            const auto cb = static_cast<std::size_t>(it - tb.columns().begin());
            for (std::size_t r = 0; r < rows; ++r) {
                const double x = ta.rows()[r][ca], y = tb.rows()[r][cb];
                const bool same_nan = std::isnan(x) && std::isnan(y);
                if (!same_nan && !(std::abs(x - y) <= tol)) d.cells.push_back({name, r, col, x, y});
            }
        }
    }
    return d;
}

}  // namespace layerctl::report
