#pragma once

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "layerctl/csv.hpp"
#include "layerctl/errors.hpp"

namespace layerctl::report {

/// Bad configuration or usage; maps to exit code 2. `field` names the offending key when known.
class ConfigError : public Error {
public:
    ConfigError(const std::string& what, std::string field = {}) : Error(what), field_(std::move(field)) {}
    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Manifests that cannot be compared: different scenarios or missing series.
class SchemaError : public Error {
public:
    using Error::Error;
};

using Value = std::variant<std::int64_t, double, bool, std::string>;

enum class ParamType { integer, real, boolean, string };

struct ParamSpec {
    std::string name;
    ParamType type = ParamType::real;
    Value default_value;
    std::optional<double> min, max;   ///< numeric bounds, inclusive
    std::vector<std::string> choices;  ///< allowed strings
    std::string help;
};

class Params {
public:
    Params() = default;
    explicit Params(std::map<std::string, Value> values) : values_(std::move(values)) {}
    const std::map<std::string, Value>& values() const { return values_; }
    std::int64_t integer(const std::string& k) const;
    double real(const std::string& k) const;
    bool boolean(const std::string& k) const;
    const std::string& string(const std::string& k) const;

private:
    std::map<std::string, Value> values_;
};

struct RunConfig {
    std::string scenario;
    std::uint64_t seed = 1;
    std::string output_dir;
    std::map<std::string, std::string> raw_params;  ///< unvalidated text values
};

/// Sectioned key = value text: [run] scenario, seed, output_dir; [params] scenario parameters.
RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);

struct Check {
    std::string name;
    bool passed = false;
    double value = 0.0;
    double threshold = 0.0;
    std::string detail;
};

struct PlotSpec {
    std::string series;
    std::string style = "loglog";  ///< loglog | linear
    bool annotate_slope = false;
    std::string slope_scalar;       ///< scalar the annotation should reproduce
};

struct ScenarioOutput {
    std::vector<std::pair<std::string, csv::Table>> series;
    std::map<std::string, double> scalars;
    std::vector<Check> checks;
    std::vector<PlotSpec> plots;
    std::vector<std::pair<std::string, std::string>> texts;  ///< extra text files (name, content)

    void add_series(std::string name, csv::Table t) { series.emplace_back(std::move(name), std::move(t)); }
    void check(std::string name, bool passed, double value, double threshold, std::string detail = {});
};

struct Scenario {
    std::string name;
    std::string description;
    std::vector<ParamSpec> schema;
    std::function<void(const Params&, std::uint64_t seed, ScenarioOutput&)> run;
};

const std::vector<Scenario>& scenarios();
const Scenario* find_scenario(const std::string& name);

/// Typed, range-checked parameters against the schema; throws ConfigError naming the field.
Params validate(const Scenario& s, const std::map<std::string, std::string>& raw);

struct RunReport {
    std::string scenario;
    std::uint64_t seed = 1;
    std::map<std::string, Value> params;
    std::string output_dir;
    std::map<std::string, std::string> series_files;
    std::map<std::string, double> scalars;
    std::vector<Check> checks;
    std::vector<std::string> plots;
    std::vector<std::string> errors;
    double wall_time = 0.0;
    bool passed() const;
    int exit_code() const { return passed() ? 0 : 1; }
};

/// Output directory after applying the LAYERCTL_OUTPUT_ROOT override to relative paths.
std::string resolve_output_dir(const std::string& dir);

/// Validates, executes and persists one scenario (manifest.json, CSV series, SVG plots).
/// Throws ConfigError before touching the file system; library errors become failed checks.
RunReport run_scenario(const RunConfig& config);

struct DiffCell {
    std::string series;
    std::size_t row = 0;
    std::string column;
    double a = 0.0, b = 0.0;
};

struct DiffSummary {
    std::string scenario;
    std::vector<std::string> compared;
    std::vector<std::string> shape_notes;  ///< series with differing row counts
    std::vector<DiffCell> cells;           ///< |a - b| > tol
    bool empty() const { return cells.empty(); }
    std::string to_string() const;
};

/// Elementwise comparison of shared series; `a` and `b` are run directories or manifest paths.
DiffSummary compare_runs(const std::string& a, const std::string& b, double tol);

struct PlotOptions {
    std::string style = "loglog";
    bool annotate_slope = false;
    std::string title;
};

/// Self-contained SVG: first column on x, one path per remaining column; optional OLS slope
/// annotation (log-log or linear according to the style) on the first y column.
std::string emit_plot(const csv::Table& series, const PlotOptions& opt = {});
/// The slope the annotation prints.
double plot_slope(const csv::Table& series, const std::string& style);

}  // namespace layerctl::report
