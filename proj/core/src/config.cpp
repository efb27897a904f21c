#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "layerctl/report.hpp"

namespace layerctl::report {

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

template <class T>
const T& get_as(const std::map<std::string, Value>& m, const std::string& k, const char* type) {
    const auto it = m.find(k);
    if (it == m.end()) throw ConfigError("missing parameter '" + k + "'", k);
    const T* p = std::get_if<T>(&it->second);
    if (!p) throw ConfigError("parameter '" + k + "' is not " + type, k);
    return *p;
}

bool parse_int(const std::string& s, std::int64_t& out) {
    const char* b = s.data();
    const char* e = b + s.size();
    if (b != e && *b == '+') ++b;
    const auto r = std::from_chars(b, e, out);
    return r.ec == std::errc{} && r.ptr == e && b != e;
}

bool parse_real(const std::string& s, double& out) {
    if (s.empty()) return false;
    std::istringstream in(s);
    in.imbue(std::locale::classic());
    in >> out;
    return !in.fail() && in.peek() == std::char_traits<char>::eof() && std::isfinite(out);
}

const char* type_name(ParamType t) {
    switch (t) {
        case ParamType::integer: return "an integer";
        case ParamType::real: return "a number";
        case ParamType::boolean: return "a boolean";
        case ParamType::string: return "a string";
    }
    return "a value";
}

}  // namespace

std::int64_t Params::integer(const std::string& k) const {
    return get_as<std::int64_t>(values_, k, "an integer");
}
double Params::real(const std::string& k) const { return get_as<double>(values_, k, "a number"); }
bool Params::boolean(const std::string& k) const { return get_as<bool>(values_, k, "a boolean"); }
const std::string& Params::string(const std::string& k) const {
    return get_as<std::string>(values_, k, "a string");
}

RunConfig parse_config(const std::string& text) {
    namespace pt = boost::property_tree;
    pt::ptree tree;
    try {
        std::istringstream in(text);
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        const std::string line = e.line() ? " (line " + std::to_string(e.line()) + ")" : "";
        throw ConfigError("malformed config: " + e.message() + line);
    }
    RunConfig cfg;
    bool have_run = false;
    for (const auto& [section, body] : tree) {
        if (body.empty() && !body.data().empty())
            throw ConfigError("key '" + section + "' outside of a section", section);
        if (section == "run") {
            have_run = true;
            for (const auto& [key, node] : body) {
                const std::string v = trim(node.data());
                if (key == "scenario") {
                    cfg.scenario = v;
                } else if (key == "output_dir") {
                    cfg.output_dir = v;
                } else if (key == "seed") {
                    std::int64_t s = 0;
                    if (!parse_int(v, s) || s < 0) throw ConfigError("run.seed must be a non-negative integer", "seed");
                    cfg.seed = static_cast<std::uint64_t>(s);
                } else {
                    throw ConfigError("unknown key 'run." + key + "'", key);
                }
            }
        } else if (section == "params") {
            for (const auto& [key, node] : body) cfg.raw_params[key] = trim(node.data());
        } else {
            throw ConfigError("unknown section [" + section + "]", section);
        }
    }
    if (!have_run || cfg.scenario.empty()) throw ConfigError("run.scenario is required", "scenario");
    if (cfg.output_dir.empty()) cfg.output_dir = "runs/" + cfg.scenario;
    return cfg;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read config file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

Params validate(const Scenario& s, const std::map<std::string, std::string>& raw) {
    std::map<std::string, Value> out;
    for (const auto& [key, _] : raw) {
        bool known = false;
        for (const ParamSpec& p : s.schema) known = known || p.name == key;
        if (!known) throw ConfigError("unknown parameter '" + key + "' for scenario " + s.name, key);
    }
    for (const ParamSpec& p : s.schema) {
        const auto it = raw.find(p.name);
        if (it == raw.end()) {
            out[p.name] = p.default_value;
            continue;
        }
        const std::string& text = it->second;
        const std::string bad = "parameter '" + p.name + "' must be " + type_name(p.type) + ", got '" + text + "'";
        Value v;
        double numeric = 0.0;
        switch (p.type) {
            case ParamType::integer: {
                std::int64_t i = 0;
                if (!parse_int(text, i)) throw ConfigError(bad, p.name);
                v = i;
                numeric = static_cast<double>(i);
                break;
            }
            case ParamType::real: {
                double d = 0.0;
                if (!parse_real(text, d)) throw ConfigError(bad, p.name);
                v = d;
                numeric = d;
                break;
            }
            case ParamType::boolean:
                if (text == "true" || text == "1" || text == "yes") v = true;
                else if (text == "false" || text == "0" || text == "no") v = false;
                else throw ConfigError(bad, p.name);
                break;
            case ParamType::string:
                if (!p.choices.empty() && std::find(p.choices.begin(), p.choices.end(), text) == p.choices.end()) {
                    std::string list;
                    for (const auto& c : p.choices) list += (list.empty() ? "" : ", ") + c;
                    throw ConfigError("parameter '" + p.name + "' must be one of {" + list + "}", p.name);
                }
                v = text;
                break;
        }
        if (p.type == ParamType::integer || p.type == ParamType::real) {
            if ((p.min && numeric < *p.min) || (p.max && numeric > *p.max)) {
                std::ostringstream msg;
                msg << "parameter '" << p.name << "' = " << text << " out of range [";
                msg << (p.min ? csv::format_number(*p.min) : "-inf") << ", "
                    << (p.max ? csv::format_number(*p.max) : "inf") << "]";
                throw ConfigError(msg.str(), p.name);
            }
        }
        out[p.name] = std::move(v);
    }
    return Params(std::move(out));
}

}  // namespace layerctl::report
