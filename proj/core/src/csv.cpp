#include "layerctl/csv.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "layerctl/errors.hpp"

namespace layerctl::csv {

namespace {

std::vector<std::string> split(const std::string& line) {
    std::vector<std::string> out;
    std::string cell;
    std::istringstream is(line);
    while (std::getline(is, cell, ',')) {
        const auto b = cell.find_first_not_of(" \t\r");
        const auto e = cell.find_last_not_of(" \t\r");
        out.push_back(b == std::string::npos ? std::string{} : cell.substr(b, e - b + 1));
    }
    if (!line.empty() && line.back() == ',') out.emplace_back();
    return out;
}

}  // namespace

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

void Table::add_row(std::vector<double> row) {
    if (row.size() != columns_.size()) throw PreconditionError("csv: row width does not match header");
    rows_.push_back(std::move(row));
}

std::size_t Table::column_index(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
        if (columns_[i] == name) return i;
    throw PreconditionError("csv: no column named '" + name + "'");
}

std::vector<double> Table::column(const std::string& name) const {
    const std::size_t c = column_index(name);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const auto& r : rows_) out.push_back(r[c]);
    return out;
}

std::string Table::to_string() const {
    std::string s;
    for (std::size_t i = 0; i < columns_.size(); ++i) s += (i ? "," : "") + columns_[i];
    s += '\n';
    for (const auto& r : rows_) {
        for (std::size_t i = 0; i < r.size(); ++i) {
            if (i) s += ',';
            s += format_number(r[i]);
        }
        s += '\n';
    }
    return s;
}

void Table::write(const std::string& path) const {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("csv: cannot open '" + path + "' for writing");
    os << to_string();
}

Table Table::parse(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line) || line.find_first_not_of(" \t\r") == std::string::npos)
        throw PreconditionError("csv: missing header row");
    Table t(split(line));
    std::size_t lineno = 1;
    while (std::getline(is, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
        const auto cells = split(line);
        if (cells.size() != t.columns_.size())
            throw PreconditionError("csv: ragged row at line " + std::to_string(lineno));
        std::vector<double> row;
        row.reserve(cells.size());
        for (const auto& c : cells) {
            double v = 0.0;
            const char* first = c.data();
            const char* last = c.data() + c.size();
            auto [ptr, ec] = std::from_chars(first, last, v);
            if (c.empty() || ec != std::errc{} || ptr != last)
                throw PreconditionError("csv: non-numeric cell '" + c + "' at line " + std::to_string(lineno));
            row.push_back(v);
        }
        t.rows_.push_back(std::move(row));
    }
    return t;
}

Table Table::read(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw PreconditionError("csv: cannot open '" + path + "'");
    std::ostringstream ss;
    ss << is.rdbuf();
    return parse(ss.str());
}

}  // namespace layerctl::csv
