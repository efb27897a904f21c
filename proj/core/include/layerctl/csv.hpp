#pragma once

#include <string>
#include <vector>

namespace layerctl::csv {

/// Numeric table with a mandatory header. Values are written with 17 significant digits.
class Table {
public:
    Table() = default;
    explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

    const std::vector<std::string>& columns() const { return columns_; }
    const std::vector<std::vector<double>>& rows() const { return rows_; }
    std::size_t size() const { return rows_.size(); }
    bool empty() const { return rows_.empty(); }

    void add_row(std::vector<double> row);
    /// Index of a named column; throws if absent.
    std::size_t column_index(const std::string& name) const;
    std::vector<double> column(const std::string& name) const;

    std::string to_string() const;
    void write(const std::string& path) const;

    /// Throws PreconditionError on a missing header, ragged rows or non-numeric cells.
    static Table parse(const std::string& text);
    static Table read(const std::string& path);

private:
    std::vector<std::string> columns_;
    std::vector<std::vector<double>> rows_;
};

/// Shortest-exact 17-significant-digit rendering used by all writers.
std::string format_number(double v);

}  // namespace layerctl::csv
