#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lppi::csv {

/// A delimited text table with a header row. Cells are kept as strings.
struct Table
{
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    /// Index of `name` in the header, or -1.
    long column(std::string_view name) const;
};

Table read(const std::string& path, char delim = ',');
Table parse(std::string_view text, char delim = ',');

/// Parses a finite or infinite double; throws LoadError naming row/column.
double to_double(std::string_view cell, std::size_t row, std::string_view column);

/// Shortest representation that reads back to the same double.
std::string format_double(double v);

/// Writes `text` to `path` via a temporary sibling and rename.
void write_file_atomic(const std::string& path, std::string_view text);

std::string read_file(const std::string& path);

} // namespace lppi::csv
