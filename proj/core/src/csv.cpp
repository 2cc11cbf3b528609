#include <lppi/csv.hpp>
#include <lppi/error.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>

namespace lppi::csv {
namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

std::vector<std::string> split_line(std::string_view line, char delim)
{
    std::vector<std::string> cells;
    std::string cell;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cell.push_back('"');
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cell.push_back(c);
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == delim) {
            cells.emplace_back(trim(cell));
            cell.clear();
        } else {
            cell.push_back(c);
        }
    }
    cells.emplace_back(trim(cell));
    return cells;
}

} // namespace

long Table::column(std::string_view name) const
{
    for (std::size_t j = 0; j < header.size(); ++j) {
        if (header[j] == name) return static_cast<long>(j);
    }
    return -1;
}

Table parse(std::string_view text, char delim)
{
    Table table;
    bool have_header = false;
    std::size_t line_no = 0;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        if (trim(line).empty()) continue;
        auto cells = split_line(line, delim);
        if (!have_header) {
            // Tolerate a UTF-8 byte-order mark.
            if (cells[0].rfind("\xEF\xBB\xBF", 0) == 0) cells[0].erase(0, 3);
            table.header = std::move(cells);
            have_header = true;
            continue;
        }
        if (cells.size() != table.header.size()) {
            throw LoadError("line " + std::to_string(line_no) + ": expected "
                            + std::to_string(table.header.size()) + " cells, found "
                            + std::to_string(cells.size()));
        }
        table.rows.push_back(std::move(cells));
    }
    if (!have_header) throw LoadError("missing header row");
    return table;
}

std::string read_file(const std::string& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw LoadError("cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

Table read(const std::string& path, char delim)
{
    try {
        return parse(read_file(path), delim);
    } catch (const LoadError& e) {
        throw LoadError(path + ": " + e.what());
    }
}

double to_double(std::string_view cell, std::size_t row, std::string_view column)
{
    double v = 0.0;
    if (cell == "Inf" || cell == "inf") return std::numeric_limits<double>::infinity();
    if (cell == "-Inf" || cell == "-inf") return -std::numeric_limits<double>::infinity();
    const char* first = cell.data();
    const char* last = cell.data() + cell.size();
    if (first != last && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || cell.empty()) {
        throw LoadError("row " + std::to_string(row) + ", column '" + std::string(column)
                        + "': cannot parse '" + std::string(cell) + "' as a number");
    }
    return v;
}

std::string format_double(double v)
{
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
}

void write_file_atomic(const std::string& path, std::string_view text)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path()) fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw LoadError("cannot write '" + tmp.string() + "'");
        out.write(text.data(), static_cast<std::streamsize>(text.size()));
        if (!out) throw LoadError("write failed for '" + tmp.string() + "'");
    }
    fs::rename(tmp, target);
}

} // namespace lppi::csv
