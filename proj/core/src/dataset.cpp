#include <lppi/csv.hpp>
#include <lppi/dataset.hpp>
#include <lppi/error.hpp>

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace lppi {
namespace {

using nlohmann::json;

std::string get_string(const json& j, const char* key, std::string fallback = {})
{
    if (!j.contains(key) || j[key].is_null()) return fallback;
    return j[key].get<std::string>();
}

bool parse_int(const std::string& s, long& out)
{
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size() && !s.empty();
}

// Integer labels sort numerically, anything else lexicographically.
std::vector<std::string> sorted_levels(std::vector<std::string> levels)
{
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    long a = 0;
    const bool numeric = std::all_of(levels.begin(), levels.end(),
                                     [&](const std::string& s) { return parse_int(s, a); });
    if (numeric) {
        std::sort(levels.begin(), levels.end(), [](const std::string& l, const std::string& r) {
            long x = 0, y = 0;
            parse_int(l, x);
            parse_int(r, y);
            return x < y;
        });
    }
    return levels;
}

} // namespace

Schema schema_from_json_text(const std::string& text)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw LoadError(std::string("schema: ") + e.what());
    }
    if (!j.contains("family")) throw LoadError("schema: missing key 'family'");
    Schema s;
    const Family family = parse_family(j["family"].get<std::string>());
    const int categories = j.contains("categories") && !j["categories"].is_null()
                               ? j["categories"].get<int>()
                               : 0;
    const std::string link = get_string(j, "link");
    s.model = link.empty() ? ObservationModel::with_default_link(family, categories)
                           : ObservationModel(family, parse_link(link), categories);
    s.outcome = get_string(j, "outcome", "y");
    s.time_col = get_string(j, "time_col", family == Family::weibull ? "time" : "");
    s.status_col = get_string(j, "status_col", family == Family::weibull ? "status" : "");
    s.group_col = get_string(j, "group_col");
    return s;
}

Schema load_schema(const std::string& path)
{
    try {
        return schema_from_json_text(csv::read_file(path));
    } catch (const LoadError& e) {
        throw LoadError(path + ": " + e.what());
    }
}

std::string schema_to_json_text(const Schema& schema)
{
    json j;
    j["family"] = std::string(to_string(schema.model.family()));
    j["link"] = std::string(to_string(schema.model.link().kind));
    if (schema.model.family() == Family::weibull) {
        j["time_col"] = schema.time_col;
        j["status_col"] = schema.status_col;
    } else {
        j["outcome"] = schema.outcome;
    }
    if (schema.model.family() == Family::ordinal) j["categories"] = schema.model.categories();
    if (!schema.group_col.empty()) j["group_col"] = schema.group_col;
    return j.dump(2) + "\n";
}

void Dataset::validate(const ObservationModel& model) const
{
    if (n() < 1 || d() < 1) throw ValidationError("dataset needs at least one row and one predictor");
    if (static_cast<Index>(y.size()) != n()) throw ValidationError("outcome length differs from rows");
    if (static_cast<Index>(names.size()) != d()) throw ValidationError("name count differs from columns");
    if (!X.allFinite()) throw ValidationError("predictors contain non-finite values");
    for (Index i = 0; i < n(); ++i) {
        try {
            model.check_support(y[static_cast<std::size_t>(i)]);
        } catch (const DomainError& e) {
            throw ValidationError("row " + std::to_string(i + 1) + ": " + e.what());
        }
    }
    if (has_groups()) {
        if (static_cast<Index>(group.size()) != n()) throw ValidationError("group length differs from rows");
        for (int g : group) {
            if (g < 0 || g >= n_groups()) throw ValidationError("group index out of range");
        }
    }
}

Dataset Dataset::subset_rows(std::span<const Index> rows) const
{
    Dataset out;
    out.names = names;
    out.group_levels = group_levels;
    out.X.resize(static_cast<Index>(rows.size()), d());
    out.y.reserve(rows.size());
    if (has_groups()) out.group.reserve(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const Index i = rows[r];
        out.X.row(static_cast<Index>(r)) = X.row(i);
        out.y.push_back(y[static_cast<std::size_t>(i)]);
        if (has_groups()) out.group.push_back(group[static_cast<std::size_t>(i)]);
    }
    return out;
}

Dataset Dataset::with_group_levels(const std::vector<std::string>& levels) const
{
    Dataset out = *this;
    if (!has_groups()) return out;
    std::map<std::string, int> lookup;
    for (std::size_t g = 0; g < levels.size(); ++g) lookup[levels[g]] = static_cast<int>(g);
    for (auto& g : out.group) {
        const auto& name = group_levels[static_cast<std::size_t>(g)];
        auto it = lookup.find(name);
        if (it == lookup.end()) throw ValidationError("unknown group level '" + name + "'");
        g = it->second;
    }
    out.group_levels = levels;
    return out;
}

Dataset parse_dataset(const std::string& text, const Schema& schema)
{
    const csv::Table table = csv::parse(text);
    const auto& model = schema.model;
    const bool survival = model.family() == Family::weibull;

    auto require = [&](const std::string& name) {
        const long c = table.column(name);
        if (c < 0) throw LoadError("missing column '" + name + "'");
        return static_cast<std::size_t>(c);
    };

    std::vector<std::size_t> claimed;
    std::size_t y_col = 0, time_col = 0, status_col = 0, group_col = 0;
    if (survival) {
        time_col = require(schema.time_col);
        status_col = require(schema.status_col);
        claimed = {time_col, status_col};
    } else {
        y_col = require(schema.outcome);
        claimed = {y_col};
    }
    const bool grouped = !schema.group_col.empty();
    if (grouped) {
        group_col = require(schema.group_col);
        claimed.push_back(group_col);
    }

    std::vector<std::size_t> predictors;
    Dataset data;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        if (std::find(claimed.begin(), claimed.end(), j) != claimed.end()) continue;
        predictors.push_back(j);
        data.names.push_back(table.header[j]);
    }
    if (predictors.empty()) throw LoadError("no predictor columns");

    const auto n = static_cast<Index>(table.rows.size());
    data.X.resize(n, static_cast<Index>(predictors.size()));
    data.y.resize(table.rows.size());
    std::vector<std::string> raw_groups;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        const auto& row = table.rows[i];
        const std::size_t row_no = i + 1;
        for (std::size_t k = 0; k < predictors.size(); ++k) {
            const std::size_t j = predictors[k];
            const double v = csv::to_double(row[j], row_no, table.header[j]);
            if (!std::isfinite(v)) {
                throw LoadError("row " + std::to_string(row_no) + ", column '" + table.header[j]
                                + "': non-finite predictor");
            }
            data.X(static_cast<Index>(i), static_cast<Index>(k)) = v;
        }
        Outcome out;
        std::string column;
        if (survival) {
            column = table.header[time_col];
            out.value = csv::to_double(row[time_col], row_no, column);
            const double status = csv::to_double(row[status_col], row_no, table.header[status_col]);
            if (status != 0.0 && status != 1.0) {
                throw LoadError("row " + std::to_string(row_no) + ", column '"
                                + table.header[status_col] + "': status must be 0 or 1");
            }
            out.censored = status == 0.0;
        } else {
            column = table.header[y_col];
            out.value = csv::to_double(row[y_col], row_no, column);
        }
        try {
            model.check_support(out);
        } catch (const DomainError& e) {
            throw LoadError("row " + std::to_string(row_no) + ", column '" + column + "': " + e.what());
        }
        data.y[i] = out;
        if (grouped) raw_groups.push_back(row[group_col]);
    }
    if (grouped) {
        data.group_levels = sorted_levels(raw_groups);
        std::map<std::string, int> lookup;
        for (std::size_t g = 0; g < data.group_levels.size(); ++g) {
            lookup[data.group_levels[g]] = static_cast<int>(g);
        }
        for (const auto& label : raw_groups) data.group.push_back(lookup[label]);
    }
    if (n < 1) throw LoadError("no data rows");
    return data;
}

Dataset load_dataset(const std::string& path, const Schema& schema)
{
    try {
        return parse_dataset(csv::read_file(path), schema);
    } catch (const LoadError& e) {
        throw LoadError(path + ": " + e.what());
    }
}

std::string dataset_to_csv(const Dataset& data, const Schema& schema)
{
    const bool survival = schema.model.family() == Family::weibull;
    std::ostringstream out;
    if (survival) {
        out << schema.time_col << ',' << schema.status_col;
    } else {
        out << schema.outcome;
    }
    for (const auto& name : data.names) out << ',' << name;
    if (data.has_groups()) out << ',' << schema.group_col;
    out << '\n';
    for (Index i = 0; i < data.n(); ++i) {
        const auto& y = data.y[static_cast<std::size_t>(i)];
        out << csv::format_double(y.value);
        if (survival) out << ',' << (y.censored ? 0 : 1);
        for (Index j = 0; j < data.d(); ++j) out << ',' << csv::format_double(data.X(i, j));
        if (data.has_groups()) out << ',' << data.group_levels[static_cast<std::size_t>(data.group[static_cast<std::size_t>(i)])];
        out << '\n';
    }
    return out.str();
}

void save_dataset(const Dataset& data, const Schema& schema, const std::string& path)
{
    csv::write_file_atomic(path, dataset_to_csv(data, schema));
}

} // namespace lppi
