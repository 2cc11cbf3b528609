#pragma once

#include <lppi/family.hpp>

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace lppi {

using Index = Eigen::Index;

/// Maps a delimited file onto a Dataset.
struct Schema
{
    ObservationModel model;
    std::string outcome = "y";   // response column (all families but survival)
    std::string time_col;        // survival time column
    std::string status_col;      // survival status column, 1 = event, 0 = censored
    std::string group_col;       // optional grouping column for varying intercepts
};

Schema schema_from_json_text(const std::string& text);
Schema load_schema(const std::string& path);
std::string schema_to_json_text(const Schema& schema);

struct Dataset
{
    Eigen::MatrixXd X;                     // N x D predictors
    std::vector<Outcome> y;                // N outcomes
    std::vector<std::string> names;        // D predictor names
    std::vector<int> group;                // N indices into group_levels, empty if ungrouped
    std::vector<std::string> group_levels;

    Index n() const { return X.rows(); }
    Index d() const { return X.cols(); }
    bool has_groups() const { return !group.empty(); }
    Index n_groups() const { return static_cast<Index>(group_levels.size()); }

    /// Throws ValidationError when shapes, finiteness or outcome support fail.
    void validate(const ObservationModel& model) const;

    /// Rows `rows` (repeats allowed) in the given order.
    Dataset subset_rows(std::span<const Index> rows) const;

    /// Re-express group indices against `levels`; unknown levels are an error.
    Dataset with_group_levels(const std::vector<std::string>& levels) const;
};

/// Parses a CSV file according to `schema`. Every column not claimed by the
/// schema becomes a predictor, in file order.
Dataset load_dataset(const std::string& path, const Schema& schema);
Dataset parse_dataset(const std::string& text, const Schema& schema);

std::string dataset_to_csv(const Dataset& data, const Schema& schema);
void save_dataset(const Dataset& data, const Schema& schema, const std::string& path);

} // namespace lppi
