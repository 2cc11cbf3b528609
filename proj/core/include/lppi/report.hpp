#pragma once

#include <lppi/bootstrap.hpp>
#include <lppi/datagen.hpp>
#include <lppi/diagnostics.hpp>
#include <lppi/search.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace lppi::report {

/// {order:[names], sizes:[{size, terms, kl, elpd, elpd_se}], config:{...}}.
/// Without an evaluation the per-size KL comes from the search and the
/// ELPD fields are null.
std::string path_json(const SolutionPath& path, const PathEvaluation* evaluation = nullptr,
                      const EvalConfig* eval_config = nullptr);

struct StoredPath
{
    std::vector<std::string> order;
    ProjectionMode mode = ProjectionMode::latent;
    Index clusters_search = 1;
    Index clusters_eval = 20;
    std::uint64_t seed = 1;
};

StoredPath parse_path_json(const std::string& text);

/// Rebuilds a path against `data` by re-projecting each prefix with the
/// stored search settings.
SolutionPath restore_path(const StoredPath& stored, const LatentReference& latent, const Dataset& data,
                          const ProjectionOptions& options = {});

/// size,kl,elpd,elpd_se
std::string metrics_csv(const PathEvaluation& evaluation);

/// Per-size metrics with reference ELPD and differences.
std::string metrics_json(const PathEvaluation& evaluation, const std::vector<std::string>& names,
                         Index suggested_size);

/// {beta:[...], z:[...], aux:{...}}
std::string truth_json(const GroundTruth& truth, const ObservationModel& model);

/// size,mean,sd,skewness,excess_kurtosis,normality_suspect
std::string residual_summary_csv(const std::vector<Index>& sizes, const std::vector<ResidualSummary>& summaries);

/// size,edge_low,edge_high,count
std::string histogram_csv(const std::vector<Index>& sizes, const std::vector<ResidualSummary>& summaries);

/// size,cluster,observation,residual,weight
std::string raw_residuals_csv(const std::vector<Index>& sizes, const std::vector<ProjectionResult>& projections);

/// size,kl
std::string kl_curve_csv(const std::vector<std::pair<Index, double>>& curve);

std::string diagnostics_json(const std::vector<Index>& sizes, const std::vector<ResidualSummary>& summaries,
                             const std::vector<std::pair<Index, double>>& curve);

/// variable,frequency
std::string inclusion_csv(const BootstrapResult& result, const std::vector<std::string>& names);

/// Per-replicate outcome of a bootstrap run.
std::string bootstrap_json(const BootstrapResult& result, const std::vector<std::string>& names);

} // namespace lppi::report
