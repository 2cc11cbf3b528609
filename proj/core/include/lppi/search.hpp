#pragma once

#include <lppi/dataset.hpp>
#include <lppi/evaluation.hpp>
#include <lppi/latent.hpp>
#include <lppi/projection.hpp>

#include <cstdint>
#include <string>
#include <vector>

namespace lppi {

struct SearchConfig
{
    Index clusters_search = 1;
    ProjectionMode mode = ProjectionMode::latent;
    Index max_size = -1;          // < 0 means min(D, 50)
    std::uint64_t seed = 1;
    int threads = 1;
    ProjectionOptions projection{};
};

Index resolve_max_size(Index requested, Index n_variables);

struct PathRecord
{
    Index size = 0;
    std::vector<Index> subset;    // first `size` entries of the ordering
    double kl = 0.0;              // weighted KL under the search clusters
    ProjectionResult projection;
};

/// Nested sequence of submodels from intercept-only up to max_size.
struct SolutionPath
{
    std::vector<Index> order;
    std::vector<PathRecord> records;   // sizes 0..order.size()
    std::vector<std::string> names;    // dataset variable names
    SearchConfig config;
    Index clusters_used = 0;
    bool failed = false;               // true if a solver aborted the search
    std::string error;
};

/// Greedy forward selection minimising the weighted projection KL.
/// In latent mode candidates are scored through incremental Gram-Schmidt
/// updates of the cluster residuals; recorded KL values always come from
/// `project_submodel`. Equal scores resolve to the lowest variable index.
SolutionPath forward_search(const LatentReference& latent, const Dataset& data, const SearchConfig& config);

/// KL of every candidate extension of `subset`, in candidate order, computed
/// with full projections. Used to audit greedy steps.
std::vector<double> candidate_kls(const LatentReference& latent, const DrawClusters& clusters, const Dataset& data,
                                  const std::vector<Index>& subset, const std::vector<Index>& candidates,
                                  ProjectionMode mode, const ProjectionOptions& options = {});

/// Clusters used by search and evaluation for a given seed and count.
DrawClusters path_clusters(const LatentReference& latent, Index n_clusters, std::uint64_t seed);

struct EvalConfig
{
    Index clusters_eval = 20;
    std::uint64_t seed = 1;
    int threads = 1;
    ProjectionOptions projection{};
};

/// Held-out data with the reference latent predictions on it.
struct HeldOut
{
    const Dataset& data;
    const LatentReference& latent;
};

struct SizeMetrics
{
    Index size = 0;
    std::vector<Index> subset;
    double kl = 0.0;
    ElpdStats elpd;
    double elpd_diff = 0.0;       // against the reference model
    double elpd_diff_se = 0.0;
    ProjectionResult projection;
};

struct PathEvaluation
{
    std::vector<SizeMetrics> sizes;
    ElpdStats reference;
    Index clusters_used = 0;
    bool held_out = false;
};

/// Re-projects each path prefix with C_eval clusters and scores it by KL
/// and ELPD (on `test` when given, else on the training data).
PathEvaluation evaluate_path(const SolutionPath& path, const LatentReference& latent, const Dataset& data,
                             const EvalConfig& config, const HeldOut* test = nullptr);

/// Smallest size whose ELPD is within one SE of the reference difference;
/// the largest size when none qualifies. Returns an index into `sizes`.
std::size_t suggest_size(const std::vector<ElpdStats>& sizes, const ElpdStats& reference);
Index suggest_size(const PathEvaluation& evaluation);

} // namespace lppi
