#pragma once

#include <lppi/dataset.hpp>
#include <lppi/draws.hpp>
#include <lppi/latent.hpp>
#include <lppi/search.hpp>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

namespace lppi {

/// Produces reference draws for a (resampled) dataset.
using DrawsProvider = std::function<PosteriorDraws(const Dataset& data, std::uint64_t seed)>;

/// Draws provider backed by `fit_reference_desk`.
DrawsProvider desk_provider(const ObservationModel& model, const DeskFitOptions& options);

struct BootstrapConfig
{
    Index replicates = 20;
    std::uint64_t seed = 1;
    int threads = 1;
    SearchConfig search{};
    EvalConfig eval{};
    LatentOptions latent{};
};

struct BootstrapReplicate
{
    bool ok = false;
    std::string error;
    Index suggested_size = 0;
    std::vector<Index> selected;
};

struct BootstrapResult
{
    Eigen::VectorXd frequency;   // per variable, over successful replicates
    std::vector<BootstrapReplicate> replicates;
    Index successes = 0;
};

/// Row-resamples `data` B times (replicate b uses seed + b), refits the
/// reference through `provider`, searches, and counts how often each
/// variable lands in the suggested submodel.
BootstrapResult bootstrap_inclusion(const Dataset& data, const DrawsProvider& provider,
                                    const BootstrapConfig& config);

} // namespace lppi
