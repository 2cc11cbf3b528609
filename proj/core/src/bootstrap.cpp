#include <lppi/bootstrap.hpp>
#include <lppi/parallel.hpp>
#include <lppi/random.hpp>

#include <random>

namespace lppi {

DrawsProvider desk_provider(const ObservationModel& model, const DeskFitOptions& options)
{
    return [model, options](const Dataset& data, std::uint64_t seed) {
        DeskFitOptions opts = options;
        opts.seed = seed;
        return fit_reference_desk(data, model, opts);
    };
}

BootstrapResult bootstrap_inclusion(const Dataset& data, const DrawsProvider& provider,
                                    const BootstrapConfig& config)
{
    if (config.replicates < 1) throw ConfigError("bootstrap needs at least one replicate");
    const Index N = data.n();
    const Index D = data.d();

    BootstrapResult out;
    out.replicates.resize(static_cast<std::size_t>(config.replicates));
    parallel_for(out.replicates.size(), config.threads, [&](std::size_t b) {
        auto& rep = out.replicates[b];
        const std::uint64_t seed = config.seed + b;
        try {
            std::mt19937_64 rng(derive_seed(seed, Stream::bootstrap));
            std::uniform_int_distribution<Index> pick(0, N - 1);
            std::vector<Index> rows(static_cast<std::size_t>(N));
            for (auto& r : rows) r = pick(rng);
            const Dataset resampled = data.subset_rows(rows);

            const PosteriorDraws draws = provider(resampled, derive_seed(seed, Stream::desk_fit));
            const LatentReference latent = latent_predictions(draws, resampled, config.latent);

            SearchConfig search = config.search;
            search.seed = seed;
            search.threads = 1;
            const SolutionPath path = forward_search(latent, resampled, search);
            if (path.failed) throw ConvergenceError(path.error);

            EvalConfig eval = config.eval;
            eval.seed = seed;
            eval.threads = 1;
            const PathEvaluation evaluation = evaluate_path(path, latent, resampled, eval);
            rep.suggested_size = suggest_size(evaluation);
            rep.selected.assign(path.order.begin(), path.order.begin() + rep.suggested_size);
            rep.ok = true;
        } catch (const Error& e) {
            rep.ok = false;
            rep.error = e.what();
        }
    });

    out.frequency = Eigen::VectorXd::Zero(D);
    for (const auto& rep : out.replicates) {
        if (!rep.ok) continue;
        ++out.successes;
        for (Index v : rep.selected) out.frequency(v) += 1.0;
    }
    if (out.successes > 0) out.frequency /= static_cast<double>(out.successes);
    return out;
}

} // namespace lppi
