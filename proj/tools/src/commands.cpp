#include "commands.hpp"
#include "manifest.hpp"

#include <lppi/bootstrap.hpp>
#include <lppi/csv.hpp>
#include <lppi/datagen.hpp>
#include <lppi/diagnostics.hpp>
#include <lppi/draws.hpp>
#include <lppi/error.hpp>
#include <lppi/parallel.hpp>
#include <lppi/random.hpp>
#include <lppi/report.hpp>
#include <lppi/search.hpp>

#include <charconv>
#include <cstdlib>
#include <iostream>

namespace lppi::cli {
namespace {

using nlohmann::json;

void write(Manifest& manifest, const Common& common, const std::string& name, const std::string& text)
{
    csv::write_file_atomic(common.out + "/" + name, text);
    manifest.output(name);
}

struct Reference
{
    Schema schema;
    Dataset data;
    PosteriorDraws draws;
    LatentReference latent;
};

Schema read_schema(Manifest& manifest, const ReferenceArgs& args)
{
    manifest.input("schema", args.schema);
    return load_schema(args.schema);
}

// Loads data, then either reads or fits draws. The model family is
// checked against `mode` before any fitting happens.
Reference load_reference(Manifest& manifest, const Common& common, const ReferenceArgs& args,
                         std::optional<ProjectionMode> mode = std::nullopt)
{
    Reference ref;
    manifest.phase("load");
    ref.schema = read_schema(manifest, args);
    if (mode == ProjectionMode::response && !ref.schema.model.exponential_family()) {
        throw UsageError("--mode response needs an exponential-family model (gaussian, bernoulli, poisson); '"
                         + std::string(to_string(ref.schema.model.family()))
                         + "' has no natural-parameter form for the response-space projection, use --mode latent");
    }
    manifest.input("data", args.data);
    ref.data = load_dataset(args.data, ref.schema);

    auto& cfg = manifest.config()["reference"];
    if (args.fit_desk) {
        manifest.phase("fit");
        DeskFitOptions opts;
        opts.draws = args.desk_draws;
        opts.prior_scale = args.prior_scale;
        opts.seed = derive_seed(common.seed, Stream::desk_fit);
        if (opts.draws < 1) throw UsageError("--desk-draws must be positive");
        if (!(opts.prior_scale > 0.0)) throw UsageError("--prior-scale must be positive");
        ref.draws = fit_reference_desk(ref.data, ref.schema.model, opts);
        cfg = {{"source", "desk"}, {"draws", opts.draws}, {"prior_scale", opts.prior_scale}};
        manifest.results()["desk_acceptance_rate"] = ref.draws.acceptance_rate;
        manifest.results()["warnings"] = ref.draws.warnings;
        for (const auto& w : ref.draws.warnings) std::cerr << "warning: " << w << '\n';
    } else {
        manifest.input("draws", args.draws);
        ref.draws = load_draws(args.draws, ref.data, ref.schema.model);
        cfg = {{"source", "file"}};
    }
    LatentOptions lopts;
    lopts.sigma_override = args.latent_sigma;
    if (args.latent_sigma && !(*args.latent_sigma > 0.0)) throw UsageError("--latent-sigma must be positive");
    cfg["latent_sigma"] = args.latent_sigma ? json(*args.latent_sigma) : json(nullptr);
    ref.latent = latent_predictions(ref.draws, ref.data, lopts);
    return ref;
}

struct TestSet
{
    Dataset data;
    LatentReference latent;
};

std::optional<TestSet> load_test(Manifest& manifest, const std::string& path, const Reference& ref,
                                 const ReferenceArgs& args)
{
    if (path.empty()) return std::nullopt;
    manifest.input("test", path);
    TestSet t;
    t.data = load_dataset(path, ref.schema);
    if (ref.data.has_groups()) t.data = t.data.with_group_levels(ref.data.group_levels);
    LatentOptions lopts;
    lopts.sigma_override = args.latent_sigma;
    t.latent = latent_predictions(ref.draws, t.data, lopts);
    return t;
}

Index check_clusters(long value, const char* flag)
{
    if (value < 1) throw UsageError(std::string(flag) + " must be at least 1");
    return static_cast<Index>(value);
}

ProjectionMode mode_from(const std::string& name)
{
    try {
        return parse_mode(name);
    } catch (const Error&) {
        throw UsageError("--mode must be 'latent' or 'response'");
    }
}

std::vector<bool> read_truth_mask(const std::string& path, Index d)
{
    try {
        const json j = json::parse(csv::read_file(path));
        std::vector<bool> z;
        for (const auto& v : j.at("z")) z.push_back(v.get<int>() != 0);
        if (static_cast<Index>(z.size()) != d) throw LoadError("truth file: z has the wrong length");
        return z;
    } catch (const json::exception& e) {
        throw LoadError(std::string("truth file: ") + e.what());
    }
}

} // namespace

int resolve_threads(int requested)
{
    if (const char* env = std::getenv("LPPI_THREADS"); env && *env) {
        int value = 0;
        const char* end = env + std::char_traits<char>::length(env);
        const auto [ptr, ec] = std::from_chars(env, end, value);
        if (ec != std::errc() || ptr != end || value < 1) throw UsageError("LPPI_THREADS must be a positive integer");
        return value;
    }
    if (requested < 0) throw UsageError("--threads must be non-negative");
    return requested == 0 ? hardware_threads() : requested;
}

int run_simulate(const Common& common, const SimulateArgs& args)
{
    Manifest manifest("simulate");
    manifest.seed(common.seed);
    manifest.phase("simulate");

    Family family{};
    try {
        family = parse_family(args.family);
    } catch (const Error& e) {
        throw UsageError(std::string("--family: ") + e.what());
    }
    if (args.n < 1 || args.d < 1) throw UsageError("--n and --d must be positive");
    if (args.n_test < 0) throw UsageError("--n-test must be non-negative");
    if (!(args.rho >= 0.0 && args.rho < 1.0)) throw UsageError("--rho must lie in [0, 1)");

    SimConfig config = SimConfig::for_family(family, args.n, args.d, args.rho, common.seed);
    const int categories = family == Family::ordinal ? args.categories : 0;
    try {
        config.model = args.link.empty() ? ObservationModel::with_default_link(family, categories)
                                         : ObservationModel(family, parse_link(args.link), categories);
    } catch (const Error& e) {
        throw UsageError(e.what());
    }
    config.sparsity = args.sparsity;
    config.coef_scale = args.coef_scale;
    config.weibull_shape = args.weibull_shape;
    config.n_test = args.n_test;
    const Simulation sim = simulate(config);

    Schema schema;
    schema.model = config.model;
    if (family == Family::weibull) {
        schema.time_col = "time";
        schema.status_col = "status";
    }
    manifest.config() = {{"family", args.family},
                         {"link", std::string(to_string(config.model.link().kind))},
                         {"categories", config.model.categories()},
                         {"n", args.n},
                         {"d", args.d},
                         {"rho", args.rho},
                         {"sparsity", args.sparsity},
                         {"coef_scale", args.coef_scale},
                         {"weibull_shape", args.weibull_shape},
                         {"censor_time", config.censor_time},
                         {"n_test", args.n_test}};

    manifest.phase("write");
    write(manifest, common, "data.csv", dataset_to_csv(sim.train, schema));
    if (sim.test) write(manifest, common, "test.csv", dataset_to_csv(*sim.test, schema));
    write(manifest, common, "schema.json", schema_to_json_text(schema));
    write(manifest, common, "truth.json", report::truth_json(sim.truth, config.model));
    manifest.write(common.out);
    return ok;
}

int run_fit(const Common& common, const FitArgs& args)
{
    Manifest manifest("fit");
    manifest.seed(common.seed);
    ReferenceArgs ref_args = args.ref;
    ref_args.fit_desk = true;
    const Reference ref = load_reference(manifest, common, ref_args);
    manifest.phase("write");
    write(manifest, common, "draws.csv", draws_to_csv(ref.draws));
    manifest.write(common.out);
    return ok;
}

int run_select(const Common& common, const SelectArgs& args)
{
    Manifest manifest("select");
    manifest.seed(common.seed);
    const int threads = resolve_threads(common.threads);
    const ProjectionMode mode = mode_from(args.mode);
    if (args.ref.fit_desk == !args.ref.draws.empty()) throw UsageError("give exactly one of --draws and --fit-desk");

    SearchConfig search;
    search.mode = mode;
    search.clusters_search = check_clusters(args.clusters_search, "--nclusters-search");
    search.max_size = args.max_size;
    search.seed = common.seed;
    search.threads = threads;
    EvalConfig eval;
    eval.clusters_eval = check_clusters(args.clusters_eval, "--nclusters-eval");
    eval.seed = common.seed;
    eval.threads = threads;

    const Reference ref = load_reference(manifest, common, args.ref, mode);
    const auto test = load_test(manifest, args.test, ref, args.ref);
    if (args.max_size > ref.data.d()) {
        throw UsageError("--max-size " + std::to_string(args.max_size) + " exceeds the " + std::to_string(ref.data.d())
                         + " predictors");
    }
    manifest.config()["search"] = {{"mode", args.mode},
                                    {"clusters_search", search.clusters_search},
                                    {"clusters_eval", eval.clusters_eval},
                                    {"max_size", resolve_max_size(args.max_size, ref.data.d())},
                                    {"threads", threads}};

    manifest.phase("search");
    const SolutionPath path = forward_search(ref.latent, ref.data, search);

    manifest.phase("evaluate");
    const HeldOut held = test ? HeldOut{test->data, test->latent} : HeldOut{ref.data, ref.latent};
    PathEvaluation evaluation;
    try {
        evaluation = evaluate_path(path, ref.latent, ref.data, eval, test ? &held : nullptr);
    } catch (const Error&) {
        // Keep the search result even when scoring fails.
        write(manifest, common, "path.json", report::path_json(path));
        throw;
    }
    const Index suggested = suggest_size(evaluation);

    manifest.phase("write");
    if (args.ref.fit_desk) write(manifest, common, "draws.csv", draws_to_csv(ref.draws));
    write(manifest, common, "path.json", report::path_json(path, &evaluation, &eval));
    write(manifest, common, "metrics.csv", report::metrics_csv(evaluation));
    write(manifest, common, "metrics.json", report::metrics_json(evaluation, ref.data.names, suggested));
    manifest.results()["suggested_size"] = suggested;
    manifest.results()["path_failed"] = path.failed;
    if (path.failed) manifest.results()["error"] = path.error;
    manifest.write(common.out);
    if (path.failed) {
        std::cerr << "error: search stopped early: " << path.error << '\n';
        return numerical;
    }
    return ok;
}

int run_evaluate(const Common& common, const EvaluateArgs& args)
{
    Manifest manifest("evaluate");
    manifest.seed(common.seed);
    const int threads = resolve_threads(common.threads);
    if (args.ref.fit_desk == !args.ref.draws.empty()) throw UsageError("give exactly one of --draws and --fit-desk");

    manifest.input("path", args.path);
    const report::StoredPath stored = report::parse_path_json(csv::read_file(args.path));
    const Reference ref = load_reference(manifest, common, args.ref, stored.mode);
    const auto test = load_test(manifest, args.test, ref, args.ref);

    EvalConfig eval;
    eval.clusters_eval = check_clusters(args.clusters_eval.value_or(stored.clusters_eval), "--nclusters-eval");
    eval.seed = stored.seed;
    eval.threads = threads;
    manifest.config()["evaluate"] = {{"clusters_eval", eval.clusters_eval}, {"threads", threads}};

    manifest.phase("evaluate");
    ProjectionOptions popts;
    popts.threads = threads;
    const SolutionPath path = report::restore_path(stored, ref.latent, ref.data, popts);
    const HeldOut held = test ? HeldOut{test->data, test->latent} : HeldOut{ref.data, ref.latent};
    const PathEvaluation evaluation = evaluate_path(path, ref.latent, ref.data, eval, test ? &held : nullptr);
    const Index suggested = suggest_size(evaluation);

    manifest.phase("write");
    std::string metrics = report::metrics_json(evaluation, ref.data.names, suggested);
    if (!args.truth.empty()) {
        manifest.input("truth", args.truth);
        const auto mask = read_truth_mask(args.truth, ref.data.d());
        json j = json::parse(metrics);
        try {
            j["selection_auc"] = selection_auc(path.order, mask);
        } catch (const DomainError&) {
            j["selection_auc"] = nullptr;
        }
        metrics = j.dump(2) + "\n";
        manifest.results()["selection_auc"] = j["selection_auc"];
    }
    write(manifest, common, "metrics.csv", report::metrics_csv(evaluation));
    write(manifest, common, "metrics.json", metrics);
    manifest.results()["suggested_size"] = suggested;
    manifest.write(common.out);
    return ok;
}

int run_diagnose(const Common& common, const DiagnoseArgs& args)
{
    Manifest manifest("diagnose");
    manifest.seed(common.seed);
    const int threads = resolve_threads(common.threads);
    if (args.ref.fit_desk == !args.ref.draws.empty()) throw UsageError("give exactly one of --draws and --fit-desk");

    manifest.input("path", args.path);
    const report::StoredPath stored = report::parse_path_json(csv::read_file(args.path));
    const Reference ref = load_reference(manifest, common, args.ref, stored.mode);

    EvalConfig eval;
    eval.clusters_eval = check_clusters(args.clusters_eval.value_or(stored.clusters_eval), "--nclusters-eval");
    eval.seed = stored.seed;
    eval.threads = threads;
    manifest.config()["diagnose"] = {{"clusters_eval", eval.clusters_eval}, {"threads", threads}};

    manifest.phase("project");
    ProjectionOptions popts;
    popts.threads = threads;
    const SolutionPath path = report::restore_path(stored, ref.latent, ref.data, popts);
    const PathEvaluation evaluation = evaluate_path(path, ref.latent, ref.data, eval);

    manifest.phase("diagnose");
    std::vector<Index> sizes;
    std::vector<ResidualSummary> summaries;
    std::vector<ProjectionResult> projections;
    for (const auto& m : evaluation.sizes) {
        sizes.push_back(m.size);
        summaries.push_back(residual_check(ref.latent, m.projection));
        projections.push_back(m.projection);
    }
    const auto curve = kl_curve(evaluation);

    manifest.phase("write");
    write(manifest, common, "residuals.csv", report::residual_summary_csv(sizes, summaries));
    write(manifest, common, "residuals_raw.csv", report::raw_residuals_csv(sizes, projections));
    write(manifest, common, "histogram.csv", report::histogram_csv(sizes, summaries));
    write(manifest, common, "kl_curve.csv", report::kl_curve_csv(curve));
    write(manifest, common, "diagnostics.json", report::diagnostics_json(sizes, summaries, curve));
    manifest.write(common.out);
    return ok;
}

int run_bootstrap(const Common& common, const BootstrapArgs& args)
{
    Manifest manifest("bootstrap");
    manifest.seed(common.seed);
    const int threads = resolve_threads(common.threads);
    const ProjectionMode mode = mode_from(args.mode);
    if (args.replicates < 1) throw UsageError("--b must be at least 1");
    if (args.ref.desk_draws < 1) throw UsageError("--desk-draws must be positive");
    if (!(args.ref.prior_scale > 0.0)) throw UsageError("--prior-scale must be positive");
    if (args.ref.latent_sigma && !(*args.ref.latent_sigma > 0.0)) throw UsageError("--latent-sigma must be positive");

    manifest.phase("load");
    const Schema schema = read_schema(manifest, args.ref);
    if (mode == ProjectionMode::response && !schema.model.exponential_family()) {
        throw UsageError("--mode response needs an exponential-family model; use --mode latent");
    }
    manifest.input("data", args.ref.data);
    const Dataset data = load_dataset(args.ref.data, schema);
    if (args.max_size > data.d()) throw UsageError("--max-size exceeds the number of predictors");

    BootstrapConfig config;
    config.replicates = args.replicates;
    config.seed = common.seed;
    config.threads = threads;
    config.search.mode = mode;
    config.search.clusters_search = check_clusters(args.clusters_search, "--nclusters-search");
    config.search.max_size = args.max_size;
    config.eval.clusters_eval = check_clusters(args.clusters_eval, "--nclusters-eval");
    config.latent.sigma_override = args.ref.latent_sigma;
    DeskFitOptions desk;
    desk.draws = args.ref.desk_draws;
    desk.prior_scale = args.ref.prior_scale;
    manifest.config() = {{"b", args.replicates},
                         {"mode", args.mode},
                         {"clusters_search", config.search.clusters_search},
                         {"clusters_eval", config.eval.clusters_eval},
                         {"max_size", resolve_max_size(args.max_size, data.d())},
                         {"desk_draws", desk.draws},
                         {"prior_scale", desk.prior_scale},
                         {"latent_sigma", args.ref.latent_sigma ? json(*args.ref.latent_sigma) : json(nullptr)},
                         {"threads", threads}};

    manifest.phase("bootstrap");
    const BootstrapResult result = bootstrap_inclusion(data, desk_provider(schema.model, desk), config);

    manifest.phase("write");
    write(manifest, common, "inclusion.csv", report::inclusion_csv(result, data.names));
    write(manifest, common, "bootstrap.json", report::bootstrap_json(result, data.names));
    manifest.results()["successes"] = result.successes;
    manifest.write(common.out);
    if (result.successes == 0) {
        std::cerr << "error: every bootstrap replicate failed\n";
        return numerical;
    }
    return ok;
}

} // namespace lppi::cli
