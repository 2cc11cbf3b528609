#include "commands.hpp"

#include <lppi/error.hpp>

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

namespace {

using namespace lppi::cli;

void add_common(CLI::App* cmd, Common& common)
{
    cmd->add_option("--seed", common.seed, "Seed for every random substream")->capture_default_str();
    cmd->add_option("--threads", common.threads, "Worker threads, 0 = all cores (LPPI_THREADS overrides)")
        ->capture_default_str();
    cmd->add_option("--out", common.out, "Output directory")->capture_default_str();
}

void add_reference(CLI::App* cmd, ReferenceArgs& ref, bool draws_flags)
{
    cmd->add_option("--data", ref.data, "Dataset CSV")->required()->check(CLI::ExistingFile);
    cmd->add_option("--schema", ref.schema, "Schema JSON")->required()->check(CLI::ExistingFile);
    if (draws_flags) {
        auto* draws = cmd->add_option("--draws", ref.draws, "Posterior draws CSV")->check(CLI::ExistingFile);
        cmd->add_flag("--fit-desk", ref.fit_desk, "Fit the desk reference model instead of reading draws")
            ->excludes(draws);
    }
    cmd->add_option("--desk-draws", ref.desk_draws, "Draws kept by the desk fitter")->capture_default_str();
    cmd->add_option("--prior-scale", ref.prior_scale, "Prior SD of the desk fitter")->capture_default_str();
    cmd->add_option("--latent-sigma", ref.latent_sigma, "Override the latent dispersion of every draw");
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Projection predictive variable selection in the latent space", "lppi"};
    app.set_version_flag("--version", LPPI_VERSION);
    app.require_subcommand(1);

    Common common;

    SimulateArgs sim;
    auto* cmd_sim = app.add_subcommand("simulate", "Simulate correlated sparse regression data");
    add_common(cmd_sim, common);
    cmd_sim->add_option("--family", sim.family, "gaussian|bernoulli|poisson|ordinal|weibull")->required();
    cmd_sim->add_option("--link", sim.link, "Link function (family default when omitted)");
    cmd_sim->add_option("--categories", sim.categories, "Ordinal categories")->capture_default_str();
    cmd_sim->add_option("--n", sim.n, "Training observations")->capture_default_str();
    cmd_sim->add_option("--d", sim.d, "Predictors")->capture_default_str();
    cmd_sim->add_option("--rho", sim.rho, "Predictor correlation")->capture_default_str();
    cmd_sim->add_option("--sparsity", sim.sparsity, "Probability of a relevant predictor")->capture_default_str();
    cmd_sim->add_option("--coef-scale", sim.coef_scale, "SD of relevant coefficients")->capture_default_str();
    cmd_sim->add_option("--weibull-shape", sim.weibull_shape, "Weibull shape")->capture_default_str();
    cmd_sim->add_option("--n-test", sim.n_test, "Held-out observations written to test.csv")->capture_default_str();

    FitArgs fit;
    auto* cmd_fit = app.add_subcommand("fit", "Fit the desk reference model and write draws.csv");
    add_common(cmd_fit, common);
    add_reference(cmd_fit, fit.ref, false);

    SelectArgs sel;
    auto* cmd_sel = app.add_subcommand("select", "Forward search and path evaluation");
    add_common(cmd_sel, common);
    add_reference(cmd_sel, sel.ref, true);
    cmd_sel->add_option("--mode", sel.mode, "latent|response")->capture_default_str();
    cmd_sel->add_option("--nclusters-search", sel.clusters_search, "Draw clusters during search")
        ->capture_default_str();
    cmd_sel->add_option("--nclusters-eval", sel.clusters_eval, "Draw clusters during evaluation")
        ->capture_default_str();
    cmd_sel->add_option("--max-size", sel.max_size, "Largest submodel (default min(D, 50))");
    cmd_sel->add_option("--test", sel.test, "Held-out dataset CSV")->check(CLI::ExistingFile);

    EvaluateArgs ev;
    auto* cmd_ev = app.add_subcommand("evaluate", "Score a stored solution path");
    add_common(cmd_ev, common);
    add_reference(cmd_ev, ev.ref, true);
    cmd_ev->add_option("--path", ev.path, "path.json from select")->required()->check(CLI::ExistingFile);
    cmd_ev->add_option("--nclusters-eval", ev.clusters_eval, "Draw clusters (stored value when omitted)");
    cmd_ev->add_option("--test", ev.test, "Held-out dataset CSV")->check(CLI::ExistingFile);
    cmd_ev->add_option("--truth", ev.truth, "truth.json for selection AUC")->check(CLI::ExistingFile);

    DiagnoseArgs diag;
    auto* cmd_diag = app.add_subcommand("diagnose", "Residual and KL diagnostics along a stored path");
    add_common(cmd_diag, common);
    add_reference(cmd_diag, diag.ref, true);
    cmd_diag->add_option("--path", diag.path, "path.json from select")->required()->check(CLI::ExistingFile);
    cmd_diag->add_option("--nclusters-eval", diag.clusters_eval, "Draw clusters (stored value when omitted)");

    BootstrapArgs boot;
    auto* cmd_boot = app.add_subcommand("bootstrap", "Bootstrap inclusion frequencies at the suggested size");
    add_common(cmd_boot, common);
    add_reference(cmd_boot, boot.ref, false);
    cmd_boot->add_option("--b", boot.replicates, "Bootstrap replicates")->capture_default_str();
    cmd_boot->add_option("--mode", boot.mode, "latent|response")->capture_default_str();
    cmd_boot->add_option("--nclusters-search", boot.clusters_search, "Draw clusters during search")
        ->capture_default_str();
    cmd_boot->add_option("--nclusters-eval", boot.clusters_eval, "Draw clusters during evaluation")
        ->capture_default_str();
    cmd_boot->add_option("--max-size", boot.max_size, "Largest submodel (default min(D, 50))");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ExitCode::ok : ExitCode::usage;
    }

    try {
        if (*cmd_sim) return run_simulate(common, sim);
        if (*cmd_fit) return run_fit(common, fit);
        if (*cmd_sel) return run_select(common, sel);
        if (*cmd_ev) return run_evaluate(common, ev);
        if (*cmd_diag) return run_diagnose(common, diag);
        if (*cmd_boot) return run_bootstrap(common, boot);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return ExitCode::usage;
    } catch (const lppi::ConfigError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return ExitCode::usage;
    } catch (const lppi::UnsupportedFamilyError& e) {
        std::cerr << "usage error: " << e.what() << '\n';
        return ExitCode::usage;
    } catch (const lppi::DomainError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return ExitCode::numerical;
    } catch (const lppi::ConvergenceError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return ExitCode::numerical;
    } catch (const lppi::Error& e) {
        // load, validation and alignment failures
        std::cerr << "input error: " << e.what() << '\n';
        return ExitCode::io;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "i/o error: " << e.what() << '\n';
        return ExitCode::io;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return ExitCode::io;
    }
    return ExitCode::usage;
}
