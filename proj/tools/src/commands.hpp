#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

namespace lppi::cli {

/// Invalid flag combination detected after parsing (exit code 2).
class UsageError : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

enum ExitCode : int { ok = 0, usage = 2, numerical = 3, io = 4 };

struct Common
{
    std::uint64_t seed = 1;
    int threads = 0;   // 0 = all cores; LPPI_THREADS overrides
    std::string out = ".";
};

struct SimulateArgs
{
    std::string family;
    std::string link;
    int categories = 5;
    long n = 100;
    long d = 50;
    double rho = 0.0;
    double sparsity = 0.6;
    double coef_scale = 1.5;
    double weibull_shape = 1.5;
    long n_test = 0;
};

/// Inputs shared by everything that needs a reference model.
struct ReferenceArgs
{
    std::string data;
    std::string schema;
    std::string draws;             // empty when fitting
    bool fit_desk = false;
    long desk_draws = 400;
    double prior_scale = 2.5;
    std::optional<double> latent_sigma;
};

struct SelectArgs
{
    ReferenceArgs ref;
    std::string mode = "latent";
    long clusters_search = 1;
    long clusters_eval = 20;
    long max_size = -1;
    std::string test;
};

struct EvaluateArgs
{
    ReferenceArgs ref;
    std::string path;
    std::optional<long> clusters_eval;
    std::string test;
    std::string truth;
};

struct DiagnoseArgs
{
    ReferenceArgs ref;
    std::string path;
    std::optional<long> clusters_eval;
};

struct FitArgs
{
    ReferenceArgs ref;
};

struct BootstrapArgs
{
    ReferenceArgs ref;
    long replicates = 20;
    std::string mode = "latent";
    long clusters_search = 1;
    long clusters_eval = 20;
    long max_size = -1;
};

int run_simulate(const Common& common, const SimulateArgs& args);
int run_fit(const Common& common, const FitArgs& args);
int run_select(const Common& common, const SelectArgs& args);
int run_evaluate(const Common& common, const EvaluateArgs& args);
int run_diagnose(const Common& common, const DiagnoseArgs& args);
int run_bootstrap(const Common& common, const BootstrapArgs& args);

/// --threads resolved against LPPI_THREADS and the core count.
int resolve_threads(int requested);

} // namespace lppi::cli
