#include <lppi/datagen.hpp>
#include <lppi/error.hpp>
#include <lppi/random.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

namespace lppi {
namespace {

constexpr int default_categories = 5;
constexpr double poisson_log_mean_cap = 20.0;

double latent_noise(const ObservationModel& model, std::mt19937_64& rng)
{
    if (model.link().kind == LinkKind::probit) return std::normal_distribution<double>(0.0, 1.0)(rng);
    // logistic via inverse CDF
    double u = 0.0;
    while (u <= 0.0 || u >= 1.0) u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    return std::log(u / (1.0 - u));
}

double empirical_quantile(std::vector<double> v, double p)
{
    std::sort(v.begin(), v.end());
    const double pos = p * static_cast<double>(v.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, v.size() - 1);
    return v[lo] + (pos - static_cast<double>(lo)) * (v[hi] - v[lo]);
}

} // namespace

SimConfig SimConfig::for_family(Family family, Index n, Index d, double rho, std::uint64_t seed)
{
    SimConfig c;
    c.n = n;
    c.d = d;
    c.rho = rho;
    c.seed = seed;
    c.model = ObservationModel::with_default_link(family, family == Family::ordinal ? default_categories : 0);
    return c;
}

Simulation simulate(const SimConfig& config)
{
    if (config.n < 1 || config.d < 1) throw ConfigError("simulate: n and d must be positive");
    if (config.n_test < 0) throw ConfigError("simulate: n_test must be non-negative");
    if (!(config.rho >= 0.0 && config.rho < 1.0)) throw ConfigError("simulate: rho must lie in [0, 1)");
    if (!(config.sparsity >= 0.0 && config.sparsity <= 1.0)) throw ConfigError("simulate: sparsity must lie in [0, 1]");
    if (!(config.coef_scale >= 0.0)) throw ConfigError("simulate: coef_scale must be non-negative");
    if (!(config.sigma > 0.0) || !(config.weibull_shape > 0.0) || !(config.censor_time > 0.0)) {
        throw ConfigError("simulate: sigma, weibull_shape and censor_time must be positive");
    }
    const auto& model = config.model;
    const Family family = model.family();
    if (family == Family::ordinal && model.categories() < 2) throw ConfigError("simulate: ordinal needs K >= 2");

    const Index D = config.d;
    const Index total = config.n + config.n_test;
    std::mt19937_64 rng(derive_seed(config.seed, Stream::simulation));
    std::normal_distribution<double> normal(0.0, 1.0);

    Eigen::MatrixXd sigma_rho = Eigen::MatrixXd::Constant(D, D, config.rho);
    sigma_rho.diagonal().setOnes();
    const Eigen::LLT<Eigen::MatrixXd> llt(sigma_rho);
    if (llt.info() != Eigen::Success) throw ConfigError("simulate: correlation matrix is not positive definite");

    Eigen::MatrixXd Z(total, D);
    for (Index i = 0; i < total; ++i) {
        for (Index j = 0; j < D; ++j) Z(i, j) = normal(rng);
    }
    const Eigen::MatrixXd X = Z * llt.matrixU();   // rows ~ N(0, L L')

    GroundTruth truth;
    truth.beta = Eigen::VectorXd::Zero(D);
    truth.z.assign(static_cast<std::size_t>(D), false);
    std::bernoulli_distribution relevant(config.sparsity);
    for (Index j = 0; j < D; ++j) {
        const bool on = relevant(rng);
        const double b = normal(rng) * config.coef_scale;
        truth.z[static_cast<std::size_t>(j)] = on;
        if (on) truth.beta(j) = b;
    }
    const Eigen::VectorXd eta = X * truth.beta;

    std::vector<Outcome> y(static_cast<std::size_t>(total));
    switch (family) {
        case Family::gaussian:
            truth.aux.sigma = config.sigma;
            for (Index i = 0; i < total; ++i) y[i].value = eta(i) + config.sigma * normal(rng);
            break;
        case Family::bernoulli: {
            std::uniform_real_distribution<double> unif(0.0, 1.0);
            for (Index i = 0; i < total; ++i) y[i].value = unif(rng) < link_inverse(model, eta(i)) ? 1.0 : 0.0;
            break;
        }
        case Family::poisson:
            for (Index i = 0; i < total; ++i) {
                std::poisson_distribution<long long> pois(std::exp(std::min(eta(i), poisson_log_mean_cap)));
                y[i].value = static_cast<double>(pois(rng));
            }
            break;
        case Family::ordinal: {
            const int K = model.categories();
            std::vector<double> latent(static_cast<std::size_t>(total));
            for (Index i = 0; i < total; ++i) latent[i] = eta(i) + latent_noise(model, rng);
            const std::vector<double> train_latent(latent.begin(), latent.begin() + config.n);
            for (int k = 1; k < K; ++k) {
                truth.aux.thresholds.push_back(
                    empirical_quantile(train_latent, static_cast<double>(k) / static_cast<double>(K)));
            }
            // Coincident quantiles on tiny samples would break strict ordering.
            for (std::size_t k = 1; k < truth.aux.thresholds.size(); ++k) {
                auto& t = truth.aux.thresholds[k];
                t = std::max(t, std::nextafter(truth.aux.thresholds[k - 1], INFINITY));
            }
            for (Index i = 0; i < total; ++i) {
                const auto& th = truth.aux.thresholds;
                y[i].value = 1.0 + static_cast<double>(std::lower_bound(th.begin(), th.end(), latent[i]) - th.begin());
            }
            break;
        }
        case Family::weibull: {
            truth.aux.shape = config.weibull_shape;
            std::weibull_distribution<double> weibull(config.weibull_shape, 1.0);
            for (Index i = 0; i < total; ++i) {
                const double t = std::exp(eta(i)) * weibull(rng);
                y[i].censored = !(t < config.censor_time);
                y[i].value = y[i].censored ? config.censor_time : std::max(t, 1e-300);
            }
            break;
        }
    }

    std::vector<std::string> names;
    for (Index j = 0; j < D; ++j) names.push_back("x" + std::to_string(j + 1));
    auto make = [&](Index begin, Index count) {
        Dataset d;
        d.X = X.middleRows(begin, count);
        d.y.assign(y.begin() + begin, y.begin() + begin + count);
        d.names = names;
        return d;
    };

    Simulation out;
    out.train = make(0, config.n);
    if (config.n_test > 0) out.test = make(config.n, config.n_test);
    truth.eta = eta.head(config.n);
    out.truth = std::move(truth);
    return out;
}

std::vector<SimConfig> simulation_grid(const std::vector<Index>& ns, const std::vector<Index>& ds,
                                       const std::vector<double>& rhos, const std::vector<Family>& families,
                                       Index replicates, std::uint64_t seed)
{
    if (ns.empty() || ds.empty() || rhos.empty() || families.empty()) {
        throw ConfigError("simulation_grid: every list must be non-empty");
    }
    if (replicates < 1) throw ConfigError("simulation_grid: replicates must be positive");
    std::vector<SimConfig> out;
    std::uint64_t cell = 0;
    for (Family f : families) {
        for (double rho : rhos) {
            for (Index n : ns) {
                for (Index d : ds) {
                    for (Index r = 0; r < replicates; ++r) {
                        out.push_back(SimConfig::for_family(f, n, d, rho, derive_seed(seed, Stream::simulation, ++cell)));
                    }
                }
            }
        }
    }
    return out;
}

} // namespace lppi
