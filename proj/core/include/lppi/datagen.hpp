#pragma once

#include <lppi/dataset.hpp>
#include <lppi/family.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

namespace lppi {

struct SimConfig
{
    Index n = 100;
    Index d = 50;
    double rho = 0.0;              // uniform predictor correlation in [0, 1)
    ObservationModel model = ObservationModel::with_default_link(Family::gaussian);
    std::uint64_t seed = 1;
    double sparsity = 0.6;         // P(z_d = 1)
    double coef_scale = 1.5;       // SD of nonzero coefficients
    double sigma = 1.0;            // gaussian noise SD
    double weibull_shape = 1.5;
    double censor_time = 5.0;
    Index n_test = 0;              // extra rows from the same truth

    /// Ordinal models need the category count; 5 when unset.
    static SimConfig for_family(Family family, Index n, Index d, double rho, std::uint64_t seed);
};

struct GroundTruth
{
    Eigen::VectorXd beta;
    std::vector<bool> z;
    Eigen::VectorXd eta;           // training rows
    AuxParams aux;
};

struct Simulation
{
    Dataset train;
    std::optional<Dataset> test;
    GroundTruth truth;
};

/// x ~ N(0, Sigma_rho) through the Cholesky factor of Sigma_rho,
/// z ~ Bernoulli(sparsity), beta = z * N(0, coef_scale^2), eta = x' beta,
/// y from the family. Ordinal thresholds sit at the 0.2..0.8 quantiles of
/// the training latent-plus-noise values; survival times above
/// censor_time are censored there. Poisson log-means are capped at 20.
Simulation simulate(const SimConfig& config);

/// Cartesian product over the lists, `replicates` configs per cell, each
/// with its own seed derived from `seed`.
std::vector<SimConfig> simulation_grid(const std::vector<Index>& ns, const std::vector<Index>& ds,
                                       const std::vector<double>& rhos, const std::vector<Family>& families,
                                       Index replicates, std::uint64_t seed);

} // namespace lppi
