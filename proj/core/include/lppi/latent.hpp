#pragma once

#include <lppi/dataset.hpp>
#include <lppi/draws.hpp>
#include <lppi/family.hpp>

#include <Eigen/Dense>

#include <optional>
#include <vector>

namespace lppi {

/// Reference-model predictions in latent (linear predictor) and response
/// units, with the per-draw Gaussian dispersion of the latent predictive.
struct LatentReference
{
    ObservationModel model;
    Eigen::MatrixXd eta;            // S x N latent predictions
    Eigen::MatrixXd mu;             // S x N mean predictions, g(eta)
    Eigen::VectorXd sigma;          // S latent dispersions
    std::vector<AuxParams> aux;     // S reference auxiliaries

    Index s() const { return eta.rows(); }
    Index n() const { return eta.cols(); }
};

struct LatentOptions
{
    /// Replaces the family default dispersion for every draw.
    std::optional<double> sigma_override;
};

/// eta[s, i] = intercept_s + beta_s . x_i (+ group effect of row i).
/// Throws DomainError when any prediction overflows.
LatentReference latent_predictions(const PosteriorDraws& draws, const Dataset& data,
                                   const LatentOptions& options = {});

/// Family default latent dispersion per draw. Per-observation values
/// (poisson delta method) are collapsed by root mean square.
Eigen::VectorXd default_latent_dispersion(const ObservationModel& model, const LatentReference& latent);

/// KL( N(eta1, sigma1^2) || N(eta2, sigma2^2) ).
double gaussian_kl(double eta1, double sigma1, double eta2, double sigma2);

} // namespace lppi
