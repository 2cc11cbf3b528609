#include <lppi/error.hpp>
#include <lppi/latent.hpp>

#include <algorithm>
#include <cmath>
#include <numbers>

namespace lppi {

LatentReference latent_predictions(const PosteriorDraws& draws, const Dataset& data,
                                   const LatentOptions& options)
{
    if (draws.n_coef != data.d() || draws.n_group != data.n_groups()) {
        throw AlignmentError("draws have " + std::to_string(draws.n_coef) + " coefficients and "
                             + std::to_string(draws.n_group) + " group effects; dataset has "
                             + std::to_string(data.d()) + " predictors and "
                             + std::to_string(data.n_groups()) + " groups");
    }
    const auto expected = PosteriorDraws::canonical_columns(data, draws.model);
    if (draws.columns != expected) throw AlignmentError("draw columns do not match dataset predictors");

    LatentReference latent;
    latent.model = draws.model;
    latent.eta = draws.coefficients() * data.X.transpose();
    if (draws.has_intercept()) latent.eta.colwise() += draws.values.col(0);
    if (data.has_groups()) {
        const auto effects = draws.group_effects();
        for (Index i = 0; i < data.n(); ++i) {
            latent.eta.col(i) += effects.col(data.group[static_cast<std::size_t>(i)]);
        }
    }
    if (!latent.eta.allFinite()) {
        Index s = 0, i = 0;
        (!latent.eta.array().isFinite()).cast<int>().maxCoeff(&s, &i);
        throw DomainError("non-finite latent prediction for draw " + std::to_string(s + 1) + ", observation "
                          + std::to_string(i + 1));
    }
    const auto& link = draws.model.link();
    latent.mu = latent.eta.unaryExpr([&](double e) { return link.forward(e); });
    latent.aux.reserve(static_cast<std::size_t>(draws.s()));
    for (Index s = 0; s < draws.s(); ++s) latent.aux.push_back(draws.aux(s));

    if (options.sigma_override) {
        if (!(*options.sigma_override > 0.0)) throw ConfigError("latent dispersion override must be positive");
        latent.sigma = Eigen::VectorXd::Constant(draws.s(), *options.sigma_override);
    } else {
        latent.sigma = default_latent_dispersion(draws.model, latent);
    }
    return latent;
}

Eigen::VectorXd default_latent_dispersion(const ObservationModel& model, const LatentReference& latent)
{
    const Index S = latent.s();
    Eigen::VectorXd sigma(S);
    switch (model.family()) {
        case Family::gaussian:
            for (Index s = 0; s < S; ++s) sigma(s) = latent.aux[static_cast<std::size_t>(s)].sigma;
            return sigma;
        case Family::poisson:
            // Delta method: Var(log y) ~ 1 / mu.
            for (Index s = 0; s < S; ++s) {
                double acc = 0.0;
                for (Index i = 0; i < latent.n(); ++i) acc += 1.0 / std::max(latent.mu(s, i), 1e-6);
                sigma(s) = std::sqrt(acc / static_cast<double>(latent.n()));
            }
            return sigma;
        case Family::weibull:
            // Standard deviation of the log of a Weibull variable (Gumbel).
            for (Index s = 0; s < S; ++s) {
                sigma(s) = std::numbers::pi / (latent.aux[static_cast<std::size_t>(s)].shape * std::sqrt(6.0));
            }
            return sigma;
        case Family::bernoulli:
        case Family::ordinal:
            sigma.setConstant(model.link().kind == LinkKind::probit ? 1.0 : std::numbers::pi / std::sqrt(3.0));
            return sigma;
    }
    return sigma;
}

double gaussian_kl(double eta1, double sigma1, double eta2, double sigma2)
{
    if (!(sigma1 > 0.0) || !(sigma2 > 0.0)) throw DomainError("gaussian_kl: scales must be positive");
    const double d = eta1 - eta2;
    return std::log(sigma2 / sigma1) + (sigma1 * sigma1 + d * d) / (2.0 * sigma2 * sigma2) - 0.5;
}

} // namespace lppi
