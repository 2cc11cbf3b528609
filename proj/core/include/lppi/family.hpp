#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace lppi {

enum class Family { gaussian, bernoulli, poisson, ordinal, weibull };
enum class LinkKind { identity, log, logit, probit };

std::string_view to_string(Family family);
std::string_view to_string(LinkKind link);
Family parse_family(std::string_view name);
LinkKind parse_link(std::string_view name);

// Scalar special functions shared by the likelihoods.
double normal_cdf(double x);
double log_normal_cdf(double x);
double normal_quantile(double p);
double logistic(double x);
double log_logistic(double x);

/// Maps the latent predictor eta to the mean mu and back.
struct LinkFunction
{
    LinkKind kind = LinkKind::identity;

    double forward(double eta) const;
    double inverse(double mu) const;
    /// d mu / d eta at eta.
    double derivative(double eta) const;

    /// CDF of the latent error distribution implied by a binary/cumulative
    /// link (logistic for logit, standard normal for probit).
    double latent_cdf(double x) const;
    double log_latent_cdf(double x) const;
};

/// Family parameters other than the linear predictor. Only the fields
/// relevant to the family are read.
struct AuxParams
{
    double sigma = 1.0;               // gaussian
    std::vector<double> thresholds;   // ordinal, K-1 strictly increasing
    double shape = 1.0;               // weibull
};

/// A single observation. `value` holds the real response, the 0/1 label,
/// the count, the 1-based category, or the survival time; `censored` is
/// only meaningful for survival outcomes.
struct Outcome
{
    double value = 0.0;
    bool censored = false;
};

class ObservationModel
{
public:
    ObservationModel() = default;
    ObservationModel(Family family, LinkKind link, int categories = 0);

    /// Model with the conventional link for `family`.
    static ObservationModel with_default_link(Family family, int categories = 0);

    Family family() const { return family_; }
    const LinkFunction& link() const { return link_; }
    int categories() const { return categories_; }

    bool exponential_family() const;
    /// True only for families whose dispersion is projected (gaussian).
    bool has_dispersion() const { return family_ == Family::gaussian; }
    /// Cumulative models carry location in their thresholds instead.
    bool has_intercept() const { return family_ != Family::ordinal; }

    /// Draw-file column names of the auxiliary parameters, in order.
    std::vector<std::string> aux_names() const;

    void validate_aux(const AuxParams& aux) const;
    void check_support(const Outcome& y) const;

private:
    Family family_ = Family::gaussian;
    LinkFunction link_{};
    int categories_ = 0;
};

double link_inverse(const ObservationModel& model, double eta);

/// Log density (log mass for discrete outcomes) of `y` given the latent
/// predictor and auxiliaries. Checks aux validity and outcome support.
double log_lik(const ObservationModel& model, double eta, const AuxParams& aux, const Outcome& y);

/// Same as `log_lik` without the validity checks; callers must guarantee them.
double log_lik_unchecked(const ObservationModel& model, double eta, const AuxParams& aux,
                         const Outcome& y);

struct NaturalParam
{
    double xi;
    double cumulant;
};

NaturalParam natural_param_and_cumulant(const ObservationModel& model, double mu);

/// Variance function V(mu) of an exponential family (unit dispersion).
double variance_function(const ObservationModel& model, double mu);

/// One observation's term mu* xi(g(eta)) - B(xi(g(eta))) of the
/// exponential-family projection objective, computed in log space.
double expfam_objective_term(const ObservationModel& model, double mu_star, double eta);

/// Supremum of `expfam_objective_term` over eta, attained at mu = mu_star.
double expfam_saturated_term(const ObservationModel& model, double mu_star);

} // namespace lppi
