#include <lppi/error.hpp>
#include <lppi/family.hpp>

#include <boost/math/special_functions/erf.hpp>

#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace lppi {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// log(exp(a) - exp(b)) for a >= b.
double log_sub_exp(double a, double b)
{
    if (b == -inf) return a;
    if (a <= b) return -inf;
    return a + std::log1p(-std::exp(b - a));
}

double xlogx(double x) { return x > 0.0 ? x * std::log(x) : 0.0; }

[[noreturn]] void domain(const std::string& what) { throw DomainError(what); }

bool is_integer(double v) { return std::floor(v) == v; }

} // namespace

std::string_view to_string(Family family)
{
    switch (family) {
        case Family::gaussian: return "gaussian";
        case Family::bernoulli: return "bernoulli";
        case Family::poisson: return "poisson";
        case Family::ordinal: return "ordinal";
        case Family::weibull: return "weibull";
    }
    return "?";
}

std::string_view to_string(LinkKind link)
{
    switch (link) {
        case LinkKind::identity: return "identity";
        case LinkKind::log: return "log";
        case LinkKind::logit: return "logit";
        case LinkKind::probit: return "probit";
    }
    return "?";
}

Family parse_family(std::string_view name)
{
    for (auto f : {Family::gaussian, Family::bernoulli, Family::poisson, Family::ordinal,
                   Family::weibull}) {
        if (to_string(f) == name) return f;
    }
    throw ConfigError("unknown family '" + std::string(name) + "'");
}

LinkKind parse_link(std::string_view name)
{
    for (auto l : {LinkKind::identity, LinkKind::log, LinkKind::logit, LinkKind::probit}) {
        if (to_string(l) == name) return l;
    }
    throw ConfigError("unknown link '" + std::string(name) + "'");
}

double normal_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2 / 2.0); }

double log_normal_cdf(double x)
{
    if (x > -35.0) return std::log(normal_cdf(x));
    // Asymptotic series of the Mills ratio; erfc underflows below about -37.
    const double x2 = x * x;
    const double series = 1.0 - 1.0 / x2 + 3.0 / (x2 * x2) - 15.0 / (x2 * x2 * x2)
                          + 105.0 / (x2 * x2 * x2 * x2);
    return -0.5 * x2 - 0.5 * std::log(2.0 * std::numbers::pi) - std::log(-x) + std::log(series);
}

double normal_quantile(double p)
{
    if (!(p > 0.0 && p < 1.0)) domain("normal_quantile: p must lie in (0, 1)");
    return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * p);
}

double logistic(double x)
{
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

double log_logistic(double x)
{
    if (x >= 0.0) return -std::log1p(std::exp(-x));
    return x - std::log1p(std::exp(x));
}

double LinkFunction::forward(double eta) const
{
    switch (kind) {
        case LinkKind::identity: return eta;
        case LinkKind::log: return std::exp(eta);
        case LinkKind::logit: return logistic(eta);
        case LinkKind::probit: return normal_cdf(eta);
    }
    return eta;
}

double LinkFunction::inverse(double mu) const
{
    switch (kind) {
        case LinkKind::identity: return mu;
        case LinkKind::log:
            if (!(mu > 0.0)) domain("log link: mean must be positive");
            return std::log(mu);
        case LinkKind::logit:
            if (!(mu > 0.0 && mu < 1.0)) domain("logit link: mean must lie in (0, 1)");
            return std::log(mu) - std::log1p(-mu);
        case LinkKind::probit:
            if (!(mu > 0.0 && mu < 1.0)) domain("probit link: mean must lie in (0, 1)");
            return normal_quantile(mu);
    }
    return mu;
}

double LinkFunction::derivative(double eta) const
{
    switch (kind) {
        case LinkKind::identity: return 1.0;
        case LinkKind::log: return std::exp(eta);
        case LinkKind::logit: {
            const double p = logistic(eta);
            return p * (1.0 - p);
        }
        case LinkKind::probit:
            return std::exp(-0.5 * eta * eta) / std::sqrt(2.0 * std::numbers::pi);
    }
    return 1.0;
}

double LinkFunction::latent_cdf(double x) const
{
    switch (kind) {
        case LinkKind::logit: return logistic(x);
        case LinkKind::probit: return normal_cdf(x);
        default: throw ConfigError("link has no latent error distribution");
    }
}

double LinkFunction::log_latent_cdf(double x) const
{
    switch (kind) {
        case LinkKind::logit: return log_logistic(x);
        case LinkKind::probit: return log_normal_cdf(x);
        default: throw ConfigError("link has no latent error distribution");
    }
}

ObservationModel::ObservationModel(Family family, LinkKind link, int categories)
    : family_(family), link_{link}, categories_(categories)
{
    bool ok = false;
    switch (family) {
        case Family::gaussian: ok = link == LinkKind::identity; break;
        case Family::bernoulli:
        case Family::ordinal: ok = link == LinkKind::logit || link == LinkKind::probit; break;
        case Family::poisson:
        case Family::weibull: ok = link == LinkKind::log; break;
    }
    if (!ok) {
        throw ConfigError("link '" + std::string(to_string(link)) + "' is not supported for family '"
                          + std::string(to_string(family)) + "'");
    }
    if (family == Family::ordinal) {
        if (categories < 2) throw ConfigError("ordinal model requires at least 2 categories");
    } else {
        categories_ = 0;
    }
}

ObservationModel ObservationModel::with_default_link(Family family, int categories)
{
    switch (family) {
        case Family::gaussian: return {family, LinkKind::identity};
        case Family::bernoulli: return {family, LinkKind::logit};
        case Family::poisson: return {family, LinkKind::log};
        case Family::ordinal: return {family, LinkKind::probit, categories};
        case Family::weibull: return {family, LinkKind::log};
    }
    return {};
}

bool ObservationModel::exponential_family() const
{
    return family_ == Family::gaussian || family_ == Family::bernoulli || family_ == Family::poisson;
}

std::vector<std::string> ObservationModel::aux_names() const
{
    switch (family_) {
        case Family::gaussian: return {"sigma"};
        case Family::ordinal: {
            std::vector<std::string> names;
            for (int k = 1; k < categories_; ++k) names.push_back("tau_" + std::to_string(k));
            return names;
        }
        case Family::weibull: return {"alpha"};
        default: return {};
    }
}

void ObservationModel::validate_aux(const AuxParams& aux) const
{
    switch (family_) {
        case Family::gaussian:
            if (!(aux.sigma > 0.0) || !std::isfinite(aux.sigma)) domain("sigma must be positive");
            break;
        case Family::ordinal: {
            if (static_cast<int>(aux.thresholds.size()) != categories_ - 1) {
                domain("ordinal model needs " + std::to_string(categories_ - 1) + " thresholds");
            }
            for (std::size_t k = 0; k < aux.thresholds.size(); ++k) {
                if (!std::isfinite(aux.thresholds[k])) domain("thresholds must be finite");
                if (k > 0 && !(aux.thresholds[k] > aux.thresholds[k - 1])) {
                    domain("thresholds must be strictly increasing");
                }
            }
            break;
        }
        case Family::weibull:
            if (!(aux.shape > 0.0) || !std::isfinite(aux.shape)) domain("alpha must be positive");
            break;
        default: break;
    }
}

void ObservationModel::check_support(const Outcome& y) const
{
    const double v = y.value;
    if (!std::isfinite(v)) domain("outcome must be finite");
    switch (family_) {
        case Family::gaussian: break;
        case Family::bernoulli:
            if (v != 0.0 && v != 1.0) domain("bernoulli outcome must be 0 or 1");
            break;
        case Family::poisson:
            if (v < 0.0 || !is_integer(v)) domain("poisson outcome must be a non-negative integer");
            break;
        case Family::ordinal:
            if (!is_integer(v) || v < 1.0 || v > categories_) {
                domain("ordinal outcome must be a category in 1.." + std::to_string(categories_));
            }
            break;
        case Family::weibull:
            if (!(v > 0.0)) domain("survival time must be positive");
            break;
    }
}

double link_inverse(const ObservationModel& model, double eta)
{
    if (!std::isfinite(eta)) domain("latent predictor must be finite");
    return model.link().forward(eta);
}

double log_lik_unchecked(const ObservationModel& model, double eta, const AuxParams& aux,
                         const Outcome& y)
{
    const auto& link = model.link();
    switch (model.family()) {
        case Family::gaussian: {
            const double z = (y.value - eta) / aux.sigma;
            return -0.5 * z * z - std::log(aux.sigma) - 0.5 * std::log(2.0 * std::numbers::pi);
        }
        case Family::bernoulli:
            return y.value == 1.0 ? link.log_latent_cdf(eta) : link.log_latent_cdf(-eta);
        case Family::poisson:
            return y.value * eta - std::exp(eta) - std::lgamma(y.value + 1.0);
        case Family::ordinal: {
            // P(y = k) = F(tau_k - eta) - F(tau_{k-1} - eta), tau_0 = -inf, tau_K = +inf.
            const int k = static_cast<int>(y.value);
            const int K = model.categories();
            const double lo = k == 1 ? -inf : aux.thresholds[k - 2] - eta;
            const double hi = k == K ? inf : aux.thresholds[k - 1] - eta;
            if (lo == -inf) return link.log_latent_cdf(hi);
            if (hi == inf) return link.log_latent_cdf(-lo);
            // Both latent CDFs are symmetric; subtract in the tail with more precision.
            if (lo > 0.0) return log_sub_exp(link.log_latent_cdf(-lo), link.log_latent_cdf(-hi));
            return log_sub_exp(link.log_latent_cdf(hi), link.log_latent_cdf(lo));
        }
        case Family::weibull: {
            // Accelerated failure time: log-scale = eta, shared shape alpha.
            const double alpha = aux.shape;
            const double log_ratio = std::log(y.value) - eta;
            const double cum_hazard = std::exp(alpha * log_ratio);
            if (y.censored) return -cum_hazard;
            return std::log(alpha) - eta + (alpha - 1.0) * log_ratio - cum_hazard;
        }
    }
    return 0.0;
}

double log_lik(const ObservationModel& model, double eta, const AuxParams& aux, const Outcome& y)
{
    if (!std::isfinite(eta)) domain("latent predictor must be finite");
    model.validate_aux(aux);
    model.check_support(y);
    return log_lik_unchecked(model, eta, aux, y);
}

NaturalParam natural_param_and_cumulant(const ObservationModel& model, double mu)
{
    switch (model.family()) {
        case Family::gaussian:
            if (!std::isfinite(mu)) domain("gaussian mean must be finite");
            return {mu, 0.5 * mu * mu};
        case Family::bernoulli:
            if (!(mu > 0.0 && mu < 1.0)) domain("bernoulli mean must lie in (0, 1)");
            return {std::log(mu) - std::log1p(-mu), -std::log1p(-mu)};
        case Family::poisson:
            if (!(mu > 0.0)) domain("poisson mean must be positive");
            return {std::log(mu), mu};
        default:
            throw UnsupportedFamilyError("family '" + std::string(to_string(model.family()))
                                         + "' is not in the exponential family");
    }
}

double variance_function(const ObservationModel& model, double mu)
{
    switch (model.family()) {
        case Family::gaussian: return 1.0;
        case Family::bernoulli: return mu * (1.0 - mu);
        case Family::poisson: return mu;
        default:
            throw UnsupportedFamilyError("family '" + std::string(to_string(model.family()))
                                         + "' is not in the exponential family");
    }
}

double expfam_objective_term(const ObservationModel& model, double mu_star, double eta)
{
    const auto& link = model.link();
    switch (model.family()) {
        case Family::gaussian: {
            const double mu = link.forward(eta);
            return mu_star * mu - 0.5 * mu * mu;
        }
        case Family::bernoulli:
            // mu* log mu + (1 - mu*) log(1 - mu), with symmetric latent CDF.
            return mu_star * link.log_latent_cdf(eta) + (1.0 - mu_star) * link.log_latent_cdf(-eta);
        case Family::poisson: return mu_star * eta - std::exp(eta);
        default:
            throw UnsupportedFamilyError("family '" + std::string(to_string(model.family()))
                                         + "' is not in the exponential family");
    }
}

double expfam_saturated_term(const ObservationModel& model, double mu_star)
{
    switch (model.family()) {
        case Family::gaussian: return 0.5 * mu_star * mu_star;
        case Family::bernoulli: return xlogx(mu_star) + xlogx(1.0 - mu_star);
        case Family::poisson: return xlogx(mu_star) - mu_star;
        default:
            throw UnsupportedFamilyError("family '" + std::string(to_string(model.family()))
                                         + "' is not in the exponential family");
    }
}

} // namespace lppi
