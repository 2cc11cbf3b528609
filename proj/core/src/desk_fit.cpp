#include <lppi/draws.hpp>
#include <lppi/error.hpp>

#include <gsl/gsl_errno.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

namespace lppi {
namespace detail {
namespace {

double log_normal_pdf(double x) { return -0.5 * x * x - 0.5 * std::log(2.0 * std::numbers::pi); }

double log_latent_pdf(const LinkFunction& link, double x)
{
    if (link.kind == LinkKind::probit) return log_normal_pdf(x);
    // Logistic density f = F(x) F(-x).
    return log_logistic(x) + log_logistic(-x);
}

// Derivatives of one observation's log likelihood with respect to eta and
// to the (constrained) auxiliaries. aux_grad is accumulated, not overwritten.
double loglik_grad(const ObservationModel& model, double eta, const AuxParams& aux, const Outcome& y,
                   double* aux_grad)
{
    const auto& link = model.link();
    switch (model.family()) {
        case Family::gaussian: {
            const double z = (y.value - eta) / aux.sigma;
            aux_grad[0] += (z * z - 1.0) / aux.sigma;
            return z / aux.sigma;
        }
        case Family::bernoulli: {
            if (link.kind == LinkKind::logit) return y.value - logistic(eta);
            const double ratio_pos = std::exp(log_normal_pdf(eta) - log_normal_cdf(eta));
            const double ratio_neg = std::exp(log_normal_pdf(eta) - log_normal_cdf(-eta));
            return y.value == 1.0 ? ratio_pos : -ratio_neg;
        }
        case Family::poisson: return y.value - std::exp(eta);
        case Family::ordinal: {
            const int k = static_cast<int>(y.value);
            const int K = model.categories();
            const double log_p = log_lik_unchecked(model, eta, aux, y);
            double d_eta = 0.0;
            if (k < K) {
                const double r = std::exp(log_latent_pdf(link, aux.thresholds[k - 1] - eta) - log_p);
                aux_grad[k - 1] += r;
                d_eta -= r;
            }
            if (k > 1) {
                const double r = std::exp(log_latent_pdf(link, aux.thresholds[k - 2] - eta) - log_p);
                aux_grad[k - 2] -= r;
                d_eta += r;
            }
            return d_eta;
        }
        case Family::weibull: {
            const double alpha = aux.shape;
            const double log_ratio = std::log(y.value) - eta;
            const double z = std::exp(alpha * log_ratio);
            if (y.censored) {
                aux_grad[0] += -z * log_ratio;
                return alpha * z;
            }
            aux_grad[0] += 1.0 / alpha + log_ratio - z * log_ratio;
            return -alpha + alpha * z;
        }
    }
    return 0.0;
}

} // namespace

DeskTarget::DeskTarget(const Dataset& data, const ObservationModel& model, double prior_scale)
    : data_(data), model_(model), prior_scale_(prior_scale)
{
    if (!(prior_scale > 0.0)) throw ConfigError("prior_scale must be positive");
    coef_offset_ = model.has_intercept() ? 1 : 0;
    group_offset_ = coef_offset_ + data.d();
    aux_offset_ = group_offset_ + data.n_groups();
    n_aux_ = static_cast<Index>(model.aux_names().size());
    dim_ = aux_offset_ + n_aux_;
}

AuxParams DeskTarget::aux_from(const Eigen::VectorXd& theta) const
{
    AuxParams aux;
    switch (model_.family()) {
        case Family::gaussian: aux.sigma = std::exp(theta(aux_offset_)); break;
        case Family::weibull: aux.shape = std::exp(theta(aux_offset_)); break;
        case Family::ordinal: {
            aux.thresholds.resize(static_cast<std::size_t>(n_aux_));
            double tau = theta(aux_offset_);
            aux.thresholds[0] = tau;
            for (Index k = 1; k < n_aux_; ++k) {
                tau += std::exp(theta(aux_offset_ + k));
                aux.thresholds[static_cast<std::size_t>(k)] = tau;
            }
            break;
        }
        default: break;
    }
    return aux;
}

Eigen::VectorXd DeskTarget::initial_point() const
{
    Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim_);
    const auto n = static_cast<double>(data_.n());
    double mean = 0.0;
    for (const auto& y : data_.y) mean += y.value;
    mean /= n;
    switch (model_.family()) {
        case Family::gaussian: {
            double ss = 0.0;
            for (const auto& y : data_.y) ss += (y.value - mean) * (y.value - mean);
            theta(0) = mean;
            theta(aux_offset_) = 0.5 * std::log(std::max(ss / n, 1e-8));
            break;
        }
        case Family::bernoulli: {
            const double p = std::clamp(mean, 0.02, 0.98);
            theta(0) = model_.link().inverse(p);
            break;
        }
        case Family::poisson: theta(0) = std::log(std::max(mean, 1e-2)); break;
        case Family::weibull: theta(0) = std::log(mean); break;
        case Family::ordinal: {
            // Thresholds at the latent quantiles of the cumulative proportions.
            const int K = model_.categories();
            std::vector<double> counts(static_cast<std::size_t>(K), 0.0);
            for (const auto& y : data_.y) counts[static_cast<std::size_t>(y.value) - 1] += 1.0;
            double cum = 0.0, prev = 0.0;
            for (int k = 0; k < K - 1; ++k) {
                cum += counts[static_cast<std::size_t>(k)];
                const double p = std::clamp((cum + 0.5) / (n + 1.0), 1e-3, 1.0 - 1e-3);
                double tau = model_.link().inverse(p);
                if (k == 0) {
                    theta(aux_offset_) = tau;
                } else {
                    tau = std::max(tau, prev + 1e-2);
                    theta(aux_offset_ + k) = std::log(tau - prev);
                }
                prev = tau;
            }
            break;
        }
    }
    return theta;
}

Eigen::RowVectorXd DeskTarget::to_draw(const Eigen::VectorXd& theta) const
{
    Eigen::RowVectorXd row = theta.transpose();
    const AuxParams aux = aux_from(theta);
    switch (model_.family()) {
        case Family::gaussian: row(aux_offset_) = aux.sigma; break;
        case Family::weibull: row(aux_offset_) = aux.shape; break;
        case Family::ordinal:
            for (Index k = 0; k < n_aux_; ++k) row(aux_offset_ + k) = aux.thresholds[static_cast<std::size_t>(k)];
            break;
        default: break;
    }
    return row;
}

double DeskTarget::log_density(const Eigen::VectorXd& theta, Eigen::VectorXd* grad) const
{
    const AuxParams aux = aux_from(theta);
    Eigen::VectorXd eta = data_.X * theta.segment(coef_offset_, data_.d());
    if (model_.has_intercept()) eta.array() += theta(0);
    if (data_.has_groups()) {
        for (Index i = 0; i < data_.n(); ++i) {
            eta(i) += theta(group_offset_ + data_.group[static_cast<std::size_t>(i)]);
        }
    }

    const double inv_var = 1.0 / (prior_scale_ * prior_scale_);
    double lp = -0.5 * theta.squaredNorm() * inv_var;
    if (!grad) {
        for (Index i = 0; i < data_.n(); ++i) {
            lp += log_lik_unchecked(model_, eta(i), aux, data_.y[static_cast<std::size_t>(i)]);
        }
        return std::isfinite(lp) ? lp : -std::numeric_limits<double>::infinity();
    }

    Eigen::VectorXd d_eta(data_.n());
    std::vector<double> d_aux(static_cast<std::size_t>(std::max<Index>(n_aux_, 1)), 0.0);
    for (Index i = 0; i < data_.n(); ++i) {
        const auto& y = data_.y[static_cast<std::size_t>(i)];
        lp += log_lik_unchecked(model_, eta(i), aux, y);
        d_eta(i) = loglik_grad(model_, eta(i), aux, y, d_aux.data());
    }
    grad->resize(dim_);
    *grad = -theta * inv_var;
    if (model_.has_intercept()) (*grad)(0) += d_eta.sum();
    grad->segment(coef_offset_, data_.d()) += data_.X.transpose() * d_eta;
    if (data_.has_groups()) {
        for (Index i = 0; i < data_.n(); ++i) {
            (*grad)(group_offset_ + data_.group[static_cast<std::size_t>(i)]) += d_eta(i);
        }
    }
    // Chain rule onto the unconstrained auxiliaries.
    switch (model_.family()) {
        case Family::gaussian: (*grad)(aux_offset_) += d_aux[0] * aux.sigma; break;
        case Family::weibull: (*grad)(aux_offset_) += d_aux[0] * aux.shape; break;
        case Family::ordinal: {
            double tail = 0.0;
            for (Index k = n_aux_ - 1; k >= 0; --k) {
                tail += d_aux[static_cast<std::size_t>(k)];
                (*grad)(aux_offset_ + k) += k == 0 ? tail : tail * std::exp(theta(aux_offset_ + k));
            }
            break;
        }
        default: break;
    }
    return std::isfinite(lp) ? lp : -std::numeric_limits<double>::infinity();
}

} // namespace detail

namespace {

using detail::DeskTarget;

struct GslContext
{
    const DeskTarget* target;
};

Eigen::Map<const Eigen::VectorXd> view(const gsl_vector* v)
{
    return {v->data, static_cast<Index>(v->size)};
}

double neg_f(const gsl_vector* x, void* params)
{
    const auto* ctx = static_cast<GslContext*>(params);
    const double lp = ctx->target->log_density(view(x));
    return std::isfinite(lp) ? -lp : 1e300;
}

void neg_df(const gsl_vector* x, void* params, gsl_vector* g)
{
    const auto* ctx = static_cast<GslContext*>(params);
    Eigen::VectorXd grad;
    ctx->target->log_density(view(x), &grad);
    for (std::size_t i = 0; i < g->size; ++i) gsl_vector_set(g, i, -grad(static_cast<Index>(i)));
}

void neg_fdf(const gsl_vector* x, void* params, double* f, gsl_vector* g)
{
    const auto* ctx = static_cast<GslContext*>(params);
    Eigen::VectorXd grad;
    const double lp = ctx->target->log_density(view(x), &grad);
    *f = std::isfinite(lp) ? -lp : 1e300;
    for (std::size_t i = 0; i < g->size; ++i) gsl_vector_set(g, i, -grad(static_cast<Index>(i)));
}

// Posterior mode by BFGS from the target's initial point.
Eigen::VectorXd find_mode(const DeskTarget& target)
{
    const auto dim = static_cast<std::size_t>(target.dim());
    GslContext ctx{&target};
    gsl_multimin_function_fdf fn;
    fn.n = dim;
    fn.f = &neg_f;
    fn.df = &neg_df;
    fn.fdf = &neg_fdf;
    fn.params = &ctx;

    const Eigen::VectorXd start = target.initial_point();
    gsl_vector* x = gsl_vector_alloc(dim);
    for (std::size_t i = 0; i < dim; ++i) gsl_vector_set(x, i, start(static_cast<Index>(i)));

    auto* solver = gsl_multimin_fdfminimizer_alloc(gsl_multimin_fdfminimizer_vector_bfgs2, dim);
    gsl_multimin_fdfminimizer_set(solver, &fn, x, 0.1, 0.1);
    for (int iter = 0; iter < 2000; ++iter) {
        if (gsl_multimin_fdfminimizer_iterate(solver) != GSL_SUCCESS) break;
        if (gsl_multimin_test_gradient(solver->gradient, 1e-6) == GSL_SUCCESS) break;
    }
    Eigen::VectorXd mode = view(gsl_multimin_fdfminimizer_x(solver));
    if (!std::isfinite(target.log_density(mode))) mode = start;
    gsl_multimin_fdfminimizer_free(solver);
    gsl_vector_free(x);
    return mode;
}

// Negative Hessian from central differences of the analytic gradient.
Eigen::MatrixXd precision_at(const DeskTarget& target, const Eigen::VectorXd& at)
{
    const Index dim = target.dim();
    Eigen::MatrixXd hess(dim, dim);
    Eigen::VectorXd gp, gm;
    for (Index j = 0; j < dim; ++j) {
        const double h = 1e-5 * std::max(1.0, std::abs(at(j)));
        Eigen::VectorXd tp = at, tm = at;
        tp(j) += h;
        tm(j) -= h;
        target.log_density(tp, &gp);
        target.log_density(tm, &gm);
        hess.col(j) = -(gp - gm) / (2.0 * h);
    }
    return 0.5 * (hess + hess.transpose());
}

// Newton polish of the BFGS result; sharply peaked posteriors (large
// counts) stall BFGS far from the mode in absolute gradient terms.
Eigen::VectorXd newton_refine(const DeskTarget& target, Eigen::VectorXd x)
{
    Eigen::VectorXd grad;
    double lp = target.log_density(x, &grad);
    for (int iter = 0; iter < 50 && std::isfinite(lp); ++iter) {
        const Eigen::MatrixXd precision = precision_at(target, x);
        Eigen::LLT<Eigen::MatrixXd> llt(precision);
        if (!precision.allFinite() || llt.info() != Eigen::Success) break;
        const Eigen::VectorXd delta = llt.solve(grad);
        double t = 1.0;
        bool improved = false;
        for (int half = 0; half < 30; ++half, t *= 0.5) {
            Eigen::VectorXd g_new;
            const Eigen::VectorXd trial = x + t * delta;
            const double lp_new = target.log_density(trial, &g_new);
            if (std::isfinite(lp_new) && lp_new >= lp) {
                improved = lp_new > lp;
                x = trial;
                lp = lp_new;
                grad = g_new;
                break;
            }
        }
        if (!improved || (t * delta).cwiseAbs().maxCoeff() < 1e-10 * (1.0 + x.cwiseAbs().maxCoeff())) break;
    }
    return x;
}

// Covariance factor L with L L^T = precision^{-1} at `mode`.
Eigen::MatrixXd laplace_factor(const DeskTarget& target, const Eigen::VectorXd& mode)
{
    const Index dim = target.dim();
    Eigen::MatrixXd precision = precision_at(target, mode);
    if (!precision.allFinite()) precision = Eigen::MatrixXd::Identity(dim, dim);
    double jitter = 0.0;
    for (int attempt = 0; attempt < 30; ++attempt) {
        Eigen::LLT<Eigen::MatrixXd> llt(precision + jitter * Eigen::MatrixXd::Identity(dim, dim));
        if (llt.info() == Eigen::Success) {
            Eigen::MatrixXd lower = llt.matrixL();
            return lower.transpose().triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(dim, dim));
        }
        jitter = jitter == 0.0 ? 1e-6 * std::max(1.0, precision.diagonal().cwiseAbs().maxCoeff())
                               : jitter * 10.0;
    }
    return Eigen::MatrixXd::Identity(dim, dim) * 0.1;
}

} // namespace

PosteriorDraws fit_reference_desk(const Dataset& data, const ObservationModel& model,
                                  const DeskFitOptions& options)
{
    if (options.draws < 1) throw ConfigError("desk fit: need at least one draw");
    data.validate(model);
    DeskTarget target(data, model, options.prior_scale);
    const Index dim = target.dim();

    static std::once_flag gsl_quiet;
    std::call_once(gsl_quiet, [] { gsl_set_error_handler_off(); });
    const Eigen::VectorXd mode = newton_refine(target, find_mode(target));
    const Eigen::MatrixXd factor = laplace_factor(target, mode);

    std::mt19937_64 rng(options.seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const Index warmup = options.warmup > 0 ? options.warmup : std::max<Index>(500, 20 * dim);
    const Index thin = options.thin > 0 ? options.thin : std::max<Index>(1, dim / 3);

    Eigen::VectorXd theta = mode;
    double lp = target.log_density(theta);
    double log_scale = std::log(2.38 / std::sqrt(static_cast<double>(dim)));
    Eigen::VectorXd z(dim);

    auto step = [&]() {
        for (Index j = 0; j < dim; ++j) z(j) = normal(rng);
        const Eigen::VectorXd proposal = theta + std::exp(log_scale) * (factor * z);
        const double lp_new = target.log_density(proposal);
        const double log_u = std::log(unif(rng));
        if (std::isfinite(lp_new) && log_u < lp_new - lp) {
            theta = proposal;
            lp = lp_new;
            return true;
        }
        return false;
    };

    // Robbins-Monro scale adaptation towards the optimal RWM acceptance rate.
    for (Index t = 0; t < warmup; ++t) {
        const double accepted = step() ? 1.0 : 0.0;
        log_scale += (accepted - 0.234) / std::pow(static_cast<double>(t + 1), 0.6);
    }

    PosteriorDraws draws;
    draws.model = model;
    draws.columns = PosteriorDraws::canonical_columns(data, model);
    draws.n_coef = data.d();
    draws.n_group = data.n_groups();
    draws.values.resize(options.draws, dim);
    Index accepted = 0;
    for (Index s = 0; s < options.draws; ++s) {
        for (Index t = 0; t < thin; ++t) accepted += step() ? 1 : 0;
        draws.values.row(s) = target.to_draw(theta);
    }
    draws.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(options.draws * thin);
    if (draws.acceptance_rate < 0.05 || draws.acceptance_rate > 0.95) {
        std::ostringstream msg;
        msg << "desk sampler acceptance rate " << draws.acceptance_rate << " outside [0.05, 0.95]";
        draws.warnings.push_back(msg.str());
    }
    draws.validate();
    return draws;
}

} // namespace lppi
