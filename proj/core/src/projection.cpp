#include <lppi/parallel.hpp>
#include <lppi/projection.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>

namespace lppi {
namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

DrawCluster summarise(const LatentReference& latent, std::vector<Index> members)
{
    std::sort(members.begin(), members.end());
    DrawCluster c;
    const auto m = static_cast<double>(members.size());
    c.weight = m / static_cast<double>(latent.s());
    c.eta = Eigen::VectorXd::Zero(latent.n());
    c.mu = Eigen::VectorXd::Zero(latent.n());
    double sigma_sq = 0.0, aux_sigma_sq = 0.0, shape = 0.0;
    std::vector<double> thresholds(latent.aux.empty() ? 0 : latent.aux[0].thresholds.size(), 0.0);
    for (Index s : members) {
        c.eta += latent.eta.row(s).transpose();
        c.mu += latent.mu.row(s).transpose();
        sigma_sq += latent.sigma(s) * latent.sigma(s);
        const auto& a = latent.aux[static_cast<std::size_t>(s)];
        aux_sigma_sq += a.sigma * a.sigma;
        shape += a.shape;
        for (std::size_t k = 0; k < thresholds.size(); ++k) thresholds[k] += a.thresholds[k];
    }
    c.eta /= m;
    c.mu /= m;
    c.sigma = std::sqrt(sigma_sq / m);
    c.aux.sigma = std::sqrt(aux_sigma_sq / m);
    c.aux.shape = shape / m;
    for (auto& t : thresholds) t /= m;
    c.aux.thresholds = std::move(thresholds);
    c.members = std::move(members);
    return c;
}

// Lloyd iterations from k-means++ seeds; returns the assignment.
std::vector<Index> kmeans(const Eigen::MatrixXd& points, Index k, std::uint64_t seed)
{
    const Index S = points.rows();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    Eigen::MatrixXd centers(k, points.cols());
    Eigen::VectorXd best(S);
    centers.row(0) = points.row(static_cast<Index>(unif(rng) * static_cast<double>(S)) % S);
    for (Index s = 0; s < S; ++s) best(s) = (points.row(s) - centers.row(0)).squaredNorm();
    for (Index c = 1; c < k; ++c) {
        const double total = best.sum();
        Index pick = 0;
        if (total > 0.0) {
            double u = unif(rng) * total;
            pick = S - 1;
            for (Index s = 0; s < S; ++s) {
                u -= best(s);
                if (u < 0.0) {
                    pick = s;
                    break;
                }
            }
        } else {
            pick = c % S;
        }
        centers.row(c) = points.row(pick);
        for (Index s = 0; s < S; ++s) {
            best(s) = std::min(best(s), (points.row(s) - centers.row(c)).squaredNorm());
        }
    }

    std::vector<Index> assign(static_cast<std::size_t>(S), -1);
    for (int iter = 0; iter < 100; ++iter) {
        bool changed = false;
        for (Index s = 0; s < S; ++s) {
            Index arg = 0;
            double dist = std::numeric_limits<double>::infinity();
            for (Index c = 0; c < k; ++c) {
                const double d = (points.row(s) - centers.row(c)).squaredNorm();
                if (d < dist) {
                    dist = d;
                    arg = c;
                }
            }
            best(s) = dist;
            if (assign[static_cast<std::size_t>(s)] != arg) {
                assign[static_cast<std::size_t>(s)] = arg;
                changed = true;
            }
        }
        std::vector<Index> counts(static_cast<std::size_t>(k), 0);
        centers.setZero();
        for (Index s = 0; s < S; ++s) {
            centers.row(assign[static_cast<std::size_t>(s)]) += points.row(s);
            ++counts[static_cast<std::size_t>(assign[static_cast<std::size_t>(s)])];
        }
        for (Index c = 0; c < k; ++c) {
            if (counts[static_cast<std::size_t>(c)] > 0) {
                centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
                continue;
            }
            // Empty cluster: move it onto the point farthest from its centre.
            Index far = 0;
            best.maxCoeff(&far);
            centers.row(c) = points.row(far);
            best(far) = 0.0;
            assign[static_cast<std::size_t>(far)] = c;
            changed = true;
        }
        if (!changed) break;
    }
    return assign;
}

Index trailing_penalised(const Eigen::VectorXd& penalty)
{
    Index n = 0;
    for (Index j = penalty.size() - 1; j >= 0 && penalty(j) > 0.0; --j) ++n;
    return n;
}

} // namespace

DrawClusters cluster_draws(const LatentReference& latent, Index n_clusters, std::uint64_t seed)
{
    const Index S = latent.s();
    if (n_clusters < 1 || n_clusters > S) {
        throw ConfigError("cluster count " + std::to_string(n_clusters) + " must lie in [1, "
                          + std::to_string(S) + "]");
    }
    DrawClusters out;
    if (n_clusters == 1) {
        std::vector<Index> all(static_cast<std::size_t>(S));
        for (Index s = 0; s < S; ++s) all[static_cast<std::size_t>(s)] = s;
        out.clusters.push_back(summarise(latent, std::move(all)));
        return out;
    }
    if (n_clusters == S) {
        for (Index s = 0; s < S; ++s) out.clusters.push_back(summarise(latent, {s}));
        return out;
    }
    const auto assign = kmeans(latent.eta, n_clusters, seed);
    std::vector<std::vector<Index>> groups(static_cast<std::size_t>(n_clusters));
    for (Index s = 0; s < S; ++s) groups[static_cast<std::size_t>(assign[static_cast<std::size_t>(s)])].push_back(s);
    std::sort(groups.begin(), groups.end(), [](const auto& a, const auto& b) {
        if (a.empty() || b.empty()) return b.empty() && !a.empty();
        return a.front() < b.front();
    });
    for (auto& g : groups) {
        if (!g.empty()) out.clusters.push_back(summarise(latent, std::move(g)));
    }
    return out;
}

std::string_view to_string(ProjectionMode mode)
{
    return mode == ProjectionMode::latent ? "latent" : "response";
}

ProjectionMode parse_mode(std::string_view name)
{
    if (name == "latent") return ProjectionMode::latent;
    if (name == "response") return ProjectionMode::response;
    throw ConfigError("unknown projection mode '" + std::string(name) + "'");
}

Eigen::MatrixXd design_matrix(const Dataset& data, std::span<const Index> subset)
{
    const auto k = static_cast<Index>(subset.size());
    Eigen::MatrixXd design = Eigen::MatrixXd::Zero(data.n(), 1 + k + data.n_groups());
    design.col(0).setOnes();
    for (Index j = 0; j < k; ++j) {
        const Index v = subset[static_cast<std::size_t>(j)];
        if (v < 0 || v >= data.d()) throw ConfigError("variable index " + std::to_string(v) + " out of range");
        design.col(1 + j) = data.X.col(v);
    }
    for (Index i = 0; i < data.n() && data.has_groups(); ++i) {
        design(i, 1 + k + data.group[static_cast<std::size_t>(i)]) = 1.0;
    }
    return design;
}

Eigen::VectorXd design_penalty(Index subset_size, Index n_groups, double ridge)
{
    Eigen::VectorXd pen = Eigen::VectorXd::Zero(1 + subset_size + n_groups);
    pen.tail(n_groups).setConstant(ridge);
    return pen;
}

LeastSquares::LeastSquares(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::VectorXd& penalty,
                           double ridge, Index n_structural)
    : rows_(design.rows())
{
    const Index k = design.cols();
    Eigen::VectorXd pen = penalty.size() == k ? penalty : Eigen::VectorXd::Zero(k);
    qr_.compute(design.leftCols(k - n_structural));
    rank_deficient_ = qr_.rank() < k - n_structural;
    if (rank_deficient_) {
        for (Index j = 1; j < k; ++j) pen(j) = std::max(pen(j), ridge);
    }
    penalised_ = (pen.array() > 0.0).any();
    if (!penalised_) return;

    const Index extra = (pen.array() > 0.0).count();
    Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(rows_ + extra, k);
    augmented.topRows(rows_) = design;
    Index r = rows_;
    for (Index j = 0; j < k; ++j) {
        if (pen(j) > 0.0) augmented(r++, j) = std::sqrt(pen(j));
    }
    augmented_.compute(augmented);
}

Eigen::MatrixXd LeastSquares::solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const
{
    if (!penalised_) return qr_.solve(rhs);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(augmented_.rows(), rhs.cols());
    b.topRows(rows_) = rhs;
    return augmented_.solve(b);
}

double latent_kl(const Eigen::VectorXd& reference, double sigma_ref, const Eigen::VectorXd& fitted,
                 double sigma_perp)
{
    double acc = 0.0;
    for (Index i = 0; i < reference.size(); ++i) acc += gaussian_kl(reference(i), sigma_ref, fitted(i), sigma_perp);
    return acc / static_cast<double>(reference.size());
}

LatentFit project_latent_gaussian(const DrawCluster& cluster, const Eigen::Ref<const Eigen::MatrixXd>& design,
                                  const Eigen::VectorXd& penalty, double ridge)
{
    if (design.rows() != cluster.eta.size()) throw ConfigError("design rows differ from cluster length");
    const Eigen::VectorXd pen = penalty.size() == design.cols() ? penalty : Eigen::VectorXd::Zero(design.cols());
    LeastSquares ls(design, pen, ridge, trailing_penalised(pen));
    LatentFit fit;
    fit.coefficients = ls.solve(cluster.eta);
    fit.fitted = design * fit.coefficients;
    fit.rank_deficient = ls.rank_deficient();
    const double rss = (cluster.eta - fit.fitted).squaredNorm();
    fit.sigma = std::sqrt(cluster.sigma * cluster.sigma + rss / static_cast<double>(design.rows()));
    fit.kl = latent_kl(cluster.eta, cluster.sigma, fit.fitted, fit.sigma);
    return fit;
}

double expfam_objective(const ObservationModel& model, const Eigen::VectorXd& mu_star, const Eigen::VectorXd& eta)
{
    double acc = 0.0;
    for (Index i = 0; i < eta.size(); ++i) acc += expfam_objective_term(model, mu_star(i), eta(i));
    return acc;
}

namespace {

Eigen::VectorXd clamp_mean(const ObservationModel& model, const Eigen::VectorXd& mu)
{
    switch (model.family()) {
        case Family::bernoulli: return mu.cwiseMax(1e-12).cwiseMin(1.0 - 1e-12);
        case Family::poisson: return mu.cwiseMax(1e-12);
        default: return mu;
    }
}

} // namespace

ExpFamilyFit project_exp_family(const DrawCluster& cluster, const Eigen::Ref<const Eigen::MatrixXd>& design,
                                const ObservationModel& model, const PirlsOptions& options,
                                const Eigen::VectorXd* warm_start)
{
    if (!model.exponential_family()) {
        throw UnsupportedFamilyError("response-space projection needs an exponential family; '"
                                     + std::string(to_string(model.family())) + "' is not one");
    }
    const Index N = design.rows();
    const Index k = design.cols();
    if (cluster.mu.size() != N) throw ConfigError("design rows differ from cluster length");
    const auto& link = model.link();
    const Eigen::VectorXd mu_star = clamp_mean(model, cluster.mu);

    Eigen::VectorXd pen = Eigen::VectorXd::Constant(k, options.ridge);
    pen(0) = 0.0;
    auto penalised_objective = [&](const Eigen::VectorXd& beta, const Eigen::VectorXd& eta) {
        return expfam_objective(model, mu_star, eta) - 0.5 * (pen.array() * beta.array().square()).sum();
    };

    Eigen::VectorXd beta;
    if (warm_start && warm_start->size() == k) {
        beta = *warm_start;
    } else {
        Eigen::VectorXd eta0(N);
        for (Index i = 0; i < N; ++i) eta0(i) = link.inverse(mu_star(i));
        beta = LeastSquares(design, pen).solve(eta0);
    }
    Eigen::VectorXd eta = design * beta;
    double current = penalised_objective(beta, eta);

    auto finish = [&](const Eigen::VectorXd& b, const Eigen::VectorXd& e, int iterations, bool stalled) {
        ExpFamilyFit fit;
        fit.coefficients = b;
        fit.eta = e;
        fit.objective = expfam_objective(model, mu_star, e);
        fit.saturated = 0.0;
        for (Index i = 0; i < N; ++i) fit.saturated += expfam_saturated_term(model, mu_star(i));
        fit.gap = std::max(0.0, fit.saturated - fit.objective);
        fit.iterations = iterations;
        fit.stalled = stalled;
        return fit;
    };

    const Eigen::VectorXd sqrt_pen = pen.cwiseSqrt();
    Eigen::MatrixXd augmented = Eigen::MatrixXd::Zero(N + k - 1, k);
    for (Index j = 1; j < k; ++j) augmented(N + j - 1, j) = sqrt_pen(j);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(N + k - 1);

    int flat = 0;
    for (int iter = 1; iter <= options.max_iterations; ++iter) {
        for (Index i = 0; i < N; ++i) {
            const double mu = link.forward(eta(i));
            const double dmu = std::max(link.derivative(eta(i)), 1e-300);
            const double var = std::max(variance_function(model, std::clamp(mu, 1e-300, 1e300)), 1e-300);
            const double w = std::sqrt(dmu * dmu / var);
            augmented.row(i) = w * design.row(i);
            rhs(i) = w * (eta(i) + (mu_star(i) - mu) / dmu);
        }
        Eigen::VectorXd next = augmented.householderQr().solve(rhs);
        Eigen::VectorXd next_eta = design * next;
        double value = penalised_objective(next, next_eta);
        // Differences below this are rounding in the objective sum.
        const double noise = 1e-12 * (1.0 + std::abs(current));
        if (!(value >= current - noise)) {
            // Step halving keeps the iteration monotone.
            for (int halve = 0; halve < 30 && !(value >= current); ++halve) {
                next = 0.5 * (beta + next);
                next_eta = design * next;
                value = penalised_objective(next, next_eta);
            }
            if (!(value >= current)) return finish(beta, eta, iter, true);
        }
        // Coefficients still moving while the objective stays flat: a
        // direction the objective cannot resolve (mu* pinned near a boundary).
        flat = value - current <= noise ? flat + 1 : 0;
        const double change = (next - beta).cwiseAbs().maxCoeff();
        beta = std::move(next);
        eta = std::move(next_eta);
        current = value;
        if (change < options.tolerance) return finish(beta, eta, iter, false);
        if (flat >= 3) return finish(beta, eta, iter, true);
        if (!beta.allFinite()) break;
    }
    throw PirlsConvergenceError("PIRLS did not converge in " + std::to_string(options.max_iterations)
                                    + " iterations",
                                beta);
}

Eigen::VectorXd expfam_residual_terms(const ObservationModel& model, const Eigen::VectorXd& mu_star,
                                      const Eigen::VectorXd& mu_perp)
{
    Eigen::VectorXd r(mu_star.size());
    for (Index i = 0; i < r.size(); ++i) {
        const auto nat = natural_param_and_cumulant(model, mu_perp(i));
        r(i) = mu_star(i) * nat.xi - nat.cumulant;
    }
    return r;
}

double dispersion_objective(const DrawCluster& cluster, const Eigen::VectorXd& mu_perp, double phi,
                            const ObservationModel& model)
{
    if (!model.has_dispersion()) throw UnsupportedFamilyError("family has constant dispersion");
    const Eigen::VectorXd r = expfam_residual_terms(model, cluster.mu, mu_perp);
    const double a = phi * phi;
    double acc = 0.0;
    for (Index i = 0; i < r.size(); ++i) {
        // E[y^2] under N(mu*, sigma*^2).
        const double ey2 = cluster.mu(i) * cluster.mu(i) + cluster.sigma * cluster.sigma;
        acc += r(i) / a - ey2 / (2.0 * a) - 0.5 * std::log(2.0 * std::numbers::pi * a);
    }
    return acc;
}

double project_dispersion(const DrawCluster& cluster, const Eigen::VectorXd& mu_perp, const ObservationModel& model)
{
    if (!model.has_dispersion()) throw UnsupportedFamilyError("family has constant dispersion");
    const double msr = (cluster.mu - mu_perp).squaredNorm() / static_cast<double>(mu_perp.size());
    return std::sqrt(cluster.sigma * cluster.sigma + msr);
}

ProjectionResult project_submodel(const LatentReference& latent, const DrawClusters& clusters, const Dataset& data,
                                  std::span<const Index> subset, ProjectionMode mode, const ProjectionOptions& options)
{
    const auto& model = latent.model;
    if (mode == ProjectionMode::response && !model.exponential_family()) {
        throw UnsupportedFamilyError("response-space projection needs an exponential family; use latent mode for '"
                                     + std::string(to_string(model.family())) + "'");
    }
    if (latent.n() != data.n()) throw ConfigError("latent predictions and dataset differ in rows");

    const Index C = clusters.size();
    const Eigen::MatrixXd design = design_matrix(data, subset);
    const Eigen::VectorXd penalty = design_penalty(static_cast<Index>(subset.size()), data.n_groups(), options.ridge);

    ProjectionResult out;
    out.mode = mode;
    out.subset.assign(subset.begin(), subset.end());
    out.n_groups = data.n_groups();
    out.coefficients.resize(static_cast<std::size_t>(C));
    out.dispersion = Eigen::VectorXd::Constant(C, nan);
    out.kl.resize(C);
    out.weights.resize(C);
    out.fitted.resize(C, data.n());
    out.residuals.resize(C, data.n());
    for (Index c = 0; c < C; ++c) out.weights(c) = clusters.clusters[static_cast<std::size_t>(c)].weight;

    if (mode == ProjectionMode::latent) {
        // One factorisation serves every cluster centre.
        LeastSquares ls(design, penalty, options.ridge, data.n_groups());
        Eigen::MatrixXd rhs(data.n(), C);
        for (Index c = 0; c < C; ++c) rhs.col(c) = clusters.clusters[static_cast<std::size_t>(c)].eta;
        const Eigen::MatrixXd coef = ls.solve(rhs);
        out.rank_deficient = ls.rank_deficient();
        for (Index c = 0; c < C; ++c) {
            const auto& cl = clusters.clusters[static_cast<std::size_t>(c)];
            out.coefficients[static_cast<std::size_t>(c)] = coef.col(c);
            const Eigen::VectorXd fitted = design * coef.col(c);
            const double rss = (cl.eta - fitted).squaredNorm();
            const double sigma = std::sqrt(cl.sigma * cl.sigma + rss / static_cast<double>(data.n()));
            out.dispersion(c) = sigma;
            out.kl(c) = latent_kl(cl.eta, cl.sigma, fitted, sigma);
            out.fitted.row(c) = fitted.transpose();
        }
    } else {
        PirlsOptions pirls = options.pirls;
        pirls.ridge = options.ridge;
        parallel_for(static_cast<std::size_t>(C), options.threads, [&](std::size_t c) {
            const auto& cl = clusters.clusters[c];
            const ExpFamilyFit fit = project_exp_family(cl, design, model, pirls);
            out.coefficients[c] = fit.coefficients;
            out.fitted.row(static_cast<Index>(c)) = fit.eta.transpose();
            if (model.has_dispersion()) {
                const Eigen::VectorXd mu_perp = fit.eta.unaryExpr([&](double e) { return model.link().forward(e); });
                const double phi = project_dispersion(cl, mu_perp, model);
                out.dispersion(static_cast<Index>(c)) = phi;
                out.kl(static_cast<Index>(c)) = latent_kl(cl.mu, cl.sigma, mu_perp, phi);
            } else {
                // For unit-dispersion families the objective gap is the summed KL.
                out.kl(static_cast<Index>(c)) = fit.gap / static_cast<double>(data.n());
            }
        });
    }
    for (Index c = 0; c < C; ++c) {
        out.residuals.row(c) = clusters.clusters[static_cast<std::size_t>(c)].eta.transpose() - out.fitted.row(c);
    }
    // Ordered reduction.
    out.weighted_kl = 0.0;
    for (Index c = 0; c < C; ++c) out.weighted_kl += out.weights(c) * out.kl(c);
    return out;
}

Eigen::MatrixXd projected_latent(const ProjectionResult& projection, const Dataset& data)
{
    if (data.n_groups() != projection.n_groups) throw ConfigError("dataset group levels differ from projection");
    const Eigen::MatrixXd design = design_matrix(data, projection.subset);
    Eigen::MatrixXd out(static_cast<Index>(projection.coefficients.size()), data.n());
    for (std::size_t c = 0; c < projection.coefficients.size(); ++c) {
        out.row(static_cast<Index>(c)) = (design * projection.coefficients[c]).transpose();
    }
    return out;
}

} // namespace lppi
