#include <lppi/parallel.hpp>
#include <lppi/random.hpp>
#include <lppi/search.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace lppi {
namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

// Relative norm below which a column adds nothing to the current span.
constexpr double dependence_tol = 1e-10;

class IncrementalBasis
{
public:
    explicit IncrementalBasis(Index rows) : rows_(rows) {}

    Eigen::VectorXd orthogonalise(Eigen::VectorXd v) const
    {
        // Two passes of modified Gram-Schmidt.
        for (int pass = 0; pass < 2; ++pass) {
            for (const auto& q : basis_) v -= q * q.dot(v);
        }
        return v;
    }

    bool add(const Eigen::VectorXd& column)
    {
        Eigen::VectorXd u = orthogonalise(column);
        const double norm = u.norm();
        if (!(norm > dependence_tol * std::max(column.norm(), 1.0))) return false;
        basis_.push_back(u / norm);
        return true;
    }

    const Eigen::VectorXd& last() const { return basis_.back(); }
    Index rows() const { return rows_; }

private:
    Index rows_;
    std::vector<Eigen::VectorXd> basis_;
};

// Latent-mode greedy search over residualised candidates. Returns the
// chosen ordering.
std::vector<Index> latent_greedy(const DrawClusters& clusters, const Dataset& data, Index max_size)
{
    const Index N = data.n();
    const Index D = data.d();
    const Index C = clusters.size();

    IncrementalBasis basis(N);
    basis.add(Eigen::VectorXd::Ones(N));
    for (Index g = 0; g < data.n_groups(); ++g) {
        Eigen::VectorXd indicator = Eigen::VectorXd::Zero(N);
        for (Index i = 0; i < N; ++i) indicator(i) = data.group[static_cast<std::size_t>(i)] == g ? 1.0 : 0.0;
        basis.add(indicator);
    }

    Eigen::MatrixXd residual(N, C);
    Eigen::VectorXd weight(C), scale(C);
    for (Index c = 0; c < C; ++c) {
        const auto& cl = clusters.clusters[static_cast<std::size_t>(c)];
        residual.col(c) = basis.orthogonalise(cl.eta);
        weight(c) = cl.weight;
        scale(c) = static_cast<double>(N) * cl.sigma * cl.sigma;
    }
    Eigen::MatrixXd cand(N, D);
    Eigen::VectorXd original_norm(D);
    for (Index j = 0; j < D; ++j) {
        cand.col(j) = basis.orthogonalise(data.X.col(j));
        original_norm(j) = std::max(data.X.col(j).norm(), 1.0);
    }

    std::vector<bool> used(static_cast<std::size_t>(D), false);
    std::vector<Index> order;
    for (Index step = 0; step < max_size; ++step) {
        const Eigen::VectorXd rss = residual.colwise().squaredNorm().transpose();
        const Eigen::MatrixXd cross = cand.transpose() * residual;   // D x C
        Index pick = -1;
        double best = inf;
        for (Index j = 0; j < D; ++j) {
            if (used[static_cast<std::size_t>(j)]) continue;
            const double uu = cand.col(j).squaredNorm();
            const bool independent = std::sqrt(uu) > dependence_tol * original_norm(j);
            double kl = 0.0;
            for (Index c = 0; c < C; ++c) {
                const double drop = independent ? cross(j, c) * cross(j, c) / uu : 0.0;
                const double remaining = std::max(rss(c) - drop, 0.0);
                kl += weight(c) * 0.5 * std::log1p(remaining / scale(c));
            }
            if (kl < best) {
                best = kl;
                pick = j;
            }
        }
        if (pick < 0) throw DomainError("forward search: no candidate has a finite KL at step " + std::to_string(step + 1));
        used[static_cast<std::size_t>(pick)] = true;
        order.push_back(pick);
        if (basis.add(cand.col(pick))) {
            const Eigen::VectorXd& q = basis.last();
            residual -= q * (q.transpose() * residual);
            cand -= q * (q.transpose() * cand);
        }
    }
    return order;
}

} // namespace

Index resolve_max_size(Index requested, Index n_variables)
{
    if (requested < 0) return std::min<Index>(n_variables, 50);
    if (requested > n_variables) {
        throw ConfigError("max_size " + std::to_string(requested) + " exceeds the number of variables ("
                          + std::to_string(n_variables) + ")");
    }
    return requested;
}

DrawClusters path_clusters(const LatentReference& latent, Index n_clusters, std::uint64_t seed)
{
    return cluster_draws(latent, std::min(n_clusters, latent.s()), derive_seed(seed, Stream::clustering));
}

std::vector<double> candidate_kls(const LatentReference& latent, const DrawClusters& clusters, const Dataset& data,
                                  const std::vector<Index>& subset, const std::vector<Index>& candidates,
                                  ProjectionMode mode, const ProjectionOptions& options)
{
    std::vector<double> out(candidates.size());
    ProjectionOptions inner = options;
    inner.threads = 1;
    parallel_for(candidates.size(), options.threads, [&](std::size_t k) {
        std::vector<Index> trial = subset;
        trial.push_back(candidates[k]);
        out[k] = project_submodel(latent, clusters, data, trial, mode, inner).weighted_kl;
    });
    return out;
}

SolutionPath forward_search(const LatentReference& latent, const Dataset& data, const SearchConfig& config)
{
    const Index D = data.d();
    const Index max_size = resolve_max_size(config.max_size, D);
    if (config.mode == ProjectionMode::response && !latent.model.exponential_family()) {
        throw UnsupportedFamilyError("response-space projection needs an exponential family; use latent mode for '"
                                     + std::string(to_string(latent.model.family())) + "'");
    }

    SolutionPath path;
    path.config = config;
    path.config.max_size = max_size;
    path.names = data.names;
    const DrawClusters clusters = path_clusters(latent, config.clusters_search, config.seed);
    path.clusters_used = clusters.size();

    ProjectionOptions inner = config.projection;
    inner.threads = config.threads;

    auto record = [&](const std::vector<Index>& subset) {
        PathRecord r;
        r.size = static_cast<Index>(subset.size());
        r.subset = subset;
        r.projection = project_submodel(latent, clusters, data, subset, config.mode, inner);
        r.kl = r.projection.weighted_kl;
        path.records.push_back(std::move(r));
    };

    try {
        std::vector<Index> subset;
        if (config.mode == ProjectionMode::latent) {
            path.order = latent_greedy(clusters, data, max_size);
            record(subset);
            for (Index v : path.order) {
                subset.push_back(v);
                record(subset);
            }
            return path;
        }

        record(subset);
        std::vector<bool> used(static_cast<std::size_t>(D), false);
        for (Index step = 0; step < max_size; ++step) {
            std::vector<Index> candidates;
            for (Index j = 0; j < D; ++j) {
                if (!used[static_cast<std::size_t>(j)]) candidates.push_back(j);
            }
            const auto kls = candidate_kls(latent, clusters, data, subset, candidates, config.mode, inner);
            std::size_t pick = kls.size();
            for (std::size_t k = 0; k < kls.size(); ++k) {
                if (std::isfinite(kls[k]) && (pick == kls.size() || kls[k] < kls[pick])) pick = k;
            }
            if (pick == kls.size()) {
                throw DomainError("forward search: no candidate has a finite KL at step " + std::to_string(step + 1));
            }
            used[static_cast<std::size_t>(candidates[pick])] = true;
            subset.push_back(candidates[pick]);
            path.order.push_back(candidates[pick]);
            record(subset);
        }
    } catch (const Error& e) {
        path.failed = true;
        path.error = e.what();
        // Keep order and records consistent on a partial path.
        path.order.resize(path.records.empty() ? 0 : path.records.size() - 1);
    }
    return path;
}

PathEvaluation evaluate_path(const SolutionPath& path, const LatentReference& latent, const Dataset& data,
                             const EvalConfig& config, const HeldOut* test)
{
    const auto& model = latent.model;
    if (data.names != path.names) throw ConfigError("evaluation: dataset variables differ from the path");
    if (test) {
        if (test->data.names != data.names) throw ConfigError("evaluation: test variables differ from training data");
        if (test->data.n_groups() != data.n_groups()) throw ConfigError("evaluation: test group levels differ");
        if (test->latent.n() != test->data.n()) throw ConfigError("evaluation: test predictions differ in rows");
    }
    const DrawClusters clusters = path_clusters(latent, config.clusters_eval, config.seed);

    PathEvaluation out;
    out.clusters_used = clusters.size();
    out.held_out = test != nullptr;
    const Dataset& target = test ? test->data : data;
    const LatentReference& target_latent = test ? test->latent : latent;
    out.reference = elpd(model, target_latent.eta, target_latent.aux, target.y);

    std::vector<AuxParams> cluster_aux;
    for (const auto& cl : clusters.clusters) cluster_aux.push_back(cl.aux);

    ProjectionOptions inner = config.projection;
    inner.threads = 1;
    out.sizes.resize(path.records.size());
    parallel_for(path.records.size(), config.threads, [&](std::size_t k) {
        const auto& rec = path.records[k];
        SizeMetrics m;
        m.size = rec.size;
        m.subset = rec.subset;
        m.projection = project_submodel(latent, clusters, data, rec.subset, path.config.mode, inner);
        m.kl = m.projection.weighted_kl;
        std::vector<AuxParams> aux = cluster_aux;
        if (model.has_dispersion()) {
            for (std::size_t c = 0; c < aux.size(); ++c) aux[c].sigma = m.projection.dispersion(static_cast<Index>(c));
        }
        const Eigen::MatrixXd eta = test ? projected_latent(m.projection, test->data) : m.projection.fitted;
        m.elpd = elpd(model, eta, aux, target.y, m.projection.weights);
        const auto diff = elpd_difference(m.elpd, out.reference);
        m.elpd_diff = diff.diff;
        m.elpd_diff_se = diff.se;
        out.sizes[k] = std::move(m);
    });
    return out;
}

std::size_t suggest_size(const std::vector<ElpdStats>& sizes, const ElpdStats& reference)
{
    if (sizes.empty()) throw ConfigError("suggest_size: no sizes");
    for (std::size_t k = 0; k < sizes.size(); ++k) {
        const auto diff = elpd_difference(sizes[k], reference);
        if (diff.diff >= -diff.se) return k;
    }
    return sizes.size() - 1;
}

Index suggest_size(const PathEvaluation& evaluation)
{
    std::vector<ElpdStats> stats;
    stats.reserve(evaluation.sizes.size());
    for (const auto& m : evaluation.sizes) stats.push_back(m.elpd);
    return evaluation.sizes[suggest_size(stats, evaluation.reference)].size;
}

} // namespace lppi
