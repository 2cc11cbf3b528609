#pragma once

#include <lppi/dataset.hpp>
#include <lppi/error.hpp>
#include <lppi/family.hpp>
#include <lppi/latent.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace lppi {

/// Ridge added to penalised columns of every projection solve.
inline constexpr double default_ridge = 1e-8;

/// A group of posterior draws summarised by its centre.
struct DrawCluster
{
    std::vector<Index> members;   // draw indices, ascending
    double weight = 0.0;          // members / S
    Eigen::VectorXd eta;          // member mean of latent predictions
    Eigen::VectorXd mu;           // member mean of mean predictions
    double sigma = 1.0;           // root mean square of member latent dispersions
    AuxParams aux;                // member average (sigma by root mean square)
};

struct DrawClusters
{
    std::vector<DrawCluster> clusters;   // ordered by smallest member index

    Index size() const { return static_cast<Index>(clusters.size()); }
};

/// k-means (k-means++ seeding) on the rows of latent.eta. C = 1 and C = S
/// are resolved directly (global mean and identity clustering).
DrawClusters cluster_draws(const LatentReference& latent, Index n_clusters, std::uint64_t seed);

enum class ProjectionMode { latent, response };

std::string_view to_string(ProjectionMode mode);
ProjectionMode parse_mode(std::string_view name);

/// Columns: intercept, X[:, subset], one indicator per group level.
Eigen::MatrixXd design_matrix(const Dataset& data, std::span<const Index> subset);

/// Per-column ridge weights for `design_matrix`: zero for the intercept and
/// subset columns, `ridge` for group indicators.
Eigen::VectorXd design_penalty(Index subset_size, Index n_groups, double ridge = default_ridge);

/// Least-squares solver for a fixed design, reused across right-hand sides.
/// Unpenalised full-rank designs use column-pivoted QR; a rank-deficient
/// design (ignoring group columns) falls back to ridge on every
/// non-intercept column, which approaches the minimum-norm solution.
class LeastSquares
{
public:
    LeastSquares(const Eigen::Ref<const Eigen::MatrixXd>& design, const Eigen::VectorXd& penalty,
                 double ridge = default_ridge, Index n_structural = 0);

    Eigen::MatrixXd solve(const Eigen::Ref<const Eigen::MatrixXd>& rhs) const;
    bool rank_deficient() const { return rank_deficient_; }

private:
    Eigen::Index rows_;
    bool rank_deficient_ = false;
    bool penalised_ = false;
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr_;
    Eigen::HouseholderQR<Eigen::MatrixXd> augmented_;
};

struct LatentFit
{
    Eigen::VectorXd coefficients;
    Eigen::VectorXd fitted;   // design * coefficients
    double sigma = 0.0;       // projected latent dispersion
    double kl = 0.0;          // mean over observations
    bool rank_deficient = false;
};

/// Least-squares projection of a cluster's latent predictions.
/// sigma_perp^2 = sigma*^2 + RSS / N.
LatentFit project_latent_gaussian(const DrawCluster& cluster, const Eigen::Ref<const Eigen::MatrixXd>& design,
                                  const Eigen::VectorXd& penalty = {}, double ridge = default_ridge);

/// Mean over observations of gaussian_kl(eta*_i, sigma*, fitted_i, sigma_perp).
double latent_kl(const Eigen::VectorXd& reference, double sigma_ref, const Eigen::VectorXd& fitted,
                 double sigma_perp);

struct PirlsOptions
{
    double ridge = default_ridge;   // on non-intercept columns
    double tolerance = 1e-8;        // max absolute coefficient change
    int max_iterations = 100;
};

struct ExpFamilyFit
{
    Eigen::VectorXd coefficients;
    Eigen::VectorXd eta;          // design * coefficients
    double objective = 0.0;       // sum_i mu*_i xi_i - B(xi_i), unpenalised
    double saturated = 0.0;       // same sum at mu = mu*
    double gap = 0.0;             // saturated - objective
    int iterations = 0;
    bool stalled = false;         // stopped because no step improved the objective
};

class PirlsConvergenceError : public ConvergenceError
{
public:
    PirlsConvergenceError(const std::string& what, Eigen::VectorXd last)
        : ConvergenceError(what), last_iterate(std::move(last))
    {
    }

    Eigen::VectorXd last_iterate;
};

/// Sum over observations of mu*_i xi(g(eta_i)) - B(xi(g(eta_i))).
double expfam_objective(const ObservationModel& model, const Eigen::VectorXd& mu_star,
                        const Eigen::VectorXd& eta);

/// Exponential-family projection by penalised IRLS on the cluster's mean
/// predictions. Stops when the coefficient change falls below the
/// tolerance or when step halving finds no ascent (`stalled`); throws
/// PirlsConvergenceError after max_iterations.
ExpFamilyFit project_exp_family(const DrawCluster& cluster, const Eigen::Ref<const Eigen::MatrixXd>& design,
                                const ObservationModel& model, const PirlsOptions& options = {},
                                const Eigen::VectorXd* warm_start = nullptr);

/// r_i = mu*_i xi_i(mu_perp_i) - B(xi_i(mu_perp_i)).
Eigen::VectorXd expfam_residual_terms(const ObservationModel& model, const Eigen::VectorXd& mu_star,
                                      const Eigen::VectorXd& mu_perp);

/// Objective maximised by the projected dispersion, for the gaussian
/// family: sum_i r_i / phi^2 + E[H(y_i, phi)] with y_i ~ N(mu*_i, sigma*^2).
double dispersion_objective(const DrawCluster& cluster, const Eigen::VectorXd& mu_perp, double phi,
                            const ObservationModel& model);

/// Closed-form maximiser of `dispersion_objective`:
/// phi^2 = sigma*^2 + mean((mu* - mu_perp)^2).
double project_dispersion(const DrawCluster& cluster, const Eigen::VectorXd& mu_perp,
                          const ObservationModel& model);

struct ProjectionOptions
{
    double ridge = default_ridge;
    PirlsOptions pirls{};
    int threads = 1;
};

struct ProjectionResult
{
    ProjectionMode mode = ProjectionMode::latent;
    std::vector<Index> subset;
    Index n_groups = 0;
    std::vector<Eigen::VectorXd> coefficients;   // per cluster: intercept, subset, groups
    Eigen::VectorXd dispersion;                  // latent sigma_perp, gaussian phi_perp, NaN otherwise
    Eigen::VectorXd kl;                          // per cluster, mean over observations
    Eigen::VectorXd weights;                     // cluster weights
    double weighted_kl = 0.0;
    Eigen::MatrixXd fitted;                      // C x N projected latent predictions
    Eigen::MatrixXd residuals;                   // C x N cluster eta* minus fitted
    bool rank_deficient = false;
};

/// Projects every cluster onto the submodel spanned by `subset` (plus
/// intercept and any group indicators) and aggregates the weighted KL.
ProjectionResult project_submodel(const LatentReference& latent, const DrawClusters& clusters,
                                  const Dataset& data, std::span<const Index> subset, ProjectionMode mode,
                                  const ProjectionOptions& options = {});

/// Latent predictions of a projection on (possibly new) data.
Eigen::MatrixXd projected_latent(const ProjectionResult& projection, const Dataset& data);

} // namespace lppi
