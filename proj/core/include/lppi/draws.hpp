#pragma once

#include <lppi/dataset.hpp>
#include <lppi/family.hpp>

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace lppi {

/// Reference-model posterior draws, one row per draw.
///
/// Columns are kept in canonical order:
///   b_Intercept (if the family has one), b_<var> for every predictor,
///   r_<level> for every group level, then the family auxiliaries
///   (sigma | tau_1..tau_{K-1} | alpha).
struct PosteriorDraws
{
    ObservationModel model;
    Eigen::MatrixXd values;              // S x P
    std::vector<std::string> columns;    // P names
    Index n_coef = 0;
    Index n_group = 0;

    std::vector<std::string> warnings;   // e.g. sampler diagnostics
    double acceptance_rate = -1.0;       // < 0 when not produced by a sampler

    Index s() const { return values.rows(); }
    Index p() const { return values.cols(); }
    bool has_intercept() const { return model.has_intercept(); }

    Index coef_offset() const { return has_intercept() ? 1 : 0; }
    Index group_offset() const { return coef_offset() + n_coef; }
    Index aux_offset() const { return group_offset() + n_group; }

    double intercept(Index draw) const { return has_intercept() ? values(draw, 0) : 0.0; }
    auto coefficients() const { return values.middleCols(coef_offset(), n_coef); }
    auto group_effects() const { return values.middleCols(group_offset(), n_group); }
    AuxParams aux(Index draw) const;

    /// Canonical column names for a dataset/model pair.
    static std::vector<std::string> canonical_columns(const Dataset& data, const ObservationModel& model);

    /// Row-wise constraint check; names the failing draw (1-based).
    void validate() const;
};

/// Reads a draws CSV and aligns its columns to `data`. Extra columns are ignored.
PosteriorDraws load_draws(const std::string& path, const Dataset& data, const ObservationModel& model);
PosteriorDraws parse_draws(const std::string& text, const Dataset& data, const ObservationModel& model);

std::string draws_to_csv(const PosteriorDraws& draws);
void save_draws(const PosteriorDraws& draws, const std::string& path);

struct DeskFitOptions
{
    double prior_scale = 2.5;
    Index draws = 400;
    std::uint64_t seed = 1;
    /// Iterations between retained draws; 0 picks one from the parameter count.
    Index thin = 0;
    /// Warm-up iterations; 0 picks one from the parameter count.
    Index warmup = 0;
};

/// Desk-scale reference fit: adaptive random-walk Metropolis under
/// independent Normal(0, prior_scale) priors on the unconstrained
/// parameters, started from the posterior mode with a Laplace proposal.
/// Deterministic given the seed. A retained-draw acceptance rate outside
/// [0.05, 0.95] adds a warning to the result.
PosteriorDraws fit_reference_desk(const Dataset& data, const ObservationModel& model,
                                  const DeskFitOptions& options);

} // namespace lppi

namespace lppi::detail {

/// Log posterior of the desk reference model over unconstrained
/// parameters: [intercept] coefficients, group effects, then auxiliaries
/// on the log scale (ordinal: first threshold, then log increments).
class DeskTarget
{
public:
    DeskTarget(const Dataset& data, const ObservationModel& model, double prior_scale);

    Index dim() const { return dim_; }
    Eigen::VectorXd initial_point() const;
    /// Maps unconstrained parameters onto a row in canonical draw columns.
    Eigen::RowVectorXd to_draw(const Eigen::VectorXd& theta) const;
    double log_density(const Eigen::VectorXd& theta, Eigen::VectorXd* grad = nullptr) const;

private:
    AuxParams aux_from(const Eigen::VectorXd& theta) const;

    const Dataset& data_;
    ObservationModel model_;
    double prior_scale_;
    Index coef_offset_, group_offset_, aux_offset_, n_aux_, dim_;
};

} // namespace lppi::detail
