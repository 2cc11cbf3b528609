#pragma once

#include <lppi/latent.hpp>
#include <lppi/projection.hpp>
#include <lppi/search.hpp>

#include <Eigen/Dense>

#include <utility>
#include <vector>

namespace lppi {

inline constexpr int histogram_bins = 30;

struct ResidualSummary
{
    double mean = 0.0;
    double sd = 0.0;                 // sample SD (weights act as frequencies)
    double skewness = 0.0;
    double excess_kurtosis = 0.0;
    Eigen::VectorXd edges;           // histogram_bins + 1 edges
    Eigen::VectorXi counts;          // histogram_bins counts
    Index n = 0;
    bool normality_suspect = false;  // |skewness| > 1 or |excess kurtosis| > 2
};

/// Moments and histogram of `values`. `weights` (same length, optional)
/// are relative frequencies scaled so they sum to the number of values.
ResidualSummary summarize_residuals(const Eigen::VectorXd& values, const Eigen::VectorXd& weights = {});

/// Summary of eta* - eta_perp pooled over clusters, each cluster weighted
/// by its weight.
ResidualSummary residual_check(const LatentReference& latent, const ProjectionResult& projection);

/// Pooled residuals with their per-value weights, cluster-major.
std::pair<Eigen::VectorXd, Eigen::VectorXd> pooled_residuals(const ProjectionResult& projection);

/// (size, weighted KL) along an evaluated path.
std::vector<std::pair<Index, double>> kl_curve(const PathEvaluation& evaluation);

} // namespace lppi
