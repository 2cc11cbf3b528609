#pragma once

#include <lppi/dataset.hpp>
#include <lppi/family.hpp>

#include <Eigen/Dense>

#include <span>
#include <vector>

namespace lppi {

struct ElpdStats
{
    double total = 0.0;
    Eigen::VectorXd pointwise;   // per observation
    double se = 0.0;             // sqrt(N) * sample SD of pointwise values
};

/// Expected log predictive density of a (weighted) mixture of draws:
/// per observation log sum_s w_s p(y_i | eta_si, aux_s), via log-sum-exp.
/// `eta` is draws x N; empty `weights` means uniform.
ElpdStats elpd(const ObservationModel& model, const Eigen::MatrixXd& eta, const std::vector<AuxParams>& aux,
               std::span<const Outcome> y, const Eigen::VectorXd& weights = {});

struct ElpdDifference
{
    double diff = 0.0;   // candidate - reference
    double se = 0.0;     // sqrt(N) * sample SD of pointwise differences
};

ElpdDifference elpd_difference(const ElpdStats& candidate, const ElpdStats& reference);

/// Area under the ROC curve scoring variables by their position in
/// `order` (earlier is better). Variables missing from `order` share the
/// worst rank; ties count one half.
double selection_auc(std::span<const Index> order, const std::vector<bool>& truth);

} // namespace lppi
