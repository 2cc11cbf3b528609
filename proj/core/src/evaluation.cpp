#include <lppi/error.hpp>
#include <lppi/evaluation.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace lppi {
namespace {

double sample_sd(const Eigen::VectorXd& v)
{
    const auto n = static_cast<double>(v.size());
    if (v.size() < 2) return 0.0;
    const double mean = v.mean();
    return std::sqrt((v.array() - mean).square().sum() / (n - 1.0));
}

} // namespace

ElpdStats elpd(const ObservationModel& model, const Eigen::MatrixXd& eta, const std::vector<AuxParams>& aux,
               std::span<const Outcome> y, const Eigen::VectorXd& weights)
{
    const Index S = eta.rows();
    const Index N = eta.cols();
    if (S < 1) throw ConfigError("elpd: need at least one draw");
    if (static_cast<Index>(aux.size()) != S) throw ConfigError("elpd: auxiliary count differs from draws");
    if (static_cast<Index>(y.size()) != N) throw ConfigError("elpd: outcome count differs from predictions");
    Eigen::VectorXd log_w(S);
    if (weights.size() == 0) {
        log_w.setConstant(-std::log(static_cast<double>(S)));
    } else {
        if (weights.size() != S) throw ConfigError("elpd: weight count differs from draws");
        const double total = weights.sum();
        for (Index s = 0; s < S; ++s) log_w(s) = std::log(weights(s) / total);
    }
    for (const auto& a : aux) model.validate_aux(a);
    for (const auto& obs : y) model.check_support(obs);

    constexpr double neg_inf = -std::numeric_limits<double>::infinity();
    ElpdStats out;
    out.pointwise.resize(N);
    Eigen::VectorXd terms(S);
    for (Index i = 0; i < N; ++i) {
        const auto& obs = y[static_cast<std::size_t>(i)];
        double peak = neg_inf;
        for (Index s = 0; s < S; ++s) {
            const double e = eta(s, i);
            if (!std::isfinite(e)) {
                throw DomainError("elpd: non-finite latent prediction at observation " + std::to_string(i + 1));
            }
            const double ll = log_lik_unchecked(model, e, aux[static_cast<std::size_t>(s)], obs);
            if (std::isnan(ll)) {
                throw DomainError("elpd: non-finite log likelihood at observation " + std::to_string(i + 1));
            }
            terms(s) = ll + log_w(s);
            peak = std::max(peak, terms(s));
        }
        if (peak == neg_inf) {
            out.pointwise(i) = neg_inf;
            continue;
        }
        out.pointwise(i) = peak + std::log((terms.array() - peak).exp().sum());
    }
    out.total = out.pointwise.sum();
    out.se = std::sqrt(static_cast<double>(N)) * sample_sd(out.pointwise);
    return out;
}

ElpdDifference elpd_difference(const ElpdStats& candidate, const ElpdStats& reference)
{
    if (candidate.pointwise.size() != reference.pointwise.size()) {
        throw ConfigError("elpd_difference: observation counts differ");
    }
    const Eigen::VectorXd d = candidate.pointwise - reference.pointwise;
    return {d.sum(), std::sqrt(static_cast<double>(d.size())) * sample_sd(d)};
}

double selection_auc(std::span<const Index> order, const std::vector<bool>& truth)
{
    const auto D = static_cast<Index>(truth.size());
    std::vector<double> score(truth.size(), 0.0);
    for (std::size_t p = 0; p < order.size(); ++p) {
        const Index v = order[p];
        if (v < 0 || v >= D) throw ConfigError("selection_auc: variable index out of range");
        score[static_cast<std::size_t>(v)] = static_cast<double>(D - static_cast<Index>(p));
    }
    const auto positives = std::count(truth.begin(), truth.end(), true);
    const auto negatives = D - positives;
    if (positives == 0 || negatives == 0) throw DomainError("selection_auc: undefined for a one-class truth mask");
    double wins = 0.0;
    for (std::size_t a = 0; a < truth.size(); ++a) {
        if (!truth[a]) continue;
        for (std::size_t b = 0; b < truth.size(); ++b) {
            if (truth[b]) continue;
            if (score[a] > score[b]) {
                wins += 1.0;
            } else if (score[a] == score[b]) {
                wins += 0.5;
            }
        }
    }
    return wins / (static_cast<double>(positives) * static_cast<double>(negatives));
}

} // namespace lppi
