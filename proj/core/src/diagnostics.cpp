#include <lppi/diagnostics.hpp>
#include <lppi/error.hpp>

#include <algorithm>
#include <cmath>

namespace lppi {
namespace {

// Relative spread below which residuals count as constant.
constexpr double degenerate_tol = 1e-12;

} // namespace

ResidualSummary summarize_residuals(const Eigen::VectorXd& values, const Eigen::VectorXd& weights)
{
    const Index n = values.size();
    if (n == 0) throw ConfigError("residual summary of an empty sample");
    if (weights.size() != 0 && weights.size() != n) throw ConfigError("residual weights differ in length");
    Eigen::VectorXd w = weights.size() == 0 ? Eigen::VectorXd::Ones(n) : weights;
    w *= static_cast<double>(n) / w.sum();

    ResidualSummary out;
    out.n = n;
    out.mean = w.dot(values) / static_cast<double>(n);
    const Eigen::ArrayXd dev = values.array() - out.mean;
    const double m2 = (w.array() * dev.square()).sum() / static_cast<double>(n);
    const double m3 = (w.array() * dev.cube()).sum() / static_cast<double>(n);
    const double m4 = (w.array() * dev.square().square()).sum() / static_cast<double>(n);
    out.sd = n > 1 ? std::sqrt(m2 * static_cast<double>(n) / static_cast<double>(n - 1)) : 0.0;

    const double lo = values.minCoeff();
    const double hi = values.maxCoeff();
    const bool degenerate = hi - lo <= degenerate_tol * std::max({1.0, std::abs(lo), std::abs(hi)});
    if (!degenerate && m2 > 0.0) {
        out.skewness = m3 / std::pow(m2, 1.5);
        out.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    }
    out.normality_suspect = std::abs(out.skewness) > 1.0 || std::abs(out.excess_kurtosis) > 2.0;

    const double a = degenerate ? out.mean - 0.5 : lo;
    const double b = degenerate ? out.mean + 0.5 : hi;
    out.edges = Eigen::VectorXd::LinSpaced(histogram_bins + 1, a, b);
    out.counts = Eigen::VectorXi::Zero(histogram_bins);
    const double width = (b - a) / histogram_bins;
    for (Index i = 0; i < n; ++i) {
        auto bin = static_cast<int>(std::floor((values(i) - a) / width));
        out.counts(std::clamp(bin, 0, histogram_bins - 1)) += 1;
    }
    return out;
}

std::pair<Eigen::VectorXd, Eigen::VectorXd> pooled_residuals(const ProjectionResult& projection)
{
    const Index C = projection.residuals.rows();
    const Index N = projection.residuals.cols();
    Eigen::VectorXd values(C * N), weights(C * N);
    for (Index c = 0; c < C; ++c) {
        values.segment(c * N, N) = projection.residuals.row(c).transpose();
        weights.segment(c * N, N).setConstant(projection.weights(c));
    }
    return {values, weights};
}

ResidualSummary residual_check(const LatentReference& latent, const ProjectionResult& projection)
{
    if (projection.residuals.cols() != latent.n()) {
        throw AlignmentError("residual check: projection and reference differ in observations");
    }
    const auto [values, weights] = pooled_residuals(projection);
    return summarize_residuals(values, weights);
}

std::vector<std::pair<Index, double>> kl_curve(const PathEvaluation& evaluation)
{
    std::vector<std::pair<Index, double>> out;
    out.reserve(evaluation.sizes.size());
    for (const auto& m : evaluation.sizes) out.emplace_back(m.size, m.kl);
    return out;
}

} // namespace lppi
