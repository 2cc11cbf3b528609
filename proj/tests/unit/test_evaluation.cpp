#include <lppi/bootstrap.hpp>
#include <lppi/error.hpp>
#include <lppi/evaluation.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>

using namespace lppi;

namespace {

std::vector<AuxParams> sigmas(std::initializer_list<double> values)
{
    std::vector<AuxParams> aux;
    for (double s : values) aux.push_back(AuxParams{s, {}, 1.0});
    return aux;
}

// Pairwise definition: a true variable ranked strictly earlier scores 1, a tie 1/2.
double auc_oracle(const std::vector<Index>& order, const std::vector<bool>& truth)
{
    const auto D = static_cast<Index>(truth.size());
    std::vector<Index> rank(static_cast<std::size_t>(D), static_cast<Index>(order.size()));
    for (std::size_t k = 0; k < order.size(); ++k) rank[static_cast<std::size_t>(order[k])] = static_cast<Index>(k);
    double score = 0.0, pairs = 0.0;
    for (Index a = 0; a < D; ++a) {
        for (Index b = 0; b < D; ++b) {
            if (!truth[static_cast<std::size_t>(a)] || truth[static_cast<std::size_t>(b)]) continue;
            pairs += 1.0;
            const auto ra = rank[static_cast<std::size_t>(a)], rb = rank[static_cast<std::size_t>(b)];
            score += ra < rb ? 1.0 : (ra == rb ? 0.5 : 0.0);
        }
    }
    return score / pairs;
}

Dataset gaussian_data(Index n, const Eigen::VectorXd& beta, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> normal;
    Dataset data;
    const Index d = beta.size();
    data.X.resize(n, d);
    for (Index j = 0; j < d; ++j) data.names.push_back("x" + std::to_string(j + 1));
    for (Index i = 0; i < n; ++i) {
        for (Index j = 0; j < d; ++j) data.X(i, j) = normal(rng);
        data.y.push_back(Outcome{data.X.row(i).dot(beta) + normal(rng)});
    }
    return data;
}

// Flat-prior Gaussian posterior with sigma fixed at its estimate: cheap and exact enough for a provider.
DrawsProvider gaussian_ls_provider(Index S)
{
    return [S](const Dataset& data, std::uint64_t seed) {
        const Index n = data.n(), d = data.d();
        Eigen::MatrixXd A(n, d + 1);
        A.col(0).setOnes();
        A.rightCols(d) = data.X;
        Eigen::VectorXd y(n);
        for (Index i = 0; i < n; ++i) y(i) = data.y[static_cast<std::size_t>(i)].value;
        const Eigen::MatrixXd AtA = A.transpose() * A;
        const Eigen::VectorXd bhat = AtA.ldlt().solve(A.transpose() * y);
        const double s2 = (y - A * bhat).squaredNorm() / static_cast<double>(n - d - 1);
        const Eigen::MatrixXd L = Eigen::LLT<Eigen::MatrixXd>(s2 * AtA.inverse()).matrixL();
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal;
        PosteriorDraws draws;
        draws.model = ObservationModel::with_default_link(Family::gaussian);
        draws.columns = PosteriorDraws::canonical_columns(data, draws.model);
        draws.n_coef = d;
        draws.values.resize(S, d + 2);
        for (Index s = 0; s < S; ++s) {
            Eigen::VectorXd z(d + 1);
            for (Index k = 0; k <= d; ++k) z(k) = normal(rng);
            draws.values.row(s).head(d + 1) = (bhat + L * z).transpose();
            draws.values(s, d + 1) = std::sqrt(s2);
        }
        return draws;
    };
}

} // namespace

TEST(Elpd, StandardNormalPoint)
{
    const auto model = ObservationModel::with_default_link(Family::gaussian);
    const std::vector<Outcome> y{Outcome{0.0}};
    const auto r = elpd(model, Eigen::MatrixXd::Zero(1, 1), sigmas({1.0}), y);
    EXPECT_NEAR(r.total, -0.918939, 1e-6);
    EXPECT_NEAR(r.total, -0.5 * std::log(2.0 * std::numbers::pi), 1e-15);
}

TEST(Elpd, DuplicatedDrawsChangeNothing)
{
    std::mt19937_64 rng(1);
    std::normal_distribution<double> normal;
    const auto model = ObservationModel::with_default_link(Family::gaussian);
    Eigen::MatrixXd eta(3, 10);
    for (Index s = 0; s < 3; ++s)
        for (Index i = 0; i < 10; ++i) eta(s, i) = normal(rng);
    std::vector<Outcome> y;
    for (int i = 0; i < 10; ++i) y.push_back(Outcome{normal(rng)});
    const auto aux = sigmas({0.8, 1.0, 1.3});
    const auto base = elpd(model, eta, aux, y);

    Eigen::MatrixXd twice(6, 10);
    twice << eta, eta;
    auto aux2 = aux;
    aux2.insert(aux2.end(), aux.begin(), aux.end());
    const auto dup = elpd(model, twice, aux2, y);
    EXPECT_NEAR(dup.total, base.total, 1e-12);
    EXPECT_LT((dup.pointwise - base.pointwise).cwiseAbs().maxCoeff(), 1e-13);
}

TEST(Elpd, MixtureOfCertainBernoulliDraws)
{
    const auto model = ObservationModel::with_default_link(Family::bernoulli);
    Eigen::MatrixXd eta(2, 1);
    eta << 40.0, -40.0;
    const std::vector<AuxParams> aux(2);
    const std::vector<Outcome> y{Outcome{1.0}};
    EXPECT_NEAR(elpd(model, eta, aux, y).total, std::log(0.5), 1e-12);
}

TEST(Elpd, WeightsAndSeAgainstDirectSum)
{
    std::mt19937_64 rng(2);
    std::normal_distribution<double> normal;
    const auto model = ObservationModel::with_default_link(Family::poisson);
    Eigen::MatrixXd eta(4, 25);
    for (Index s = 0; s < 4; ++s)
        for (Index i = 0; i < 25; ++i) eta(s, i) = 0.5 * normal(rng);
    std::vector<Outcome> y;
    for (int i = 0; i < 25; ++i) y.push_back(Outcome{double(i % 4)});
    Eigen::VectorXd w(4);
    w << 0.1, 0.2, 0.3, 0.4;
    const std::vector<AuxParams> aux(4);
    const auto r = elpd(model, eta, aux, y, w);
    Eigen::VectorXd direct(25);
    for (Index i = 0; i < 25; ++i) {
        double p = 0.0;
        for (Index s = 0; s < 4; ++s) {
            const double mu = std::exp(eta(s, i)), k = y[static_cast<std::size_t>(i)].value;
            p += w(s) * std::exp(k * std::log(mu) - mu - std::lgamma(k + 1.0));
        }
        direct(i) = std::log(p);
    }
    EXPECT_LT((r.pointwise - direct).cwiseAbs().maxCoeff(), 1e-12);
    const double mean = direct.mean();
    const double se = std::sqrt(25.0 * (direct.array() - mean).square().sum() / 24.0);
    EXPECT_NEAR(r.se, se, 1e-12);
}

TEST(Elpd, FarTailStaysFinite)
{
    // Every density underflows to zero in linear space.
    const auto model = ObservationModel::with_default_link(Family::gaussian);
    Eigen::MatrixXd eta(2, 1);
    eta << 45.0, 46.0;
    const std::vector<Outcome> y{Outcome{0.0}};
    const auto r = elpd(model, eta, sigmas({1.0, 1.0}), y);
    ASSERT_TRUE(std::isfinite(r.total));
    const double l1 = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * 45.0 * 45.0;
    const double l2 = -0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * 46.0 * 46.0;
    EXPECT_NEAR(r.total, l1 + std::log1p(std::exp(l2 - l1)) - std::log(2.0), 1e-10);
}

TEST(Elpd, ShapeErrors)
{
    const auto model = ObservationModel::with_default_link(Family::gaussian);
    const std::vector<Outcome> y{Outcome{0.0}, Outcome{1.0}};
    EXPECT_THROW(elpd(model, Eigen::MatrixXd::Zero(1, 3), sigmas({1.0}), y), ConfigError);
    EXPECT_THROW(elpd(model, Eigen::MatrixXd::Zero(2, 2), sigmas({1.0}), y), ConfigError);
}

TEST(ElpdDifference, AgainstPointwiseOracle)
{
    std::mt19937_64 rng(3);
    std::normal_distribution<double> normal;
    ElpdStats a, b;
    a.pointwise.resize(40);
    b.pointwise.resize(40);
    for (Index i = 0; i < 40; ++i) {
        a.pointwise(i) = normal(rng);
        b.pointwise(i) = normal(rng);
    }
    a.total = a.pointwise.sum();
    b.total = b.pointwise.sum();
    const auto d = elpd_difference(a, b);
    const Eigen::VectorXd diff = a.pointwise - b.pointwise;
    EXPECT_NEAR(d.diff, diff.sum(), 1e-12);
    EXPECT_NEAR(d.se, std::sqrt(40.0 * (diff.array() - diff.mean()).square().sum() / 39.0), 1e-12);
    EXPECT_EQ(elpd_difference(a, a).diff, 0.0);
    EXPECT_EQ(elpd_difference(a, a).se, 0.0);
}

TEST(SelectionAuc, PerfectAndReversed)
{
    const std::vector<bool> truth{true, true, false, false, false};
    EXPECT_EQ(selection_auc(std::vector<Index>{0, 1, 2, 3, 4}, truth), 1.0);
    EXPECT_EQ(selection_auc(std::vector<Index>{2, 3, 4, 0, 1}, truth), 0.0);
}

TEST(SelectionAuc, PartialOrdersMatchPairwiseOracle)
{
    std::mt19937_64 rng(4);
    for (int rep = 0; rep < 300; ++rep) {
        const Index D = 3 + static_cast<Index>(rng() % 10);
        std::vector<bool> truth(static_cast<std::size_t>(D));
        do {
            for (auto&& t : truth) t = (rng() & 1U) != 0;
        } while (std::count(truth.begin(), truth.end(), true) == 0 || std::count(truth.begin(), truth.end(), false) == 0);
        std::vector<Index> order(static_cast<std::size_t>(D));
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        order.resize(rng() % (static_cast<std::size_t>(D) + 1));
        EXPECT_NEAR(selection_auc(order, truth), auc_oracle(order, truth), 1e-15);
    }
}

TEST(SelectionAuc, RandomOrderAveragesOneHalf)
{
    std::mt19937_64 rng(5);
    std::vector<bool> truth(20, false);
    for (int j = 0; j < 6; ++j) truth[static_cast<std::size_t>(j)] = true;
    std::vector<Index> order(20);
    std::iota(order.begin(), order.end(), 0);
    double total = 0.0;
    for (int rep = 0; rep < 10000; ++rep) {
        std::shuffle(order.begin(), order.end(), rng);
        total += selection_auc(order, truth);
    }
    EXPECT_NEAR(total / 10000.0, 0.5, 0.02);
}

TEST(SelectionAuc, Errors)
{
    EXPECT_THROW(selection_auc(std::vector<Index>{0, 1}, std::vector<bool>{true, true}), DomainError);
    EXPECT_THROW(selection_auc(std::vector<Index>{0, 1}, std::vector<bool>{false, false}), DomainError);
    EXPECT_THROW(selection_auc(std::vector<Index>{5}, std::vector<bool>{true, false}), ConfigError);
}

TEST(Bootstrap, SingleReplicateGivesIndicators)
{
    Eigen::VectorXd beta(4);
    beta << 1.0, 0.0, 0.5, 0.0;
    const auto data = gaussian_data(120, beta, 6);
    BootstrapConfig config;
    config.replicates = 1;
    const auto r = bootstrap_inclusion(data, gaussian_ls_provider(100), config);
    ASSERT_EQ(r.successes, 1);
    for (Index j = 0; j < 4; ++j) EXPECT_TRUE(r.frequency(j) == 0.0 || r.frequency(j) == 1.0);
    EXPECT_EQ(r.frequency.sum(), static_cast<double>(r.replicates[0].selected.size()));
    EXPECT_THROW(
        [&] {
            config.replicates = 0;
            bootstrap_inclusion(data, gaussian_ls_provider(10), config);
        }(),
        ConfigError);
}

TEST(Bootstrap, NullEffectsStayInMinority)
{
    // In-sample ELPD with the one-SE rule: the size-0 gap and its SE both grow
    // like sqrt(N * KL), so null frequencies do not vanish as N grows. They stay
    // well below one.
    const auto data = gaussian_data(2000, Eigen::VectorXd::Zero(5), 7);
    BootstrapConfig config;
    config.replicates = 20;
    const auto r = bootstrap_inclusion(
        data, desk_provider(ObservationModel::with_default_link(Family::gaussian), DeskFitOptions{}), config);
    ASSERT_EQ(r.successes, 20);
    EXPECT_LT(r.frequency.maxCoeff(), 1.0);
    EXPECT_LT(r.frequency.mean(), 0.5);
    EXPECT_TRUE((r.frequency.array() >= 0.0).all());
}

TEST(Bootstrap, StrongEffectAlwaysSelected)
{
    Eigen::VectorXd beta(5);
    beta << 0.0, 0.0, 2.0, 0.0, 0.0;
    const auto data = gaussian_data(200, beta, 8);
    BootstrapConfig config;
    config.replicates = 10;
    const auto r = bootstrap_inclusion(data, gaussian_ls_provider(100), config);
    EXPECT_EQ(r.frequency(2), 1.0);
}

TEST(Bootstrap, DeterministicAndThreadIndependent)
{
    Eigen::VectorXd beta(4);
    beta << 0.6, 0.0, 0.3, 0.0;
    const auto data = gaussian_data(100, beta, 9);
    BootstrapConfig config;
    config.replicates = 6;
    const auto a = bootstrap_inclusion(data, gaussian_ls_provider(60), config);
    const auto b = bootstrap_inclusion(data, gaussian_ls_provider(60), config);
    config.threads = 3;
    const auto c = bootstrap_inclusion(data, gaussian_ls_provider(60), config);
    EXPECT_EQ(a.frequency, b.frequency);
    EXPECT_EQ(a.frequency, c.frequency);
    for (std::size_t k = 0; k < a.replicates.size(); ++k) EXPECT_EQ(a.replicates[k].selected, c.replicates[k].selected);
}
