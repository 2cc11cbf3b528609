#include <json.hpp>

#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test
{
protected:
    void SetUp() override
    {
        dir_ = fs::temp_directory_path() / ("lppi_cli_" + std::to_string(::getpid()) + "_"
                                            + ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(const std::string& args) const
    {
        const std::string cmd = "cd '" + dir_.string() + "' && LPPI_THREADS=1 '" LPPI_CLI_PATH "' " + args
                                + " >stdout.txt 2>stderr.txt";
        const int status = std::system(cmd.c_str());
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    std::string read(const std::string& rel) const
    {
        std::ifstream in(dir_ / rel, std::ios::binary);
        std::stringstream ss;
        ss << in.rdbuf();
        return ss.str();
    }

    std::vector<std::vector<std::string>> csv(const std::string& rel) const
    {
        std::vector<std::vector<std::string>> rows;
        std::istringstream in(read(rel));
        std::string line;
        while (std::getline(in, line)) {
            std::vector<std::string> cells;
            std::stringstream ls(line);
            std::string cell;
            while (std::getline(ls, cell, ',')) cells.push_back(cell);
            rows.push_back(cells);
        }
        return rows;
    }

    bool exists(const std::string& rel) const { return fs::exists(dir_ / rel); }

    void simulate(const std::string& family, int n, int d, const std::string& extra = "")
    {
        ASSERT_EQ(run("simulate --family " + family + " --n " + std::to_string(n) + " --d " + std::to_string(d)
                      + " --seed 2 --out sim " + extra),
                  0)
            << read("stderr.txt");
    }

    fs::path dir_;
};

std::size_t column(const std::vector<std::string>& header, const std::string& name)
{
    for (std::size_t k = 0; k < header.size(); ++k)
        if (header[k] == name) return k;
    ADD_FAILURE() << "missing column " << name;
    return 0;
}

} // namespace

TEST_F(Cli, SimulateWritesFiles)
{
    simulate("ordinal", 100, 50, "--rho 0.3");
    for (const char* f : {"sim/data.csv", "sim/truth.json", "sim/schema.json", "sim/manifest.json"})
        EXPECT_TRUE(exists(f)) << f;
    const auto data = csv("sim/data.csv");
    EXPECT_EQ(data.size(), 101u);
    const auto truth = json::parse(read("sim/truth.json"));
    EXPECT_EQ(truth["beta"].size(), 50u);
    EXPECT_EQ(truth["z"].size(), 50u);
    const auto manifest = json::parse(read("sim/manifest.json"));
    EXPECT_EQ(manifest["subcommand"], "simulate");
}

TEST_F(Cli, SimulateIsReproducible)
{
    simulate("bernoulli", 50, 6);
    const auto first = read("sim/data.csv");
    const auto truth = read("sim/truth.json");
    simulate("bernoulli", 50, 6);
    EXPECT_EQ(read("sim/data.csv"), first);
    EXPECT_EQ(read("sim/truth.json"), truth);
}

TEST_F(Cli, UsageErrors)
{
    EXPECT_EQ(run("simulate --n 10 --d 3 --out sim"), 2);
    EXPECT_EQ(run("simulate --family nonsense --out sim"), 2);
    EXPECT_EQ(run("simulate --family gaussian --rho 1 --out sim"), 2);
    EXPECT_EQ(run("frobnicate"), 2);
    simulate("gaussian", 30, 3);
    // neither draws nor the desk fitter
    EXPECT_EQ(run("select --data sim/data.csv --schema sim/schema.json --out sel"), 2);
    EXPECT_EQ(run("select --data sim/data.csv --schema sim/schema.json --fit-desk --max-size 9 --out sel"), 2);
    EXPECT_EQ(run("select --data sim/data.csv --schema sim/schema.json --fit-desk --mode sideways --out sel"), 2);
}

TEST_F(Cli, OrdinalResponseModeIsAUsageError)
{
    simulate("ordinal", 40, 4);
    EXPECT_EQ(run("select --data sim/data.csv --schema sim/schema.json --fit-desk --desk-draws 50 --mode response "
                  "--out sel"),
              2);
    EXPECT_NE(read("stderr.txt").find("latent"), std::string::npos);
}

TEST_F(Cli, InputErrorsExitFour)
{
    simulate("gaussian", 30, 3);
    std::ofstream(dir_ / "broken.csv") << "x1,x2,x3,y\n1,2,abc,4\n";
    EXPECT_EQ(run("select --data broken.csv --schema sim/schema.json --fit-desk --out sel"), 4);
    EXPECT_NE(read("stderr.txt").find("abc"), std::string::npos);
}

TEST_F(Cli, OverflowingDrawsExitThree)
{
    simulate("gaussian", 30, 3);
    ASSERT_EQ(run("fit --data sim/data.csv --schema sim/schema.json --desk-draws 20 --out fit"), 0);
    auto rows = csv("fit/draws.csv");
    std::ofstream out(dir_ / "bad.csv");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (r > 0) rows[r][1] = "1e308";
        for (std::size_t k = 0; k < rows[r].size(); ++k) out << (k ? "," : "") << rows[r][k];
        out << '\n';
    }
    out.close();
    EXPECT_EQ(run("select --data sim/data.csv --schema sim/schema.json --draws bad.csv --out sel"), 3);
}

TEST_F(Cli, SelectMaxSizeRecordCount)
{
    simulate("bernoulli", 60, 12);
    ASSERT_EQ(run("select --data sim/data.csv --schema sim/schema.json --fit-desk --desk-draws 100 --max-size 10 "
                  "--out sel"),
              0)
        << read("stderr.txt");
    const auto path = json::parse(read("sel/path.json"));
    EXPECT_EQ(path["sizes"].size(), 11u);
    EXPECT_EQ(path["order"].size(), 10u);
    const auto metrics = csv("sel/metrics.csv");
    ASSERT_EQ(metrics.size(), 12u);
    EXPECT_EQ(metrics[0], (std::vector<std::string>{"size", "kl", "elpd", "elpd_se"}));
    const auto manifest = json::parse(read("sel/manifest.json"));
    EXPECT_TRUE(manifest["results"].contains("suggested_size"));
}

TEST_F(Cli, GaussianModesAgreeOnOrder)
{
    simulate("gaussian", 60, 6);
    ASSERT_EQ(run("fit --data sim/data.csv --schema sim/schema.json --desk-draws 100 --out fit"), 0);
    const std::string common = "select --data sim/data.csv --schema sim/schema.json --draws fit/draws.csv ";
    ASSERT_EQ(run(common + "--mode latent --out lat"), 0) << read("stderr.txt");
    ASSERT_EQ(run(common + "--mode response --out resp"), 0) << read("stderr.txt");
    EXPECT_EQ(json::parse(read("lat/path.json"))["order"], json::parse(read("resp/path.json"))["order"]);
}

TEST_F(Cli, DiagnoseFullGaussianEndsAtZero)
{
    simulate("gaussian", 50, 5);
    ASSERT_EQ(run("select --data sim/data.csv --schema sim/schema.json --fit-desk --desk-draws 100 --out sel"), 0);
    ASSERT_EQ(run("diagnose --data sim/data.csv --schema sim/schema.json --draws sel/draws.csv --path sel/path.json "
                  "--out dia"),
              0)
        << read("stderr.txt");
    for (const char* f : {"dia/residuals.csv", "dia/histogram.csv", "dia/kl_curve.csv", "dia/residuals_raw.csv"})
        EXPECT_TRUE(exists(f)) << f;
    const auto rows = csv("dia/residuals.csv");
    ASSERT_EQ(rows.size(), 7u);
    const auto sd = column(rows[0], "sd");
    EXPECT_LE(std::stod(rows.back()[sd]), 1e-8);
    const auto kl = csv("dia/kl_curve.csv");
    EXPECT_LE(std::stod(kl.back().back()), 1e-8);
    const auto hist = csv("dia/histogram.csv");
    EXPECT_EQ(hist[0], (std::vector<std::string>{"size", "edge_low", "edge_high", "count"}));
    EXPECT_EQ(hist.size(), 1u + 6u * 30u);
}

TEST_F(Cli, EvaluateOnHeldOutSplit)
{
    simulate("bernoulli", 60, 5, "--n-test 40");
    ASSERT_EQ(run("select --data sim/data.csv --schema sim/schema.json --fit-desk --desk-draws 100 --out sel"), 0);
    ASSERT_EQ(run("evaluate --data sim/data.csv --schema sim/schema.json --draws sel/draws.csv --path sel/path.json "
                  "--test sim/test.csv --truth sim/truth.json --out ev"),
              0)
        << read("stderr.txt");
    const auto rows = csv("ev/metrics.csv");
    ASSERT_EQ(rows.size(), 7u);
    const auto elpd = column(rows[0], "elpd");
    for (std::size_t r = 1; r < rows.size(); ++r) EXPECT_FALSE(rows[r][elpd].empty());
    const auto metrics = json::parse(read("ev/metrics.json"));
    EXPECT_TRUE(metrics.dump().find("auc") != std::string::npos);
}

TEST_F(Cli, BootstrapSingleReplicate)
{
    simulate("gaussian", 50, 4);
    ASSERT_EQ(run("bootstrap --data sim/data.csv --schema sim/schema.json --b 1 --desk-draws 60 --out bs"), 0)
        << read("stderr.txt");
    const auto rows = csv("bs/inclusion.csv");
    ASSERT_EQ(rows.size(), 5u);
    EXPECT_EQ(rows[0], (std::vector<std::string>{"variable", "frequency"}));
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const double f = std::stod(rows[r][1]);
        EXPECT_TRUE(f == 0.0 || f == 1.0) << rows[r][1];
    }
}

TEST_F(Cli, SelectIsByteReproducible)
{
    simulate("poisson", 50, 5);
    const std::string cmd = "select --data sim/data.csv --schema sim/schema.json --fit-desk --desk-draws 80 "
                            "--mode response --nclusters-search 2 --seed 5 --out ";
    ASSERT_EQ(run(cmd + "a"), 0) << read("stderr.txt");
    ASSERT_EQ(run(cmd + "b"), 0) << read("stderr.txt");
    for (const char* f : {"path.json", "metrics.csv", "metrics.json", "draws.csv"})
        EXPECT_EQ(read(std::string("a/") + f), read(std::string("b/") + f)) << f;
    // manifests agree once wall times are removed
    auto ma = json::parse(read("a/manifest.json")), mb = json::parse(read("b/manifest.json"));
    ma.erase("timings");
    mb.erase("timings");
    EXPECT_EQ(ma, mb);
}
