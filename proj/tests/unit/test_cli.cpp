#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "commands.hpp"

namespace fs = std::filesystem;
using liebridge::cli::run;
using nlohmann::json;

namespace {

class Cli : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = fs::temp_directory_path() / ("liebridge_cli_" + std::to_string(::getpid()) + "_" +
                                            ::testing::UnitTest::GetInstance()->current_test_info()->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
        ::unsetenv("LIEBRIDGE_SEED");
    }
    void TearDown() override { fs::remove_all(dir_); }

    int cli(std::vector<std::string> args) {
        args.insert(args.begin(), "liebridge");
        out_.str("");
        err_.str("");
        return run(args, out_, err_);
    }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    static std::string slurp(const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::stringstream ss;
        ss << f.rdbuf();
        return ss.str();
    }

    static int lines(const fs::path& p) {
        std::ifstream f(p);
        std::string line;
        int n = 0;
        while (std::getline(f, line)) {
            ++n;
        }
        return n;
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

}  // namespace

TEST_F(Cli, SampleBmWritesPathsAndManifest) {
    ASSERT_EQ(cli({"sample-bm", "--metric", "identity", "--T", "1", "--steps", "20", "--paths", "3", "--frames",
                   "--out", path("a")}),
              0);
    for (int i = 0; i < 3; ++i) {
        EXPECT_EQ(lines(dir_ / "a" / ("path_000" + std::to_string(i) + ".csv")), 22);
        EXPECT_EQ(lines(dir_ / "a" / ("frames_000" + std::to_string(i) + ".csv")), 22);
    }
    const json m = json::parse(slurp(dir_ / "a" / "manifest.json"));
    EXPECT_EQ(m["command"], "sample-bm");
    EXPECT_EQ(m["config"]["paths"], 3);
    for (const char* k : {"command", "config", "seed", "version", "wall_time"}) {
        EXPECT_TRUE(m.contains(k)) << k;
    }
    ASSERT_EQ(cli({"sample-bm", "--paths", "3", "--frames", "--out", path("b")}), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "path_0002.csv"), slurp(dir_ / "b" / "path_0002.csv"));
}

TEST_F(Cli, SeedEnvironmentOverride) {
    ASSERT_EQ(::setenv("LIEBRIDGE_SEED", "77", 1), 0);
    ASSERT_EQ(cli({"sample-bm", "--seed", "1", "--out", path("a")}), 0);
    EXPECT_EQ(json::parse(slurp(dir_ / "a" / "manifest.json"))["seed"], 77);
    ::unsetenv("LIEBRIDGE_SEED");
    ASSERT_EQ(cli({"sample-bm", "--seed", "77", "--out", path("b")}), 0);
    EXPECT_EQ(slurp(dir_ / "a" / "path_0000.csv"), slurp(dir_ / "b" / "path_0000.csv"));
}

TEST_F(Cli, SampleBridgeOutputsAndValidation) {
    ASSERT_EQ(cli({"sample-bridge", "--paths", "4", "--formula", "paper_verbatim", "--out", path("a")}), 0);
    const json m = json::parse(slurp(dir_ / "a" / "manifest.json"));
    EXPECT_EQ(m["config"]["formula"], "paper_verbatim");
    const json sidecar = json::parse(slurp(dir_ / "a" / "bridge_0000.json"));
    EXPECT_EQ(sidecar["formula"], "paper_verbatim");
    EXPECT_EQ(sidecar["k"], 100);
    const json summary = json::parse(slurp(dir_ / "a" / "summary.json"));
    EXPECT_EQ(summary["n_bridges"], 4);
    std::ifstream csv(dir_ / "a" / "bridge_0000.csv");
    std::string header;
    std::getline(csv, header);
    EXPECT_EQ(header, "t,r00,r01,r02,r10,r11,r12,r20,r21,r22,r,log_phi_cum");

    EXPECT_EQ(cli({"sample-bridge", "--T", "1", "--steps", "1", "--out", path("b")}), 2);
    EXPECT_EQ(cli({"sample-bridge", "--target-axis-angle", "3.14159265358979,0,0", "--out", path("c")}), 4);
    EXPECT_EQ(cli({"sample-bridge", "--formula", "other", "--out", path("d")}), 2);
}

TEST_F(Cli, EstimateDensityFlatLimitAndErrors) {
    ASSERT_EQ(cli({"estimate-density", "--metric", "identity", "--T", "0.02", "--bridges", "4096", "--out", path("a"),
                   "--weights-csv", path("w.csv")}),
              0);
    const json r = json::parse(out_.str());
    const double gauss = std::pow(2.0 * M_PI * 0.02, -1.5);
    EXPECT_NEAR(r["p_hat"].get<double>() / gauss, 1.0, 0.1);
    EXPECT_EQ(lines(path("w.csv")), 4097);
    const std::string first = out_.str();
    ASSERT_EQ(cli({"estimate-density", "--T", "0.02", "--bridges", "4096", "--out", path("b")}), 0);
    EXPECT_EQ(out_.str(), first);

    EXPECT_EQ(cli({"estimate-density", "--bridges", "1", "--out", path("c")}), 2);
    EXPECT_EQ(cli({"estimate-density", "--metric", "diag:1,0,1", "--out", path("d")}), 2);
}

TEST_F(Cli, FitMetricConfigValidationAndFixedPoint) {
    json e = {{"true_metric", {0.2, 0.2, 0.8}}, {"init_metric", {1.0, 1.0, 1.0}}, {"n_obs", 8},
              {"T", 0.01},                    {"steps", 10},                   {"bridges_per_obs", 2},
              {"lr", 0.0},                    {"iters", 3},                    {"seed", 5},
              {"grad_tol", 0.0}};
    std::ofstream(path("ok.json")) << e.dump();
    ASSERT_EQ(cli({"fit-metric", "--config", path("ok.json"), "--out", path("fit")}), 0);
    EXPECT_EQ(lines(dir_ / "fit" / "trace.csv"), 5);
    const json fin = json::parse(slurp(dir_ / "fit" / "final_metric.json"));
    EXPECT_EQ(fin["a"], json({{1.0, 0.0, 0.0}, {0.0, 1.0, 0.0}, {0.0, 0.0, 1.0}}));

    json missing = e;
    missing.erase("bridges_per_obs");
    std::ofstream(path("missing.json")) << missing.dump();
    EXPECT_EQ(cli({"fit-metric", "--config", path("missing.json"), "--out", path("x")}), 2);
    EXPECT_NE(err_.str().find("bridges_per_obs"), std::string::npos);
    EXPECT_EQ(cli({"fit-metric", "--config", path("nonexistent.json")}), 2);
}

TEST_F(Cli, ReplayReproducesOutputs) {
    ASSERT_EQ(cli({"sample-bridge", "--paths", "6", "--steps", "30", "--out", path("a"), "--workers", "1"}), 0);
    ASSERT_EQ(cli({"replay", path("a/manifest.json"), "--out", path("b"), "--workers", "3"}), 0);
    for (const auto& entry : fs::directory_iterator(dir_ / "a")) {
        const auto name = entry.path().filename();
        if (name == "manifest.json") {
            continue;
        }
        EXPECT_EQ(slurp(entry.path()), slurp(dir_ / "b" / name)) << name;
    }
    EXPECT_EQ(cli({"replay", path("nope.json")}), 2);
}
