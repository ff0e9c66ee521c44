#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>
#include <unistd.h>

#include "rumax_cli/cli.hpp"

namespace {

namespace fs = std::filesystem;

const std::string kFixture = std::string(RUMAX_SOURCE_DIR) + "/problems/binomial_entropic.json";

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
        dir_ = fs::temp_directory_path() /
               ("rumax_cli_" + std::to_string(::getpid()) + "_" + info->name());
        fs::remove_all(dir_);
        fs::create_directories(dir_);
    }
    void TearDown() override { fs::remove_all(dir_); }

    int run(std::vector<std::string> args, const fs::path& out) {
        args.insert(args.begin(), {"rumax", "--quiet", "--out", out.string()});
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        out_.str({});
        err_.str({});
        return rumax::cli::run(static_cast<int>(argv.size()), argv.data(), out_, err_);
    }

    static std::string slurp(const fs::path& p) {
        std::ifstream in(p, std::ios::binary);
        return {std::istreambuf_iterator<char>(in), {}};
    }

    fs::path dir_;
    std::ostringstream out_;
    std::ostringstream err_;
};

TEST_F(CliTest, GapOnFixture) {
    ASSERT_EQ(run({"gap", kFixture}, dir_), rumax::cli::kOk) << err_.str();
    const auto j = nlohmann::json::parse(slurp(dir_ / "gap.json"));
    EXPECT_LE(j.at("relative_gap").get<double>(), 1e-5);
    EXPECT_TRUE(fs::exists(dir_ / "trace.csv"));
}

TEST_F(CliTest, UnreadablePathExitsOne) {
    EXPECT_EQ(run({"solve", (dir_ / "missing.json").string()}, dir_), rumax::cli::kIoError);
    EXPECT_FALSE(err_.str().empty());
}

TEST_F(CliTest, SchemaErrorExitsOne) {
    std::ofstream(dir_ / "bad.json") << R"({"horizon": 1})";
    EXPECT_EQ(run({"solve", (dir_ / "bad.json").string()}, dir_), rumax::cli::kIoError);
}

TEST_F(CliTest, SignFaultExitsThree) {
    EXPECT_EQ(run({"gap", kFixture, "--inject-sign-fault"}, dir_), rumax::cli::kDualityBreach);
}

TEST_F(CliTest, SolveWritesArtifacts) {
    ASSERT_EQ(run({"solve", kFixture}, dir_), rumax::cli::kOk) << err_.str();
    for (const char* f : {"result.json", "certificate.json", "trace.csv", "gap_plot.csv"}) {
        EXPECT_TRUE(fs::exists(dir_ / f)) << f;
    }
    const auto j = nlohmann::json::parse(slurp(dir_ / "result.json"));
    EXPECT_TRUE(j.at("converged").get<bool>());
}

TEST_F(CliTest, GenIsDeterministic) {
    const auto a = dir_ / "a", b = dir_ / "b";
    const std::vector<std::string> args{"--seed", "42", "gen", "-T", "2", "-b", "2", "--kind", "ball"};
    ASSERT_EQ(run(args, a), rumax::cli::kOk) << err_.str();
    ASSERT_EQ(run(args, b), rumax::cli::kOk) << err_.str();
    const auto fa = slurp(a / "instance_42.json");
    EXPECT_FALSE(fa.empty());
    EXPECT_EQ(fa, slurp(b / "instance_42.json"));
}

TEST_F(CliTest, ReportsRunOnFixture) {
    EXPECT_EQ(run({"na-check", kFixture}, dir_), rumax::cli::kOk) << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / "na.csv"));
    EXPECT_EQ(run({"entropic", kFixture}, dir_), rumax::cli::kOk) << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / "entropic.json"));
    EXPECT_EQ(run({"conjugate", kFixture}, dir_), rumax::cli::kOk) << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / "conjugate.csv"));
    EXPECT_EQ(run({"wasserstein", kFixture}, dir_), rumax::cli::kOk) << err_.str();
    EXPECT_TRUE(fs::exists(dir_ / "wasserstein.json"));
}

TEST_F(CliTest, UnknownSubcommandExitsOne) {
    EXPECT_EQ(run({"frobnicate"}, dir_), rumax::cli::kIoError);
}

}  // namespace
