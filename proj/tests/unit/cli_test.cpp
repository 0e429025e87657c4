#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <string>

#include "aisel/aisel.hpp"
#include "../support/fixtures.hpp"

using namespace aisel;
namespace fs = std::filesystem;

namespace {

const Json kTiny = {{"run_id", "t"},
                    {"seed", 5},
                    {"data", {{"count", 120}}},
                    {"n_train", 80},
                    {"m_virtual", 20},
                    {"pool_size", 256},
                    {"gin", {{"epochs", 20}, {"encoder_epochs", 20}, {"batch_size", 32}}},
                    {"native", {{"epochs", 3}}},
                    {"grid", {{"size", 11}}}};

int aisel_cli(const std::string& args) {
    const std::string cmd = std::string("'") + AISEL_CLI_PATH + "' " + args + " >/dev/null 2>&1";
    const int st = std::system(cmd.c_str());
    return WIFEXITED(st) ? WEXITSTATUS(st) : -1;
}

struct CliRun {
    check::TempDir dir{"cli"};

    explicit CliRun(const Json& cfg = kTiny) { check::write_file(dir / "cfg.json", cfg.dump()); }

    int run(const std::string& sub, const std::string& extra = "") const {
        return aisel_cli(sub + " --config '" + (dir / "cfg.json").string() + "' --out '" + (dir / "out").string() + "' " + extra);
    }
    fs::path root() const { return dir / "out" / "t"; }
    std::string file(const std::string& rel) const { return check::read_file(root() / rel); }
};

} // namespace

TEST(Cli, RunAllWritesTheArtifactTree) {
    CliRun c;
    ASSERT_EQ(c.run("run-all"), 0);
    for (const char* p : {"config.resolved.json", "metrics.csv", "report.json", "designs/fold1.csv", "designs/fold1.json",
                          "designs/fold1_labels.csv", "checkpoints/fold1/native.ckpt", "checkpoints/fold1/improved.ckpt",
                          "checkpoints/fold1/gin/gin.json"}) {
        EXPECT_TRUE(fs::exists(c.root() / p)) << p;
    }
    EXPECT_FALSE(fs::exists(c.root() / "error.json"));
    EXPECT_EQ(check::count_lines(c.file("designs/fold1_labels.csv")), 21u);
}

TEST(Cli, StagesMatchRunAllBitwise) {
    CliRun a, b;
    ASSERT_EQ(a.run("run-all"), 0);
    for (const char* s : {"train-native", "train-gin", "sample", "label", "retrain", "eval"}) ASSERT_EQ(b.run(s), 0) << s;
    for (const char* p : {"metrics.csv", "designs/fold1.csv", "designs/fold1_labels.csv", "designs/fold1_pool.csv"}) {
        EXPECT_EQ(a.file(p), b.file(p)) << p;
    }
}

TEST(Cli, MethodNoneGivesIdenticalRows) {
    CliRun c;
    ASSERT_EQ(c.run("run-all", "--set method=none"), 0);
    std::istringstream is(c.file("metrics.csv"));
    std::string header, native, improved;
    std::getline(is, header);
    std::getline(is, native);
    std::getline(is, improved);
    EXPECT_EQ(native.substr(native.find(",native,") + 8), improved.substr(improved.find(",improved,") + 10));
    EXPECT_EQ(c.file("designs/fold1.csv"), "f1,f2,kind\n");
}

TEST(Cli, ZeroVirtualExamplesWritesHeaderOnlyDesign) {
    CliRun c;
    ASSERT_EQ(c.run("train-native", "--set m_virtual=0"), 0);
    ASSERT_EQ(c.run("train-gin", "--set m_virtual=0"), 0);
    ASSERT_EQ(c.run("sample", "--set m_virtual=0"), 0);
    EXPECT_EQ(c.file("designs/fold1.csv"), "f1,f2,kind\n");
}

TEST(Cli, ExportGridLineCount) {
    CliRun c;
    ASSERT_EQ(c.run("run-all"), 0);
    ASSERT_EQ(c.run("export-grid", "--set grid.size=101"), 0);
    EXPECT_EQ(check::count_lines(c.file("grids/fold1_entropy.csv")), 10202u);
    EXPECT_EQ(check::count_lines(c.file("grids/fold1_design.csv")), 1u + 20u + 80u);
}

TEST(Cli, ConfigErrorsExitTwo) {
    CliRun c;
    EXPECT_EQ(c.run("run-all", "--set gin.epoch=3"), 2);
    EXPECT_EQ(c.run("run-all", "--set method=greedy"), 2);
    EXPECT_EQ(aisel_cli("run-all --config /nonexistent/cfg.json"), 2);
    EXPECT_EQ(aisel_cli("frobnicate"), 2);
    EXPECT_FALSE(fs::exists(c.root() / "error.json"));
}

TEST(Cli, ModuleErrorExitsOneWithErrorJson) {
    CliRun c;
    ASSERT_EQ(c.run("sample"), 1);
    const auto err = Json::parse(c.file("error.json"));
    EXPECT_EQ(err.at("command"), "sample");
    EXPECT_EQ(err.at("error"), "error");
    EXPECT_NE(err.at("message").get<std::string>().find("train-"), std::string::npos);
}

TEST(Cli, OracleFailureIsReported) {
    CliRun c;
    ASSERT_EQ(c.run("run-all", "--set oracle.kind=external_command --set 'oracle.command=while read l; do echo 9; done'"), 1);
    EXPECT_EQ(Json::parse(c.file("error.json")).at("error"), "oracle_error");
    // A later successful run clears the stale error.
    ASSERT_EQ(c.run("run-all"), 0);
    EXPECT_FALSE(fs::exists(c.root() / "error.json"));
}

TEST(Cli, ExternalOracleScript) {
    CliRun c;
    check::write_file(c.dir / "oracle.sh", "#!/bin/sh\nwhile read line; do echo 1; done\n");
    fs::permissions(c.dir / "oracle.sh", fs::perms::owner_all);
    ASSERT_EQ(c.run("run-all", "--set oracle.kind=external_command --set 'oracle.command=" + (c.dir / "oracle.sh").string() + "'"), 0);
    std::string expect = "label\n";
    for (int i = 0; i < 20; ++i) expect += "1\n";
    EXPECT_EQ(c.file("designs/fold1_labels.csv"), expect);
}

TEST(Cli, SeedFlagOverridesConfig) {
    CliRun c;
    ASSERT_EQ(c.run("train-native", "--seed 17"), 0);
    EXPECT_EQ(Json::parse(c.file("config.resolved.json")).at("seed"), 17);
}

TEST(Cli, ReportReplaysBitwise) {
    CliRun c;
    ASSERT_EQ(c.run("run-all"), 0);
    const std::string first = c.file("metrics.csv");
    check::TempDir again("replay");
    ASSERT_EQ(aisel_cli("run-all --config '" + (c.root() / "report.json").string() + "' --out '" + again.path().string() + "'"), 0);
    EXPECT_EQ(check::read_file(again / "t" / "metrics.csv"), first);
}
