#include <gtest/gtest.h>
#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

const std::string kFixtures = VHETNET_FIXTURES;

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / ("vhetnet_cli_" + std::string(info->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Runs the CLI with stdout and stderr captured; returns the exit status.
  int run(const std::string& args) {
    const std::string cmd = std::string(VHETNET_CLI) + " " + args + " > " + (dir_ / "stdout.txt").string() + " 2> " +
                            (dir_ / "stderr.txt").string();
    const int rc = std::system(cmd.c_str());
    return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
  }

  std::string read(const fs::path& p) const {
    std::ifstream in(p, std::ios::binary);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  std::string out(const std::string& sub) const { return (dir_ / sub).string(); }
  std::string fixture(const std::string& name) const { return kFixtures + "/" + name; }
  std::string err() const { return read(dir_ / "stderr.txt"); }

  fs::path dir_;
};

}  // namespace

TEST_F(Cli, UsageErrorsExitOne) {
  EXPECT_EQ(run(""), 1);
  EXPECT_EQ(run("sweep --experiment fig9"), 1);
  EXPECT_EQ(run("synth --profile huge"), 1);
  EXPECT_EQ(run("synth --bogus"), 1);
}

TEST_F(Cli, UnknownConfigKeyExitsOneWithItsPath) {
  EXPECT_EQ(run("synth --config " + fixture("config_typo.json") + " --out " + out("o")), 1);
  EXPECT_NE(err().find("sweep.neighbours"), std::string::npos);
}

TEST_F(Cli, SynthWritesLoadsAndPlacements) {
  ASSERT_EQ(run("synth --config " + fixture("config_small.json") + " --out " + out("o")), 0);
  const std::string csv = read(dir_ / "o" / "loads.csv");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 1 + 30 * 3 * 144);
  const json pl = json::parse(read(dir_ / "o" / "placements.json"));
  EXPECT_EQ(pl.size(), 30u);
}

TEST_F(Cli, IngestAggregatesCdrFiles) {
  ASSERT_EQ(run("ingest " + fixture("cdr_sample.txt") + " --out " + out("all")), 0);
  const json rep = json::parse(read(dir_ / "all" / "ingest_report.json"));
  EXPECT_EQ(rep.at("records"), 864);
  EXPECT_EQ(rep.at("sbs"), 6);
  EXPECT_EQ(rep.at("slots"), 144);
  EXPECT_EQ(rep.at("files")[0].at("header_skipped"), true);

  ASSERT_EQ(run("ingest " + fixture("cdr_sample.txt") + " --n-sbs 4 --out " + out("four")), 0);
  EXPECT_EQ(json::parse(read(dir_ / "four" / "placements.json")).size(), 4u);
}

TEST_F(Cli, IngestWithoutRecordsIsADataError) {
  EXPECT_EQ(run("ingest " + fixture("cdr_header_only.txt") + " --out " + out("o")), 2);
}

TEST_F(Cli, CsvSourceFeedsTheEstimator) {
  ASSERT_EQ(run("ingest " + fixture("cdr_sample.txt") + " --out " + out("in")), 0);
  std::ofstream(dir_ / "csv.json") << json{{"n_sbs", 6},
                                           {"n_days", 1},
                                           {"sleep_fraction", 0.2},
                                           {"sweep", {{"neighbors", {1, 2}}, {"s_values", {2, 4}}}},
                                           {"data",
                                            {{"source", "csv"},
                                             {"load_csv", out("in") + "/loads.csv"},
                                             {"placements", out("in") + "/placements.json"}}}}
                                          .dump();
  ASSERT_EQ(run("estimate --config " + out("csv.json") + " --estimator distance --neighbors 2 --sleepers 1 --slot 5 --out " +
                out("e")),
            0)
      << err();
  const json r = json::parse(read(dir_ / "e" / "estimate_desk_1.json"));
  EXPECT_EQ(r.at("estimates").size(), 1u);
}

TEST_F(Cli, EstimateReportsSleepers) {
  ASSERT_EQ(run("estimate --config " + fixture("config_small.json") +
                " --estimator mlc --layers 3 --slot 80 --sleepers 3,7,20 --seed 4 --out " + out("o")),
            0)
      << err();
  const json r = json::parse(read(dir_ / "o" / "estimate_desk_4.json"));
  EXPECT_EQ(r.at("estimator"), "mlc");
  ASSERT_EQ(r.at("estimates").size(), 3u);
  EXPECT_EQ(r.at("estimates")[1].at("sbs_id"), 7);
  EXPECT_EQ(r.at("config").at("estimator").at("layers"), 3);
  EXPECT_EQ(run("estimate --config " + fixture("config_small.json") + " --sleepers 99 --out " + out("o")), 2);
}

TEST_F(Cli, OptimizeInstance) {
  ASSERT_EQ(run("optimize --instance " + fixture("instance.json") + " --out " + out("o")), 0) << err();
  const json r = json::parse(read(dir_ / "o" / "optimize_desk_1.json"));
  EXPECT_EQ(r.at("optimizer"), "exhaustive");
  EXPECT_TRUE(r.at("feasible").get<bool>());
  EXPECT_EQ(r.at("on_off").get<std::string>().size(), 6u);

  ASSERT_EQ(run("optimize --instance " + fixture("instance.json") + " --optimizer greedy --out " + out("g")), 0);
  const json g = json::parse(read(dir_ / "g" / "optimize_desk_1.json"));
  EXPECT_EQ(g.at("optimizer"), "greedy");
  EXPECT_GE(g.at("power_w").get<double>(), r.at("power_w").get<double>() - 1e-9);
}

TEST_F(Cli, OverloadedInstanceExitsThree) {
  EXPECT_EQ(run("optimize --instance " + fixture("instance_overloaded.json") + " --out " + out("o")), 3);
}

TEST_F(Cli, OptimizeFromDataset) {
  ASSERT_EQ(run("optimize --config " + fixture("config_small.json") + " --slot 60 --s 8 --out " + out("o")), 0) << err();
  const json r = json::parse(read(dir_ / "o" / "optimize_desk_1.json"));
  EXPECT_EQ(r.at("loads").size(), 8u);
}

TEST_F(Cli, SweepIsWorkerInvariantAndReproducibleFromItsEcho) {
  const std::string base = "sweep --experiment fig4 --config " + fixture("config_small.json") + " --seed 5";
  ASSERT_EQ(run(base + " --workers 1 --out " + out("w1")), 0) << err();
  ASSERT_EQ(run(base + " --workers 4 --out " + out("w4")), 0) << err();
  const std::string csv = read(dir_ / "w1" / "fig4_desk_5.csv");
  ASSERT_FALSE(csv.empty());
  EXPECT_EQ(csv, read(dir_ / "w4" / "fig4_desk_5.csv"));

  const json meta = json::parse(read(dir_ / "w1" / "fig4_desk_5.json"));
  std::ofstream(dir_ / "echo.json") << meta.at("config").dump(2);
  ASSERT_EQ(run("sweep --experiment fig4 --config " + out("echo.json") + " --out " + out("echo")), 0) << err();
  EXPECT_EQ(read(dir_ / "echo" / "fig4_desk_5.csv"), csv);
}
