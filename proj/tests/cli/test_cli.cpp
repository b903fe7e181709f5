#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "tactile/record_log.hpp"
#include "tactile_cli/cli.hpp"

namespace fs = std::filesystem;
using tactile::cli::run_cli;
using Json = nlohmann::json;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run cli(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(args, out, err);
  return {code, out.str(), err.str()};
}

std::string scenario(const std::string& name) { return (fs::path(TACTILE_SOURCE_DIR) / "scenarios" / name).string(); }

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void spit(const fs::path& p, const std::string& text) {
  std::ofstream os(p, std::ios::binary);
  os << text;
}

class Cli : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("tactile_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    ::unsetenv(tactile::cli::kOutDirEnv);
  }
  void TearDown() override {
    ::unsetenv(tactile::cli::kOutDirEnv);
    fs::remove_all(dir_);
  }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

Json json_of(const Run& r) { return Json::parse(r.out); }

}  // namespace

TEST_F(Cli, UsageErrorsExitWithConfigCode) {
  EXPECT_EQ(cli({}).code, 2);
  EXPECT_EQ(cli({"no-such-command"}).code, 2);
  EXPECT_EQ(cli({"bench-latency", "--runs", "many"}).code, 2);
  EXPECT_EQ(cli({"bench-latency", "--format", "xml"}).code, 2);
  EXPECT_EQ(cli({"--help"}).code, 0);
  const auto v = cli({"--version"});
  EXPECT_EQ(v.code, 0);
  EXPECT_FALSE(v.out.empty());
}

TEST_F(Cli, RecordIsDeterministicAndCountsChunks) {
  const auto a = cli({"record", scenario("demo.yaml"), "--out", path("a.d36r"), "--format", "json"});
  const auto b = cli({"record", scenario("demo.yaml"), "--out", path("b.d36r"), "--quiet"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  EXPECT_EQ(slurp(path("a.d36r")), slurp(path("b.d36r")));
  // Two fingers for 3 s: visuotactile 30 + audio 48000/480 + pressure 1000 +
  // inertial 200 chunks per second, plus one heat reading per second.
  const auto j = json_of(a);
  EXPECT_EQ(j["summary"]["chunks"].get<std::size_t>(), 2u * (90 + 300 + 3000 + 600 + 3));
  EXPECT_EQ(j["summary"]["streams"].get<std::size_t>(), 10u);
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 7u);

  const auto c = cli({"record", scenario("demo.yaml"), "--out", path("c.d36r"), "--seed", "8", "--quiet"});
  ASSERT_EQ(c.code, 0);
  EXPECT_NE(slurp(path("a.d36r")), slurp(path("c.d36r")));
}

TEST_F(Cli, ReplayReencodesByteForByte) {
  ASSERT_EQ(cli({"record", scenario("demo.yaml"), "--out", path("a.d36r"), "--quiet"}).code, 0);
  const auto r = cli({"replay", path("a.d36r"), "--out", path("again.d36r"), "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(json_of(r)["summary"]["byte_identical"].get<bool>());
  EXPECT_EQ(json_of(r)["tables"]["streams"].size(), 10u);
  EXPECT_EQ(slurp(path("a.d36r")), slurp(path("again.d36r")));
}

TEST_F(Cli, CorruptOrMissingLogs) {
  ASSERT_EQ(cli({"record", scenario("demo.yaml"), "--out", path("a.d36r"), "--quiet"}).code, 0);
  std::string bytes = slurp(path("a.d36r"));
  bytes[0] ^= 0x5a;
  spit(path("bad.d36r"), bytes);
  const auto bad = cli({"replay", path("bad.d36r")});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.err.find("error"), std::string::npos);

  spit(path("short.d36r"), slurp(path("a.d36r")).substr(0, 200));
  EXPECT_EQ(cli({"replay", path("short.d36r")}).code, 2);
  EXPECT_EQ(cli({"replay", path("missing.d36r")}).code, 3);
}

TEST_F(Cli, MalformedScenarioNamesTheLine) {
  spit(path("bad.yaml"), "seed: 1\nduration_s: 1.0\nfingers: [oops\n");
  const auto r = cli({"record", path("bad.yaml"), "--out", path("x.d36r")});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("line"), std::string::npos) << r.err;

  spit(path("overlap.yaml"),
       "duration_s: 2.0\nfingers: 1\nevents:\n"
       "  - {kind: tap, start: 0.1, end: 1.0}\n"
       "  - {kind: tap, start: 0.5, end: 1.5}\n");
  EXPECT_EQ(cli({"record", path("overlap.yaml"), "--out", path("y.d36r")}).code, 2);
  EXPECT_EQ(cli({"record", path("nowhere.yaml"), "--out", path("z.d36r")}).code, 3);
}

TEST_F(Cli, NoJitterLatencyTotals) {
  const auto r = cli({"bench-latency", "--runs", "1", "--no-jitter", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json_of(r);
  EXPECT_DOUBLE_EQ(j["summary"]["total_mean_us_host"].get<double>(), 3146.0);
  EXPECT_DOUBLE_EQ(j["summary"]["total_mean_us_device"].get<double>(), 683.0);
  EXPECT_FALSE(j["summary"]["budget_pass_host"].get<bool>());
  EXPECT_TRUE(j["summary"]["budget_pass_device"].get<bool>());
}

TEST_F(Cli, ReportsCarryProvenanceFields) {
  const auto csv = cli({"bench-mtf"});
  ASSERT_EQ(csv.code, 0) << csv.err;
  EXPECT_NE(csv.out.find("# seed="), std::string::npos);
  EXPECT_NE(csv.out.find("# config_hash="), std::string::npos);
  EXPECT_NE(csv.out.find("# version="), std::string::npos);
  const auto j = json_of(cli({"bench-latency", "--runs", "50", "--format", "json", "--seed", "4"}));
  EXPECT_EQ(j["seed"].get<std::uint64_t>(), 4u);
  EXPECT_EQ(j["config_hash"].get<std::string>().size(), 16u);
  EXPECT_FALSE(j["version"].get<std::string>().empty());
  EXPECT_EQ(j["schema"].get<std::string>(), "tactile-bench/bench-latency/v1");
}

TEST_F(Cli, SameSeedSameReport) {
  const auto a = cli({"bench-latency", "--runs", "200", "--seed", "3"});
  const auto b = cli({"bench-latency", "--runs", "200", "--seed", "3"});
  const auto c = cli({"bench-latency", "--runs", "200", "--seed", "4"});
  EXPECT_EQ(a.out, b.out);
  EXPECT_NE(a.out, c.out);
}

TEST_F(Cli, FlagsOverrideConfigFileOverrideDefaults) {
  spit(path("cfg.json"), R"({"runs": 1, "no_jitter": true, "seed": 5, "format": "json"})");
  const auto from_file = json_of(cli({"bench-latency", "--config", path("cfg.json")}));
  EXPECT_EQ(from_file["seed"].get<std::uint64_t>(), 5u);
  EXPECT_EQ(from_file["config"]["latency"]["runs"].get<std::size_t>(), 1u);
  EXPECT_DOUBLE_EQ(from_file["summary"]["total_mean_us_host"].get<double>(), 3146.0);

  const auto flagged = json_of(cli({"bench-latency", "--config", path("cfg.json"), "--seed", "9", "--runs", "20"}));
  EXPECT_EQ(flagged["seed"].get<std::uint64_t>(), 9u);
  EXPECT_EQ(flagged["config"]["latency"]["runs"].get<std::size_t>(), 20u);
  EXPECT_TRUE(flagged["config"]["latency"]["no_jitter"].get<bool>());
  EXPECT_NE(from_file["config_hash"], flagged["config_hash"]);

  const auto defaults = json_of(cli({"bench-latency", "--runs", "20", "--format", "json"}));
  EXPECT_EQ(defaults["seed"].get<std::uint64_t>(), 1u);
  EXPECT_FALSE(defaults["config"]["latency"]["no_jitter"].get<bool>());

  spit(path("wrong.json"), R"({"runs": "lots"})");
  EXPECT_EQ(cli({"bench-latency", "--config", path("wrong.json")}).code, 2);
  spit(path("broken.json"), "{runs: ");
  EXPECT_EQ(cli({"bench-latency", "--config", path("broken.json")}).code, 2);
  EXPECT_EQ(cli({"bench-latency", "--config", path("absent.json")}).code, 3);
}

TEST_F(Cli, LiquidLevelsFromTapRecordings) {
  std::vector<std::string> args = {"analyze-liquid"};
  for (const char* level : {"empty", "half", "full"}) {
    const std::string log = path(std::string(level) + ".d36r");
    ASSERT_EQ(cli({"record", scenario(std::string("liquid_") + level + ".yaml"), "--out", log, "--quiet"}).code, 0);
    args.push_back(log);
  }
  args.insert(args.end(), {"--format", "json"});
  const auto r = cli(args);
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json_of(r);
  const auto& pred = j["tables"]["fill_prediction"];
  ASSERT_EQ(pred.size(), 3u);
  EXPECT_EQ(pred[0]["predicted"], "empty");
  EXPECT_EQ(pred[1]["predicted"], "half");
  EXPECT_EQ(pred[2]["predicted"], "full");
  // Each scripted tap event is a train at 0.4 s spacing: two strikes per event.
  for (const auto& row : pred) EXPECT_EQ(row["taps"].get<std::size_t>(), 6u);

  double max_empty = 0.0, max_full = 0.0;
  for (const auto& tap : j["tables"]["taps"]) {
    const double hz = tap["peak_hz"].get<double>();
    if (tap["log"].get<std::string>() == args[1]) max_empty = std::max(max_empty, hz);
    if (tap["log"].get<std::string>() == args[3]) max_full = std::max(max_full, hz);
  }
  EXPECT_LT(max_full, max_empty);
}

TEST_F(Cli, LiquidWithoutTapsIsEmptyResult) {
  spit(path("quiet.yaml"), "seed: 2\nduration_s: 1.0\nfingers: 1\nmodalities: [audio]\n");
  ASSERT_EQ(cli({"record", path("quiet.yaml"), "--out", path("quiet.d36r"), "--quiet"}).code, 0);
  EXPECT_EQ(cli({"analyze-liquid", path("quiet.d36r")}).code, 4);

  spit(path("deaf.yaml"), "seed: 2\nduration_s: 1.0\nfingers: 1\nmodalities: [pressure]\n");
  ASSERT_EQ(cli({"record", path("deaf.yaml"), "--out", path("deaf.d36r"), "--quiet"}).code, 0);
  EXPECT_EQ(cli({"analyze-liquid", path("deaf.d36r")}).code, 4);
}

TEST_F(Cli, OutputDirectoryFromEnvironment) {
  EXPECT_EQ(cli({"record", scenario("demo.yaml")}).code, 2);

  const fs::path out = dir_ / "reports";
  ::setenv(tactile::cli::kOutDirEnv, out.c_str(), 1);
  const auto r = cli({"bench-mtf"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(out / "bench-mtf.csv"));
  EXPECT_NE(r.out.find("report: "), std::string::npos);
  EXPECT_EQ(cli({"bench-mtf", "--format", "json", "--quiet"}).out, "");
  EXPECT_NO_THROW((void)Json::parse(slurp(out / "bench-mtf.json")));

  ASSERT_EQ(cli({"record", scenario("demo.yaml"), "--quiet"}).code, 0);
  EXPECT_TRUE(fs::exists(out / "demo.d36r"));

  EXPECT_EQ(cli({"bench-mtf", "--out", path("explicit.csv"), "--quiet"}).code, 0);
  EXPECT_TRUE(fs::exists(dir_ / "explicit.csv"));
}

TEST_F(Cli, ReflexOnDeviceFasterThanHost) {
  const auto r = cli({"bench-reflex", "--runs", "200", "--format", "json"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto j = json_of(r);
  EXPECT_LT(j["summary"]["reflex_mean_us_device"].get<double>(), j["summary"]["reflex_mean_us_host"].get<double>());
  EXPECT_EQ(cli({"bench-reflex", "--runs", "10"}).code, 2);
}
