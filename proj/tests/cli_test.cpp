#include <gtest/gtest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "linhash/cli.hpp"

namespace linhash::cli {
namespace {

struct Result {
  int code;
  std::string out;
  std::string err;
};

Result invoke(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = run(args, out, err);
  return {code, out.str(), err.str()};
}

std::vector<std::string> cells(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  for (std::string c; std::getline(ss, c, ',');) out.push_back(c);
  if (!line.empty() && line.back() == ',') out.push_back("");
  return out;
}

// Data row whose `column` equals `value`, as cells.
std::vector<std::string> find_row(const std::string& output, std::size_t column,
                                  const std::string& value) {
  for (const auto& line : data_rows(output)) {
    const auto c = cells(line);
    if (c.size() > column && c[column] == value) return c;
  }
  return {};
}

std::filesystem::path temp_path(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("linhash_cli_test_" + name);
}

TEST(Cli, SimulateSchemaAndSummary) {
  const Result r = invoke({"simulate", "--u", "2", "--b", "1", "--set-size", "4", "--trials", "20000",
                           "--seed", "3", "--thresholds", "2,4"});
  ASSERT_EQ(r.code, kOk) << r.err;
  ASSERT_EQ(r.out.rfind("# manifest: ", 0), 0u);
  const auto rows = data_rows(r.out);
  EXPECT_EQ(rows.front(), kExperimentHeader);
  for (const auto& line : rows) EXPECT_EQ(cells(line).size(), 13u) << line;
  EXPECT_EQ(rows.size(), 1u + 20000u + 6u + 2u);
  const auto mean = find_row(r.out, 6, "mean");
  const auto se = find_row(r.out, 6, "stderr");
  ASSERT_FALSE(mean.empty());
  EXPECT_NEAR(std::stod(mean[8]), 2.5, 3 * std::stod(se[8]));
  const auto tail2 = find_row(r.out, 9, "2");
  EXPECT_EQ(tail2[10], "1");
}

TEST(Cli, SimulateIsByteDeterministicAcrossRunsAndJobs) {
  const std::vector<std::string> base{"simulate", "--u", "24", "--b", "6,8", "--set", "random",
                                      "--trials", "300", "--seed", "7", "--thresholds", "3,5"};
  auto with_jobs = [&](const char* jobs) {
    auto args = base;
    args.insert(args.end(), {"--jobs", jobs});
    return invoke(args);
  };
  const Result a = with_jobs("1");
  const Result b = with_jobs("4");
  ASSERT_EQ(a.code, kOk);
  EXPECT_EQ(data_rows(a.out), data_rows(b.out));
  EXPECT_EQ(data_rows(a.out), data_rows(with_jobs("1").out));
}

TEST(Cli, SeedFromEnvironment) {
  ::setenv(kSeedEnv, "99", 1);
  const Result env = invoke({"simulate", "--u", "10", "--b", "3", "--trials", "5"});
  ::unsetenv(kSeedEnv);
  const Result flag = invoke({"simulate", "--u", "10", "--b", "3", "--trials", "5", "--seed", "99"});
  EXPECT_EQ(data_rows(env.out), data_rows(flag.out));
}

TEST(Cli, JsonMirrorsCsv) {
  const Result r = invoke({"simulate", "--u", "8", "--b", "2", "--trials", "3", "--format", "json",
                           "--thresholds", "2"});
  ASSERT_EQ(r.code, kOk);
  const auto doc = nlohmann::json::parse(r.out);
  EXPECT_EQ(doc["manifest"]["subcommand"], "simulate");
  EXPECT_EQ(doc["rows"].size(), 3u + 6u + 1u);
  EXPECT_TRUE(doc["rows"][0]["f"].is_null());
  EXPECT_EQ(doc["rows"][0]["experiment"], "simulate");
  EXPECT_TRUE(doc["summary"].contains("runs"));
}

TEST(Cli, ExactRationals) {
  const Result r = invoke({"exact", "--u", "2", "--b", "1"});
  ASSERT_EQ(r.code, kOk);
  EXPECT_EQ(find_row(r.out, 6, "mean")[8], "5/2");
  EXPECT_EQ(find_row(r.out, 9, "4")[10], "1/4");
  EXPECT_EQ(find_row(invoke({"exact", "--u", "2", "--b", "2"}).out, 6, "mean")[8], "7/4");
  EXPECT_EQ(find_row(invoke({"exact", "--u", "1", "--b", "1"}).out, 6, "mean")[8], "3/2");
  EXPECT_EQ(invoke({"exact", "--u", "8", "--b", "4"}).code, kSizeGuard);
}

TEST(Cli, BoundsRows) {
  const Result r = invoke({"bounds", "--formula", "e2,c-epsilon,surjective-miss", "--b", "8", "--f",
                           "11", "--eps", "0.5", "--u", "10", "--t", "4", "--alpha", "0.999999"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto e2 = find_row(r.out, 0, "e2");
  EXPECT_NEAR(std::stod(e2[8]), 0.037037037, 1e-8);
  EXPECT_EQ(find_row(r.out, 0, "c-epsilon")[8], "17179869184");
  const auto miss = find_row(r.out, 0, "surjective-miss");
  EXPECT_EQ(miss[9], "1");
  EXPECT_EQ(miss[10], "1");
  EXPECT_EQ(invoke({"bounds", "--formula", "e2", "--b", "8", "--f", "8"}).code, kUsage);
  EXPECT_EQ(invoke({"bounds", "--formula", "nope"}).code, kUsage);
}

TEST(Cli, VerifyPassesAndFaultInjectionFails) {
  const Result ok = invoke({"verify", "--samples", "20000", "--instances", "2000"});
  EXPECT_EQ(ok.code, kOk) << ok.out;
  for (const auto& line : data_rows(ok.out)) {
    if (line.rfind("check,", 0) != 0) {
      EXPECT_NE(line.find(",PASS,"), std::string::npos) << line;
    }
  }
  const Result counts = invoke({"verify", "--check", "factorization-count", "--u", "3", "--f", "2", "--b", "1"});
  EXPECT_EQ(counts.code, kOk);
  EXPECT_NE(counts.out.find("count=8 predicted=8"), std::string::npos) << counts.out;
  const Result bad = invoke({"verify", "--check", "composition-uniformity", "--inject-fault",
                             "--samples", "2000"});
  EXPECT_EQ(bad.code, kVerificationFailed);
  EXPECT_EQ(invoke({"verify", "--check", "nope"}).code, kUsage);
  EXPECT_EQ(invoke({"verify", "--check", "composition-uniformity", "--u", "8", "--b", "4"}).code,
            kSizeGuard);
}

TEST(Cli, TableBench) {
  const Result r = invoke({"table-bench", "--n", "0,4096", "--u", "32", "--workload", "random,interval"});
  ASSERT_EQ(r.code, kOk) << r.err;
  const auto rows = data_rows(r.out);
  ASSERT_EQ(rows.size(), 5u);
  const auto empty = cells(rows[1]);
  for (std::size_t c : {5u, 6u, 7u, 8u, 9u, 10u}) EXPECT_EQ(empty[c], "0") << c;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto c = cells(rows[i]);
    EXPECT_EQ(c[5], c[6]);
    EXPECT_EQ(c[11], "ok");
  }
  const Result sub = invoke({"table-bench", "--workload", "subspace", "--n", "1024", "--linear"});
  ASSERT_EQ(sub.code, kOk) << sub.err;
  const auto c = cells(data_rows(sub.out)[1]);
  EXPECT_EQ(c[5], c[12]);
}

TEST(Cli, UsageErrorsAndExitCodes) {
  EXPECT_EQ(invoke({}).code, kUsage);
  EXPECT_EQ(invoke({"frobnicate"}).code, kUsage);
  EXPECT_EQ(invoke({"simulate", "--trials", "x"}).code, kUsage);
  EXPECT_EQ(invoke({"simulate", "--set", "bogus"}).code, kUsage);
  EXPECT_EQ(invoke({"simulate", "--u", "4", "--b", "3", "--set-size", "100"}).code, kUsage);
  EXPECT_EQ(invoke({"--help"}).code, kOk);
}

TEST(Cli, OutFileAndReplay) {
  const auto csv = temp_path("sim.csv");
  const std::vector<std::string> args{"simulate", "--u", "12", "--b", "4", "--trials", "50",
                                      "--seed", "5", "--thresholds", "3", "--out", csv.string()};
  ASSERT_EQ(invoke(args).code, kOk);
  std::ifstream in(csv);
  const std::string written((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const Result replay = invoke({"replay", csv.string()});
  ASSERT_EQ(replay.code, kOk) << replay.err;
  EXPECT_EQ(data_rows(written), data_rows(replay.out));

  const auto json_path = temp_path("bounds.json");
  ASSERT_EQ(invoke({"bounds", "--formula", "tail", "--format", "json", "--out", json_path.string()}).code,
            kOk);
  const Result replay_json = invoke({"replay", json_path.string()});
  ASSERT_EQ(replay_json.code, kOk) << replay_json.err;
  std::ifstream jin(json_path);
  const std::string jwritten((std::istreambuf_iterator<char>(jin)), std::istreambuf_iterator<char>());
  EXPECT_EQ(data_rows(jwritten), data_rows(replay_json.out));
  std::filesystem::remove(csv);
  std::filesystem::remove(json_path);
}

TEST(Cli, ConfigFileFlagsWin) {
  const auto cfg = temp_path("run.toml");
  {
    std::ofstream out(cfg);
    out << "[simulate]\nu = 10\nb = 3\ntrials = 7\nseed = 4\n";
  }
  const Result from_file = invoke({"--config", cfg.string(), "simulate"});
  ASSERT_EQ(from_file.code, kOk) << from_file.err;
  const Result direct = invoke({"simulate", "--u", "10", "--b", "3", "--trials", "7", "--seed", "4"});
  EXPECT_EQ(data_rows(from_file.out), data_rows(direct.out));
  const Result override = invoke({"--config", cfg.string(), "simulate", "--trials", "2"});
  EXPECT_EQ(data_rows(override.out).size(), 1u + 2u + 6u);
  std::filesystem::remove(cfg);
}

}  // namespace
}  // namespace linhash::cli
