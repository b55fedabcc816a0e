#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "wakeplan/corpus_io.hpp"

namespace fs = std::filesystem;
using wakeplan::json;

namespace {
const fs::path kScratch = fs::temp_directory_path() / "wakeplan_cli_tests";

int run(const std::string& args, const std::string& env = {}) {
  fs::create_directories(kScratch);
  const std::string cmd = env + (env.empty() ? "" : " ") + "\"" WAKEPLAN_CLI "\" " + args + " >>\"" +
                          (kScratch / "log.txt").string() + "\" 2>&1";
  const int rc = std::system(cmd.c_str());
  return WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

fs::path fresh(const char* name) {
  const auto d = kScratch / name;
  fs::remove_all(d);
  return d;
}
}  // namespace

TEST(Cli, PlanOnDemoFieldMatchesGolden) {
  const auto out = fresh("plan");
  const std::string field = std::string(WAKEPLAN_DATA) + "/demo16.wpf";
  ASSERT_EQ(run("--out " + out.string() + " plan --field " + field +
                " --start 15,9,8 --goal 0,7,8 --heuristic admissible_min"),
            0);
  const json got = wakeplan::read_json_file(out / "path.json");
  const json golden = wakeplan::read_json_file(fs::path(WAKEPLAN_DATA) / "demo16_plan.json");
  EXPECT_NEAR(got.at("g_total").get<double>(), golden.at("g_total").get<double>(), 1e-9);
  EXPECT_EQ(got.at("nodes").front(), golden.at("nodes").front());
  EXPECT_EQ(got.at("nodes").back(), golden.at("nodes").back());
}

TEST(Cli, SmallCorpusCardinality) {
  const auto out = fresh("corpus");
  ASSERT_EQ(run("--seed 3 --out " + out.string() +
                " corpus --n 24 --speeds 1,2 --angles 0,30 --starts 2 --no-timing"),
            0);
  ASSERT_TRUE(fs::exists(out / "manifest.json"));
  for (const char* method : {"ci_astar", "wi_astar"}) {
    EXPECT_EQ(wakeplan::read_metrics_csv(out / method / "metrics.csv").size(), 8u) << method;
    EXPECT_EQ(wakeplan::read_path_records(out / method / "paths.jsonl").size(), 8u) << method;
    EXPECT_EQ(wakeplan::read_json_file(out / method / "manifest.json").at("paths"), 8) << method;
  }
}

TEST(Cli, OverfitSmokeSucceeds) { EXPECT_EQ(run("--seed 1 --out " + fresh("smoke").string() + " train --overfit-smoke"), 0); }

TEST(Cli, UsageErrorsExitTwo) {
  EXPECT_EQ(run(""), 2);
  EXPECT_EQ(run("plan --no-such-flag"), 2);
  EXPECT_EQ(run("corpus --starts 0"), 2);
  EXPECT_EQ(run("--out " + fresh("bad").string() + " field --n 8 --heuristic sideways"), 2);
  EXPECT_EQ(run("--out " + fresh("missing").string() + " plan --field /nonexistent/field.wpf"), 1);
}

TEST(Cli, SeedFromEnvironment) {
  const auto a = fresh("env_a"), b = fresh("env_b"), c = fresh("env_c");
  ASSERT_EQ(run("--out " + a.string() + " field --kind random --n 8", "WAKEPLAN_SEED=7"), 0);
  ASSERT_EQ(run("--seed 7 --out " + b.string() + " field --kind random --n 8"), 0);
  ASSERT_EQ(run("--seed 8 --out " + c.string() + " field --kind random --n 8"), 0);
  EXPECT_EQ(slurp(a / "field.wpf"), slurp(b / "field.wpf"));
  EXPECT_NE(slurp(a / "field.wpf"), slurp(c / "field.wpf"));
  EXPECT_EQ(run("--out " + a.string() + " field --kind random --n 8", "WAKEPLAN_SEED=abc"), 2);
}

TEST(Cli, DumpedConfigReproducesRun) {
  const auto dir = fresh("dump");
  fs::create_directories(dir);
  const std::string opts = " corpus --n 20 --speeds 1.5 --angles 15 --starts 2 --no-timing";
  const std::string cfg = (dir / "config.json").string();
  const std::string cmd = "\"" WAKEPLAN_CLI "\" --seed 21 --dump-config" + opts + " > \"" + cfg + "\"";
  ASSERT_EQ(std::system(cmd.c_str()), 0);
  ASSERT_EQ(run("--seed 21 --out " + (dir / "a").string() + opts), 0);
  ASSERT_EQ(run("--config " + cfg + " --out " + (dir / "b").string() + " corpus"), 0);
  for (const char* f : {"wi_astar/paths.jsonl", "ci_astar/metrics.csv"}) {
    EXPECT_FALSE(slurp(dir / "a" / f).empty());
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  }
}
