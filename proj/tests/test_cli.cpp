#include <gtest/gtest.h>

#include <set>

#include "promptstrata/hashing.hpp"
#include "promptstrata/recall_table.hpp"
#include "support.hpp"

using namespace promptstrata;
using testing_support::CliResult;
using testing_support::read_text;
using testing_support::run_cli;
using testing_support::TempDir;

namespace fs = std::filesystem;

namespace {

std::string q(const fs::path& p) { return "\"" + p.string() + "\""; }

void make_fixture(const fs::path& dir, int seed = 7, const std::string& extra = "") {
  const auto r = run_cli("fixture --seed " + std::to_string(seed) + " --out " + q(dir) + " " + extra);
  ASSERT_EQ(r.exit_code, 0) << r.err;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> files;
  for (const auto& e : fs::recursive_directory_iterator(root))
    if (e.is_regular_file()) files[fs::relative(e.path(), root).generic_string()] = read_text(e.path());
  return files;
}

nlohmann::json error_json(const CliResult& r) {
  try {
    return nlohmann::json::parse(r.err);
  } catch (const nlohmann::json::parse_error&) {
    ADD_FAILURE() << "stderr is not JSON: " << r.err;
    return {};
  }
}

}  // namespace

TEST(Cli, FixtureThenValidate) {
  TempDir dir("cli_validate");
  make_fixture(dir.path());
  const auto r = run_cli("validate --data " + q(dir.path()) + " --strict");
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto summary = nlohmann::json::parse(r.out);
  EXPECT_TRUE(summary["warnings"].empty());
}

TEST(Cli, ValidateReportsMissingMetadata) {
  TempDir dir("cli_validate_missing");
  make_fixture(dir.path());
  fs::remove(dir / "topics.csv");
  const auto r = run_cli("validate --data " + q(dir.path()));
  EXPECT_EQ(r.exit_code, 2);
  EXPECT_EQ(error_json(r)["error"], "MissingFile");
}

TEST(Cli, EvalRq2SuffixClassHasSixteenCells) {
  TempDir dir("cli_rq2");
  make_fixture(dir / "data");
  const auto r = run_cli("eval --preset rq2 --data " + q(dir / "data") + " --out " + q(dir / "out"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto table =
      RecallTable::from_json(nlohmann::json::parse(read_text(dir / "out" / "tables" / "rq2_suffix_class.json")));
  std::size_t suffix_cells = 0;
  std::set<std::string> groups;
  for (const auto& c : table.cells) {
    if (c.prompt == "default") continue;
    ++suffix_cells;
    groups.insert(c.group.front().second);
  }
  EXPECT_EQ(suffix_cells, 16u);
  EXPECT_EQ(groups, (std::set<std::string>{"Poor", "LowMid", "UpMid", "Rich"}));
  EXPECT_TRUE(fs::exists(dir / "out" / "tables" / "rq2_suffix_class.md"));
  EXPECT_TRUE(fs::exists(dir / "out" / "stats.json"));
}

TEST(Cli, MissingEmbeddingsExitsTwoNamingPath) {
  TempDir dir("cli_missing_emb");
  make_fixture(dir.path());
  fs::remove(dir / "image_embeddings.bin");
  const auto r = run_cli("eval --preset rq2 --data " + q(dir.path()) + " --out " + q(dir / "out"));
  EXPECT_EQ(r.exit_code, 2);
  const auto err = error_json(r);
  EXPECT_EQ(err["error"], "MissingFile");
  EXPECT_EQ(err["exit_code"], 2);
  EXPECT_NE(err["subject"].get<std::string>().find("image_embeddings.bin"), std::string::npos) << r.err;
}

TEST(Cli, DataDirFromEnvironment) {
  TempDir dir("cli_env");
  make_fixture(dir / "data");
  const auto r = run_cli("eval --preset rq3 --out " + q(dir / "out"),
                         "PROMPTSTRATA_DATA_DIR=" + q(dir / "data"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "tables" / "rq3_income.json"));
}

TEST(Cli, BadArgumentsExitThree) {
  EXPECT_EQ(run_cli("eval --preset rq9 --out /tmp/x --data /tmp").exit_code, 3);
  EXPECT_EQ(run_cli("eval --preset rq1 --workers 0 --out /tmp/x --data /tmp").exit_code, 3);
  EXPECT_EQ(run_cli("nonsense").exit_code, 3);
  const auto r = run_cli("eval --preset rq1 --out /tmp/x", "PROMPTSTRATA_DATA_DIR=");
  EXPECT_EQ(r.exit_code, 3);
  EXPECT_EQ(error_json(r)["error"], "BadArgument");
}

TEST(Cli, WorkerCountDoesNotChangeArtifacts) {
  TempDir dir("cli_workers");
  make_fixture(dir / "data", 11, "--dropout 0.2 --subjective-topics 1");
  const auto one = run_cli("eval --preset all --workers 1 --data " + q(dir / "data") + " --out " + q(dir / "w1"));
  const auto eight = run_cli("eval --preset all --workers 8 --data " + q(dir / "data") + " --out " + q(dir / "w8"));
  ASSERT_EQ(one.exit_code, 0) << one.err;
  ASSERT_EQ(eight.exit_code, 0) << eight.err;
  const auto a = tree(dir / "w1");
  const auto b = tree(dir / "w8");
  EXPECT_GT(a.size(), 20u);
  EXPECT_EQ(a, b);
}

TEST(Cli, ManifestHashesReproduce) {
  TempDir dir("cli_manifest");
  make_fixture(dir / "data");
  ASSERT_EQ(run_cli("eval --preset all --data " + q(dir / "data") + " --out " + q(dir / "out")).exit_code, 0);
  const auto manifest = nlohmann::json::parse(read_text(dir / "out" / "manifest.json"));
  ASSERT_FALSE(manifest["outputs"].empty());
  for (const auto& [rel, hash] : manifest["outputs"].items())
    EXPECT_EQ(sha256_file(dir / "out" / rel), hash.get<std::string>()) << rel;
  for (const auto& [role, entry] : manifest["inputs"].items())
    EXPECT_EQ(sha256_file(dir / "data" / entry["file"].get<std::string>()), entry["sha256"].get<std::string>())
        << role;
  EXPECT_EQ(manifest["synonym_hash"].get<std::string>().size(), 64u);

  // a second run from scratch writes the same manifest
  ASSERT_EQ(run_cli("eval --preset all --data " + q(dir / "data") + " --out " + q(dir / "again")).exit_code, 0);
  EXPECT_EQ(read_text(dir / "again" / "manifest.json"), read_text(dir / "out" / "manifest.json"));
}

TEST(Cli, PromptPlanExport) {
  TempDir dir("cli_plan");
  make_fixture(dir / "data");
  const auto r = run_cli("plan --data " + q(dir / "data") + " --families default,country --out " + q(dir / "plan.json"));
  ASSERT_EQ(r.exit_code, 0) << r.err;
  const auto plan = nlohmann::json::parse(read_text(dir / "plan.json"));
  ASSERT_TRUE(plan.is_array());
  // 4 topics x (1 default + 4 countries)
  EXPECT_EQ(plan.size(), 20u);
  for (const auto& v : plan) {
    EXPECT_TRUE(v.contains("key") && v.contains("family") && v.contains("topic_id") && v.contains("text"));
    EXPECT_EQ(v["key"].get<std::string>(), v["family"].get<std::string>() + "|" + v["topic_id"].get<std::string>());
  }
  const auto experiments = run_cli("plan --experiments rq2");
  ASSERT_EQ(experiments.exit_code, 0);
  EXPECT_EQ(nlohmann::json::parse(experiments.out).size(), 3u);
}

TEST(Cli, StatsAndReport) {
  const auto s = run_cli("stats --a 1,2,3,4,5 --b 2,3,4,5,7");
  ASSERT_EQ(s.exit_code, 0) << s.err;
  const auto j = nlohmann::json::parse(s.out);
  EXPECT_EQ(j["w"], 0.0);
  EXPECT_EQ(j["p"], 0.0625);
  const auto same = run_cli("stats --a 1,2,3 --b 1,2,3");
  EXPECT_EQ(same.exit_code, 1);
  EXPECT_EQ(error_json(same)["error"], "AllZeroDifferences");

  TempDir dir("cli_report");
  make_fixture(dir / "data");
  ASSERT_EQ(run_cli("eval --preset rq1 --data " + q(dir / "data") + " --out " + q(dir / "out")).exit_code, 0);
  const auto md = run_cli("report --table " + q(dir / "out" / "tables" / "rq1_heatmap.json") + " --heatmap --format md");
  ASSERT_EQ(md.exit_code, 0) << md.err;
  EXPECT_EQ(md.out, read_text(dir / "out" / "heatmaps" / "rq1_heatmap.md"));
  const auto table = run_cli("report --table " + q(dir / "out" / "tables" / "rq1_income.json") + " --format md");
  EXPECT_EQ(table.out, read_text(dir / "out" / "tables" / "rq1_income.md"));
  const auto tests = run_cli("stats --table " + q(dir / "out" / "tables" / "rq1_heatmap.json"));
  ASSERT_EQ(tests.exit_code, 0) << tests.err;
  EXPECT_EQ(nlohmann::json::parse(tests.out).size(), 3u);
}
