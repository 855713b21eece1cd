#include <gtest/gtest.h>

#include <sstream>

#include "negotiate/cli.hpp"
#include "test_support.hpp"

using namespace negotiate;
using namespace negotiate::testing;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("negotiate_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

struct Invocation {
  int code;
  std::string out, err;
};

Invocation invoke(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

fs::path write_config(const fs::path& dir, const std::string& body) {
  const fs::path p = dir / "experiment.cfg";
  write_file_atomic(p, "schema_version = 1\n" + body);
  return p;
}

}  // namespace

TEST(Cli, RunScriptedConfigWritesArtifacts) {
  const fs::path dir = scratch("run");
  const fs::path cfg = write_config(dir, "condition = buyer_informed\nn_trials = 4\nconcurrency = 2\n");
  const auto r = invoke({"run", "--config", cfg.string(), "--out", (dir / "out").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(fs::exists(dir / "out" / "manifest.json"));
  EXPECT_TRUE(fs::exists(dir / "out" / "summary.csv"));
  for (int i = 0; i < 4; ++i) EXPECT_TRUE(fs::exists(dir / "out" / "trials" / ("trial_" + std::to_string(i) + ".jsonl")));
  EXPECT_NE(r.out.find("buyer_informed: 4 run"), std::string::npos);
}

TEST(Cli, RunOverridesApply) {
  const fs::path dir = scratch("overrides");
  const fs::path cfg = write_config(dir, "n_trials = 9\n");
  const auto r = invoke({"run", "--config", cfg.string(), "--out", (dir / "out").string(), "--trials", "2", "--seed",
                         "11", "--condition", "informed_with_plan"});
  ASSERT_EQ(r.code, 0) << r.err;
  const auto m = nlohmann::json::parse(read_text(dir / "out" / "manifest.json"));
  EXPECT_EQ(m["condition"], "informed_with_plan");
  ASSERT_EQ(m["trial_seeds"].size(), 2u);
  EXPECT_EQ(m["trial_seeds"][0].get<std::uint64_t>(), trial_seed(11, 0));
}

TEST(Cli, AnalyzeEmptyDirectoryFails) {
  const fs::path dir = scratch("empty");
  const auto r = invoke({"analyze", "--in", dir.string()});
  EXPECT_EQ(r.code, 2);
  EXPECT_NE(r.err.find("InsufficientData"), std::string::npos);
}

TEST(Cli, AnalyzeAndReportWriteTables) {
  const fs::path dir = scratch("analyze");
  const fs::path cfg = write_config(dir, "condition = all\nn_trials = 3\n");
  ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--out", (dir / "runs").string()}).code, 0);
  const auto a = invoke({"analyze", "--in", (dir / "runs").string(), "--out", (dir / "a").string()});
  ASSERT_EQ(a.code, 0) << a.err;
  EXPECT_TRUE(fs::exists(dir / "a" / "conditions.csv"));
  EXPECT_FALSE(fs::exists(dir / "a" / "fig_utilities.svg"));
  const std::string table = read_text(dir / "a" / "conditions.csv");
  EXPECT_NE(table.find("symmetric_none"), std::string::npos);
  EXPECT_NE(table.find("informed_with_plan"), std::string::npos);

  ASSERT_EQ(invoke({"report", "--in", (dir / "runs").string(), "--out", (dir / "r1").string()}).code, 0);
  ASSERT_EQ(invoke({"report", "--in", (dir / "runs").string(), "--out", (dir / "r2").string()}).code, 0);
  for (const char* f : {"report.md", "fig_utilities.svg", "fig_outcomes.svg", "fig_price_anchor.svg", "fig_accuracy.svg",
                        "fig_alignment.svg", "fig_coupling.svg", "fig_efficiency.svg"}) {
    ASSERT_TRUE(fs::exists(dir / "r1" / f)) << f;
    EXPECT_EQ(read_text(dir / "r1" / f), read_text(dir / "r2" / f)) << f;
  }
}

TEST(Cli, FrontierWritesSvgWithPolylineAndNbs) {
  const fs::path dir = scratch("frontier");
  ojson pair;
  pair["buyer"] = profile_to_json(buyer_sample_profile());
  pair["seller"] = profile_to_json(seller_sample_profile());
  write_file_atomic(dir / "p.json", pair.dump());
  const auto r = invoke({"frontier", "--profiles", (dir / "p.json").string(), "--svg", (dir / "f.svg").string(), "--out",
                         (dir / "f.json").string()});
  ASSERT_EQ(r.code, 0) << r.err;
  const std::string svg = read_text(dir / "f.svg");
  EXPECT_NE(svg.find("<polyline"), std::string::npos);
  EXPECT_NE(svg.find("<polygon"), std::string::npos);
  EXPECT_NE(svg.find(">NBS<"), std::string::npos);
  const auto j = nlohmann::json::parse(read_text(dir / "f.json"));
  const auto curve = compute_frontier(buyer_sample_profile(), seller_sample_profile());
  EXPECT_EQ(j["vertices"].size(), curve.vertices.size());
  EXPECT_DOUBLE_EQ(j["nbs"][0].get<double>(), curve.nbs.buyer);
}

TEST(Cli, ReplayRecordAndTamper) {
  const fs::path dir = scratch("replay");
  const fs::path cfg = write_config(dir, "n_trials = 2\n");
  ASSERT_EQ(invoke({"run", "--config", cfg.string(), "--out", dir.string()}).code, 0);
  const auto ok = invoke({"replay", "--record", dir.string()});
  EXPECT_EQ(ok.code, 0) << ok.out;
  EXPECT_NE(ok.out.find("2/2 records replayed identically"), std::string::npos);

  const fs::path summary = dir / "trials" / "trial_0.json";
  auto j = nlohmann::ordered_json::parse(read_text(summary));
  j["frontier"]["nbs"][0] = 0.123;
  write_file_atomic(summary, j.dump(2));
  const auto bad = invoke({"replay", "--record", summary.string()});
  EXPECT_EQ(bad.code, 2);
  EXPECT_NE(bad.out.find("frontier"), std::string::npos) << bad.out << bad.err;
}

TEST(Cli, PromptsDumpMatchesGoldens) {
  const fs::path dir = scratch("prompts");
  ASSERT_EQ(invoke({"prompts", "--dump", dir.string()}).code, 0);
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(dir)) {
    EXPECT_EQ(read_text(e.path()), golden(e.path().filename().string())) << e.path();
    ++n;
  }
  EXPECT_EQ(n, 11u);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(invoke({}).code, 1);
  EXPECT_EQ(invoke({"bogus"}).code, 1);
  const auto unknown = invoke({"analyze", "--in", "x", "--frobnicate"});
  EXPECT_EQ(unknown.code, 1);
  EXPECT_NE(unknown.err.find("schema_version"), std::string::npos);
  EXPECT_EQ(invoke({"run", "--out", "x"}).code, 1);

  const fs::path dir = scratch("usage");
  const fs::path cfg = write_config(dir, "n_trials = 2\nwidgets = 3\n");
  const auto bad_key = invoke({"run", "--config", cfg.string(), "--out", (dir / "o").string()});
  EXPECT_EQ(bad_key.code, 1);
  EXPECT_NE(bad_key.err.find("widgets"), std::string::npos);
  EXPECT_FALSE(fs::exists(dir / "o"));
  EXPECT_EQ(invoke({"run", "--config", cfg.string(), "--out", "o", "--condition", "nope"}).code, 1);
}
