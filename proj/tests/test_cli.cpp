#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "burrjoint/cli.hpp"
#include "test_support.hpp"

namespace fs = std::filesystem;
using namespace burrjoint;

namespace {

int run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "burrjoint");
  std::vector<char*> argv;
  for (auto& a : args) argv.push_back(a.data());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("burrjoint_cli_test_" + name);
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string data_file(const std::string& name) { return std::string(BURRJOINT_SOURCE_DIR) + "/data/" + name; }

}  // namespace

TEST(Cli, FitWritesTablesWithConfigHeader) {
  const auto out = scratch("fit");
  EXPECT_EQ(run_cli({"fit", "--data", data_file("fluid_joint_r10.csv"), "--r", "5", "--D", "2000", "--seed", "17",
                     "--theta0", "0.6,3.0,0.57,1.9", "--out", out.string()}),
            cli::kOk);
  for (const char* name : {"estimates.csv", "intervals.csv", "shrinkage.csv", "pretest.csv"}) {
    ASSERT_TRUE(fs::exists(out / name)) << name;
    EXPECT_EQ(slurp(out / name).rfind("# config: ", 0), 0u) << name;
  }
  const auto summary = cli::json::parse(slurp(out / "summary.json"));
  EXPECT_EQ(summary["config"]["seed"].get<int>(), 17);
  EXPECT_EQ(summary["config"]["r"].get<int>(), 5);
}

TEST(Cli, JsonFormatWritesOneReport) {
  const auto out = scratch("json");
  EXPECT_EQ(run_cli({"fit", "--data", data_file("fluid_joint_r10.csv"), "--D", "500", "--format", "json", "--out",
                     out.string()}),
            cli::kOk);
  const auto report = cli::json::parse(slurp(out / "report.json"));
  EXPECT_TRUE(report.contains("config"));
  EXPECT_TRUE(report.contains("estimates"));
}

TEST(Cli, PredictReportsIntervalsThatContainPoints) {
  const auto out = scratch("predict");
  EXPECT_EQ(run_cli({"predict", "--data", data_file("fluid_joint_r10.csv"), "--r", "5", "--j", "1", "--D", "2000",
                     "--out", out.string()}),
            cli::kOk);
  ASSERT_TRUE(fs::exists(out / "predictions.csv"));
  ASSERT_TRUE(fs::exists(out / "prediction_intervals.csv"));
  const auto summary = cli::json::parse(slurp(out / "summary.json"));
  for (const auto& c : summary["checks"]) EXPECT_TRUE(c["ok"].get<bool>()) << c.dump();
}

TEST(Cli, InputErrorsExitWithTwo) {
  const auto out = scratch("errors");
  EXPECT_EQ(run_cli({"fit", "--bogus"}), cli::kInputError);
  EXPECT_EQ(run_cli({"fit", "--data", (out / "missing.csv").string()}), cli::kInputError);
  EXPECT_EQ(run_cli({"fit", "--data", data_file("fluid_joint_r10.csv"), "--level", "1.5"}), cli::kInputError);
  // ten units remain after ten failures, so the eleventh is not observable
  EXPECT_EQ(run_cli({"predict", "--data", data_file("fluid_joint_r10.csv"), "--j", "11", "--D", "200", "--out",
                     out.string()}),
            cli::kInputError);
  EXPECT_EQ(run_cli({}), cli::kInputError);
}

TEST(Cli, SimulateThenFitReadsSizesFromHeader) {
  const auto out = scratch("simulate");
  const std::string csv = (out / "sample.csv").string();
  EXPECT_EQ(run_cli({"simulate", "--m", "15", "--n", "12", "--r", "20", "--seed", "3", "--out", csv}), cli::kOk);
  EXPECT_EQ(slurp(csv).rfind("# config: ", 0), 0u);
  EXPECT_EQ(run_cli({"fit", "--data", csv, "--D", "300", "--out", (out / "fit").string()}), cli::kOk);
  const auto summary = cli::json::parse(slurp(out / "fit" / "summary.json"));
  EXPECT_EQ(summary["config"]["m"].get<int>(), 15);
  EXPECT_EQ(summary["config"]["n"].get<int>(), 12);
}

TEST(Cli, StudyPartialFailureExitsWithFour) {
  // tiny designs with very few draws make some weights degenerate
  const auto out = scratch("study");
  const auto cfg_path = out / "study.json";
  std::ofstream(cfg_path) << R"({"designs": [[4, 4, 3]], "n_s": 40, "D": 5, "seed": 5, "predict_j": [1]})";
  const int code = run_cli({"study", "--config", cfg_path.string(), "--out", (out / "res").string()});
  EXPECT_TRUE(code == cli::kPartialStudy || code == cli::kOk);
  const auto summary = cli::json::parse(slurp(out / "res" / "summary.json"));
  const int failures = summary["summary"]["total_failures"].get<int>();
  EXPECT_EQ(code, failures > 0 ? cli::kPartialStudy : cli::kOk);
  EXPECT_EQ(summary["config"]["seed"].get<int>(), 5);
}

TEST(Cli, StudyIsReproducibleAcrossThreadCounts) {
  const auto out = scratch("study_threads");
  const auto cfg_path = out / "study.json";
  std::ofstream(cfg_path) << R"({"designs": [[10, 10, 12]], "n_s": 6, "D": 200, "seed": 9, "predict_j": [1]})";
  run_cli({"study", "--config", cfg_path.string(), "--threads", "1", "--out", (out / "a").string()});
  run_cli({"study", "--config", cfg_path.string(), "--threads", "3", "--out", (out / "b").string()});
  for (const char* name : {"estimates_em.csv", "intervals.csv", "predictions.csv"}) {
    std::string a = slurp(out / "a" / name), b = slurp(out / "b" / name);
    // the config line records the thread count
    a = a.substr(a.find('\n'));
    b = b.substr(b.find('\n'));
    EXPECT_EQ(a, b) << name;
  }
}
