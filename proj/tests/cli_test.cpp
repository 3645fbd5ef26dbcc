// Copyright 2026 The GHM Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ghm/cli.hpp"

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "ghm/synthetic.hpp"
#include "golden.hpp"

namespace ghm::cli {
namespace {

namespace fs = std::filesystem;

const fs::path kDataDir = GHM_TEST_DATA_DIR;
const std::string kCli = GHM_CLI_PATH;

using golden::slurp;

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    std::vector<std::string> cells;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

fs::path scratch_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("ghm_cli_test_" + name);
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int run_cli(const std::string& args, const fs::path& err) {
  return golden::run_cli(kCli, args, err);
}

TEST(DumpTest, ReadsRecordsSkippingCommentsAndBlanks) {
  std::istringstream in("# header\np=0.9 label=1\n\n  p=0.25\tlabel=0 extra=7\n");
  const auto batch = read_cls_dump(in);
  ASSERT_EQ(batch.size(), 2u);
  EXPECT_EQ(batch[1].p, 0.25);
  EXPECT_EQ(batch[1].label, 0);
}

TEST(DumpTest, ErrorsCarryLineNumbers) {
  std::istringstream bad_number("p=0.5 label=1\np=abc label=0\n");
  try {
    read_cls_dump(bad_number);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
  std::istringstream missing("p=0.5 label=1\n\np=0.5\n");
  try {
    read_cls_dump(missing);
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 3u);
  }
  std::istringstream bad_p("p=1.5 label=1\n");
  EXPECT_THROW(read_cls_dump(bad_p), ParseError);
  std::istringstream bad_d("d=1e9999\n");
  EXPECT_THROW(read_reg_dump(bad_d), Error);
}

TEST(DumpTest, EmptyInputHasNoRecords) {
  std::istringstream empty("");
  try {
    read_cls_dump(empty);
    FAIL();
  } catch (const Error& e) {
    EXPECT_STREQ(e.what(), "no records");
  }
  std::istringstream only_comments("# nothing\n\n");
  EXPECT_THROW(read_reg_dump(only_comments), Error);
}

TEST(DumpTest, WriteThenReadPreservesValues) {
  const auto batch = heavy_tailed_classification(200, 3);
  std::stringstream buf;
  write_cls_dump(buf, batch);
  const auto back = read_cls_dump(buf);
  ASSERT_EQ(back.size(), batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    EXPECT_EQ(back[i].p, batch[i].p);
    EXPECT_EQ(back[i].label, batch[i].label);
  }
}

TEST(AnalyzeTest, HandBinnedSmallDump) {
  std::istringstream in("p=0.9 label=1\np=0.3 label=0\np=0.5 label=1\n");
  std::ostringstream out;
  analyze(in, {DumpKind::kClassification, 10, std::nullopt, 0.02}, out);
  const auto rows = parse_csv(out.str());
  ASSERT_EQ(rows.size(), 11u);
  std::vector<int> counts;
  for (std::size_t j = 1; j < rows.size(); ++j) counts.push_back(std::stoi(rows[j][2]));
  EXPECT_EQ(counts, (std::vector<int>{0, 1, 0, 1, 0, 1, 0, 0, 0, 0}));
  EXPECT_EQ(rows[1][4], "-99");  // empty-bin sentinel
}

TEST(AnalyzeTest, CountsSumToRecordCount) {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto ds = heavy_tailed_residuals(137 + seed * 50, seed);
    std::stringstream dump;
    write_reg_dump(dump, ds);
    std::ostringstream out;
    analyze(dump, {DumpKind::kRegression, 7, std::nullopt, 0.02}, out);
    const auto rows = parse_csv(out.str());
    long total = 0;
    for (std::size_t j = 1; j < rows.size(); ++j) total += std::stol(rows[j][2]);
    EXPECT_EQ(total, static_cast<long>(ds.size()));
  }
}

TEST(AnalyzeTest, HeavyTailedProfileFallsThenRises) {
  std::ifstream in(kDataDir / "heavy_tailed_cls.txt");
  std::ostringstream out;
  analyze(in, {DumpKind::kClassification, 30, std::nullopt, 0.02}, out);
  const auto rows = parse_csv(out.str());
  std::vector<double> fraction;
  for (std::size_t j = 1; j < rows.size(); ++j) fraction.push_back(std::stod(rows[j][3]));
  // Steep decay over the first bins, then an uptick in the top bin.
  for (std::size_t j = 0; j + 1 < 5; ++j) EXPECT_GT(fraction[j], fraction[j + 1]);
  EXPECT_GT(fraction.back(), 10.0 * fraction[fraction.size() / 2]);
  EXPECT_GT(fraction.front(), fraction.back());
}

TEST(CurveTest, SpotValues) {
  CurveOptions ce;
  EXPECT_EQ(curve_value(ce, 0.4, nullptr), 0.4);
  CurveOptions asl1;
  asl1.loss = CurveLoss::kASL1;
  EXPECT_NEAR(curve_value(asl1, 0.02, nullptr), 0.70711, 1e-5);
  CurveOptions sl1;
  sl1.loss = CurveLoss::kSL1;
  EXPECT_EQ(curve_value(sl1, 1.5, nullptr), 1.0);
  CurveOptions fl;
  fl.loss = CurveLoss::kFL;
  EXPECT_LT(curve_value(fl, 0.1, nullptr), 0.1);
}

TEST(CurveTest, HarmonizedCurvesNeedReference) {
  CurveOptions ghm;
  ghm.loss = CurveLoss::kGhmC;
  EXPECT_THROW(curve_value(ghm, 0.5, nullptr), Error);
  std::ostringstream out;
  EXPECT_THROW(curve(ghm, nullptr, out), Error);
}

TEST(CurveTest, GhmCBelowCeAtExtremesAboveInMiddle) {
  std::ifstream in(kDataDir / "heavy_tailed_cls.txt");
  CurveOptions options;
  options.loss = CurveLoss::kGhmC;
  options.points = 50;
  std::ostringstream out;
  curve(options, &in, out);
  const auto rows = parse_csv(out.str());
  ASSERT_EQ(rows.size(), 51u);
  const auto g = [&](std::size_t k) { return std::stod(rows[k + 1][0]); };
  const auto y = [&](std::size_t k) { return std::stod(rows[k + 1][1]); };
  EXPECT_LT(y(0), g(0));
  EXPECT_LT(y(49), g(49));
  EXPECT_GT(y(25), g(25));
}

TEST(CurveTest, GhmRDownWeightsDenseOutlierBin) {
  // Against a reference where outliers dominate the top bin, the harmonized
  // contribution of large residuals falls below the ASL1 one.
  const auto ds = heavy_tailed_residuals(2000, 5, 0.3);
  const auto gs = gradient_norms_reg(ds);
  ReferenceWeights ref(gs, 10, false, 0.75, 0);
  CurveOptions ghm;
  ghm.loss = CurveLoss::kGhmR;
  CurveOptions asl1;
  asl1.loss = CurveLoss::kASL1;
  EXPECT_LT(curve_value(ghm, 2.0, &ref), curve_value(asl1, 2.0, nullptr));
}

TEST(ReferenceWeightsTest, EmptyBinCountsAsOne) {
  const std::vector<double> gs = {0.05, 0.05};
  ReferenceWeights ref(gs, 10, false, 0.75, 0);
  EXPECT_DOUBLE_EQ(ref.beta(0.05), 2.0 / 20.0);
  EXPECT_DOUBLE_EQ(ref.beta(0.95), 2.0 / 10.0);
}

TEST(ReferenceWeightsTest, EmaOverChunks) {
  // Chunks of 2: {0.05, 0.05} then {0.05, 0.95}. S_1 = 0.75*2 + 0.25*1 = 1.75.
  const std::vector<double> gs = {0.05, 0.05, 0.05, 0.95, 0.5};
  ReferenceWeights ref(gs, 10, true, 0.75, 2);
  EXPECT_DOUBLE_EQ(ref.beta(0.05), 2.0 / 17.5);
  EXPECT_DOUBLE_EQ(ref.beta(0.95), 2.0 / 2.5);  // S = 0.25, floored at 10 * 0.25
}

TEST(BenchTest, ExactEstimatorsAgreeAtSmallN) {
  BenchOptions options;
  options.sizes = {100};
  options.bins = {10, 30};
  options.repetitions = 1;
  const auto rows = run_bench(options);
  ASSERT_EQ(rows.size(), 6u);
  for (const auto& row : rows) {
    if (row.estimator != Estimator::kHistogram) {
      ASSERT_TRUE(row.max_abs_diff_vs_naive.has_value());
      EXPECT_EQ(*row.max_abs_diff_vs_naive, 0.0);
    }
    EXPECT_TRUE(row.speedup_vs_naive.has_value());
  }
}

TEST(BenchTest, RejectsBadOptions) {
  BenchOptions options;
  options.repetitions = 0;
  EXPECT_THROW(run_bench(options), Error);
  options = {};
  options.sizes = {0};
  EXPECT_THROW(run_bench(options), Error);
}

TEST(BenchTest, SortedScanPullsAheadAsNGrows) {
  BenchOptions options;
  options.sizes = {1000, 10000, 100000};
  options.estimators = {Estimator::kNaive, Estimator::kSorted};
  options.repetitions = 1;
  const auto rows = run_bench(options);
  std::vector<double> ratio;
  for (const auto& row : rows) {
    if (row.estimator == Estimator::kSorted) ratio.push_back(*row.speedup_vs_naive);
  }
  ASSERT_EQ(ratio.size(), 3u);
  EXPECT_LT(ratio[0], ratio[1]);
  EXPECT_LT(ratio[1], ratio[2]);
}

TEST(TrainConfigTest, ParsesShippedConfigs) {
  const auto cls = parse_train_config(slurp(kDataDir / "../../configs/imbalanced_cls.json"));
  EXPECT_EQ(cls.task, TaskKind::kClassification);
  EXPECT_EQ(cls.seeds.size(), 5u);
  ASSERT_EQ(cls.arms.size(), 3u);
  EXPECT_EQ(cls.arms[2].loss, "GHM-C");
  EXPECT_EQ(cls.arms[2].ghm.bins, 30u);
  const auto reg = parse_train_config(slurp(kDataDir / "../../configs/outlier_reg.json"));
  EXPECT_EQ(reg.task, TaskKind::kRegression);
  EXPECT_EQ(reg.reg_dataset.n_outliers, 200u);
}

TEST(TrainConfigTest, ZeroIterationsIsRejected) {
  try {
    parse_train_config(R"({"task": "classification", "optimizer": {"iterations": 0},
                           "arms": [{"loss": "CE"}]})");
    FAIL();
  } catch (const ConfigError& e) {
    ASSERT_EQ(e.problems().size(), 1u);
    EXPECT_EQ(e.problems()[0], "optimizer.iterations must be > 0");
  }
}

TEST(TrainConfigTest, EnumeratesEveryProblem) {
  try {
    parse_train_config(R"({"task": "classification",
                           "optimizer": {"iterations": 0, "learning_rate": -1, "bogus": 1},
                           "arms": [{"name": "a", "loss": "SL1"}, {"name": "a", "loss": "CE", "bins": 0}]})");
    FAIL();
  } catch (const ConfigError& e) {
    const auto& p = e.problems();
    EXPECT_EQ(p.size(), 6u);
    const auto has = [&](const std::string& s) {
      return std::find(p.begin(), p.end(), s) != p.end();
    };
    EXPECT_TRUE(has("optimizer.bogus is not a known field"));
    EXPECT_TRUE(has("optimizer.learning_rate must be > 0"));
    EXPECT_TRUE(has("optimizer.iterations must be > 0"));
    EXPECT_TRUE(has("arms[0].loss must be one of CE, FL, GHM-C"));
    EXPECT_TRUE(has("arms[1].name 'a' is used twice"));
    EXPECT_TRUE(has("arms[1].bins must be > 0"));
  }
  EXPECT_THROW(parse_train_config("{not json"), ConfigError);
  EXPECT_THROW(parse_train_config(R"({"task": "detection", "arms": [{"loss": "CE"}]})"),
               ConfigError);
}

TEST(TrainCommandTest, SingleRegionArmMatchesCrossEntropyFiles) {
  const auto config = parse_train_config(slurp(kDataDir / "single_region.json"));
  const auto dir = scratch_dir("single_region");
  write_training(config, run_training(config), dir);
  EXPECT_EQ(slurp(dir / "ce_metrics.csv"), slurp(dir / "ghmc_m1_metrics.csv"));
  EXPECT_EQ(slurp(dir / "ce_loss.csv"), slurp(dir / "ghmc_m1_loss.csv"));
  EXPECT_TRUE(fs::exists(dir / "ghmc_m1_weights.csv"));
}

TEST(GoldenTest, OutputsMatchCommittedFiles) {
  const auto outcome = golden::check_all(kCli, kDataDir, scratch_dir("golden"));
  EXPECT_EQ(outcome.cases, 14u);
  for (const auto& failure : outcome.failures) ADD_FAILURE() << failure;
}

TEST(CliErrorTest, FailuresExitNonZeroWithOneLine) {
  const auto dir = scratch_dir("errors");
  const auto err = dir / "stderr.txt";
  std::ofstream(dir / "empty.txt").close();
  EXPECT_EQ(run_cli("analyze --input " + (dir / "empty.txt").string(), err), 1);
  EXPECT_EQ(slurp(err), "error: no records\n");

  std::ofstream(dir / "bad.json") << R"({"task": "classification", "optimizer": {"iterations": 0},
    "arms": [{"loss": "CE"}]})";
  EXPECT_EQ(run_cli("train --input " + (dir / "bad.json").string() + " --output " +
                        (dir / "out").string(),
                    err),
            1);
  EXPECT_EQ(slurp(err), "error: invalid config: optimizer.iterations must be > 0\n");

  EXPECT_EQ(run_cli("curve --loss GHM-C", err), 1);
  EXPECT_NE(run_cli("curve --loss XYZ", err), 0);
  EXPECT_NE(run_cli("frobnicate", err), 0);
  const auto msg = slurp(err);
  EXPECT_EQ(std::count(msg.begin(), msg.end(), '\n'), 1);
}

}  // namespace
}  // namespace ghm::cli
