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

#ifndef GHM_CLI_HPP_
#define GHM_CLI_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ghm/core.hpp"
#include "ghm/trainer.hpp"

namespace ghm::cli {

/// Value written in the log10 column for bins with no examples.
inline constexpr double kEmptyLogSentinel = -99.0;

/// Malformed dump input; the message starts with "line <n>:".
class ParseError : public Error {
 public:
  ParseError(std::size_t line, const std::string& message);
  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

/// Malformed or invalid train config; lists every bad field.
class ConfigError : public Error {
 public:
  explicit ConfigError(std::vector<std::string> problems);
  const std::vector<std::string>& problems() const noexcept { return problems_; }

 private:
  std::vector<std::string> problems_;
};

enum class DumpKind { kClassification, kRegression };

// Dumps hold one record per line as whitespace-separated key=value pairs:
//   classification:  p=0.93 label=1
//   regression:      d=-0.0123
// Blank lines and lines starting with '#' are skipped; unknown keys ignored.
std::vector<ClassificationExample> read_cls_dump(std::istream& in);
std::vector<double> read_reg_dump(std::istream& in);
void write_cls_dump(std::ostream& out, const std::vector<ClassificationExample>& batch);
void write_reg_dump(std::ostream& out, const std::vector<double>& residuals);

/// Gradient norms of a dump: |p - label| or |d| / sqrt(d^2 + mu^2).
std::vector<double> read_gradient_norms(std::istream& in, DumpKind kind, double mu);

/// Fixed-precision formatting used by every table (9 significant digits).
std::string format_real(double value);

struct AnalyzeOptions {
  DumpKind kind = DumpKind::kClassification;
  std::size_t bins = 30;
  std::optional<double> epsilon;  // exact-density window, defaults to 1 / bins
  double mu = 0.02;
};

/// Per-bin distribution table:
/// bin,bin_center,count,fraction,log10_fraction,gd_exact,gd_histogram
void analyze(std::istream& in, const AnalyzeOptions& options, std::ostream& out);

enum class CurveLoss { kCE, kFL, kGhmC, kSL1, kASL1, kGhmR };

std::optional<CurveLoss> parse_curve_loss(std::string_view name);
bool is_regression_curve(CurveLoss loss);

struct CurveOptions {
  CurveLoss loss = CurveLoss::kCE;
  std::size_t points = 100;
  double max_abs_d = 2.0;  // regression grid spans (0, max_abs_d)
  std::optional<std::size_t> bins;
  bool use_ema = false;
  double alpha = kDefaultMomentum;
  std::size_t batch_size = 0;  // EMA chunk size over the reference; 0 = whole
  double gamma = kDefaultFocalGamma;
  double alpha_balance = kDefaultFocalAlpha;
  double mu = kDefaultAsl1Mu;
  double delta = kDefaultSmoothL1Delta;
};

/// Harmonizing weight of an arbitrary gradient norm against a reference
/// distribution. Bins without reference examples count as holding one.
class ReferenceWeights {
 public:
  ReferenceWeights(std::span<const double> reference_gs, std::size_t bins, bool use_ema,
                   double alpha, std::size_t batch_size);

  double beta(double g) const;

 private:
  UnitRegionHistogram hist_;
  bool use_ema_;
  double batch_n_;
};

/// Reformulated gradient contribution of one example at grid value x (g for
/// classification losses, |d| for regression losses).
double curve_value(const CurveOptions& options, double x,
                   const ReferenceWeights* reference);

/// Grid table "g,contribution" or "abs_d,contribution". GHM curves require a
/// reference dump.
void curve(const CurveOptions& options, std::istream* reference, std::ostream& out);

enum class Estimator { kNaive, kSorted, kHistogram };

std::optional<Estimator> parse_estimator(std::string_view name);
std::string_view to_string(Estimator estimator);

struct BenchOptions {
  std::vector<std::size_t> sizes = {1000, 10000, 100000};
  std::vector<std::size_t> bins = {30};
  std::vector<Estimator> estimators = {Estimator::kNaive, Estimator::kSorted,
                                       Estimator::kHistogram};
  std::size_t repetitions = 5;
  std::uint64_t seed = 42;
  bool mask_timings = false;  // print '-' instead of seconds
};

struct BenchRow {
  Estimator estimator;
  std::size_t n;
  std::size_t bins;
  std::vector<double> seconds;  // one per repetition
  double median_seconds;
  std::optional<double> speedup_vs_naive;
  std::optional<double> max_abs_diff_vs_naive;  // exact estimators only
};

/// Times each estimator on uniform random norms for every (N, M) pair.
std::vector<BenchRow> run_bench(const BenchOptions& options);

/// Table "estimator,n,bins,repetition,seconds,speedup_vs_naive,max_abs_diff_vs_naive";
/// one row per repetition followed by a "median" row per configuration.
void write_bench(const BenchOptions& options, const std::vector<BenchRow>& rows,
                 std::ostream& out);

enum class TaskKind { kClassification, kRegression };

struct TrainArm {
  std::string name;
  std::string loss;
  GhmConfig ghm;
};

struct TrainConfig {
  TaskKind task = TaskKind::kClassification;
  std::vector<std::uint64_t> seeds = {1};
  ClsDatasetSpec cls_dataset;
  RegDatasetSpec reg_dataset;
  OptimizerConfig optimizer;
  std::vector<TrainArm> arms;
};

/// Parses and validates a JSON config. Throws ConfigError listing every
/// invalid field.
TrainConfig parse_train_config(const std::string& json_text);

struct ArmResult {
  TrainArm arm;
  std::vector<TrainReport> runs;  // one per seed
};

std::vector<ArmResult> run_training(const TrainConfig& config);

/// Writes <arm>_metrics.csv and <arm>_loss.csv per arm plus summary.csv.
void write_training(const TrainConfig& config, const std::vector<ArmResult>& results,
                    const std::filesystem::path& output_dir);

}  // namespace ghm::cli

#endif  // GHM_CLI_HPP_
