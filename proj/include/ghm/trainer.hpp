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

#ifndef GHM_TRAINER_HPP_
#define GHM_TRAINER_HPP_

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ghm/cls_loss.hpp"
#include "ghm/core.hpp"
#include "ghm/density.hpp"
#include "ghm/reg_loss.hpp"

namespace ghm {

/// Raised when a training loss becomes non-finite.
class TrainingError : public Error {
 public:
  using Error::Error;
};

/// Two Gaussian clusters in the plane: a large easy negative cluster at the
/// origin and a small positive cluster `cluster_separation` away along the
/// diagonal. Outliers are sampled from the positive cluster but labeled 0.
struct ClsDatasetSpec {
  std::size_t n_easy_neg = 10000;
  std::size_t n_pos = 100;
  std::size_t n_outliers = 30;
  double cluster_separation = 4.0;
  double noise_scale = 1.0;
  std::uint64_t seed = 7;

  void validate() const;
};

struct ClsDataset {
  Eigen::Matrix<double, Eigen::Dynamic, 2> features;
  std::vector<int> labels;

  std::size_t size() const { return labels.size(); }
};

/// Scalar regression y = slope * x, x uniform in [0, 1). Inliers get Gaussian
/// noise; outliers get a one-sided offset uniform in
/// [outlier_scale / 2, outlier_scale].
struct RegDatasetSpec {
  std::size_t n_inliers = 800;
  std::size_t n_outliers = 200;
  double inlier_noise = 0.02;
  double outlier_scale = 2.0;
  double slope = 1.5;
  std::uint64_t seed = 1;

  void validate() const;
};

struct RegDataset {
  Eigen::VectorXd x;
  Eigen::VectorXd y;
  std::vector<bool> is_outlier;
  double true_slope = 0.0;

  std::size_t size() const { return static_cast<std::size_t>(x.size()); }
};

ClsDataset gen_cls_dataset(const ClsDatasetSpec& spec);
RegDataset gen_reg_dataset(const RegDatasetSpec& spec);

struct OptimizerConfig {
  double learning_rate = 0.1;
  double momentum = 0.9;
  double weight_decay = 1e-4;
  std::size_t iterations = 500;
  std::size_t batch_size = 256;

  void validate() const;
};

/// Classical momentum SGD. Weight decay is added to the gradient:
///   v <- momentum * v + (grad + weight_decay * param)
///   param <- param - learning_rate * v
class SgdMomentum {
 public:
  SgdMomentum(const OptimizerConfig& config, Eigen::Index num_params);

  void step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad);

  const Eigen::VectorXd& velocity() const noexcept { return velocity_; }

 private:
  double learning_rate_;
  double momentum_;
  double weight_decay_;
  Eigen::VectorXd velocity_;
};

enum class ClsLossKind { kCE, kFocal, kGhmC };
enum class RegLossKind { kSL1, kASL1, kGhmR };

std::string_view to_string(ClsLossKind kind);
std::string_view to_string(RegLossKind kind);
std::optional<ClsLossKind> parse_cls_loss(std::string_view name);
std::optional<RegLossKind> parse_reg_loss(std::string_view name);

/// Loss hyper-parameters shared by the training arms.
struct GhmConfig {
  std::size_t bins = kDefaultClassificationBins;
  std::size_t reg_bins = kDefaultRegressionBins;
  bool use_ema = false;
  double momentum = kDefaultMomentum;
  double gamma = kDefaultFocalGamma;
  double alpha_balance = kDefaultFocalAlpha;
  double mu = kDefaultAsl1Mu;
  double delta = kDefaultSmoothL1Delta;
  std::size_t trace_every = 0;  // 0 disables the weight trace

  void validate() const;
};

struct ClassificationMetrics {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Per-bin beta statistics of one logged iteration.
struct WeightTraceEntry {
  std::size_t iteration = 0;
  std::vector<std::size_t> counts;
  std::vector<double> mean_beta;  // 0 for empty bins
};

struct TrainReport {
  std::vector<double> loss_curve;
  Eigen::VectorXd params;
  std::optional<ClassificationMetrics> classification;
  std::optional<double> median_abs_error;  // over inliers, regression only
  std::vector<WeightTraceEntry> weight_trace;
};

/// Precision, recall and F1 of the positive class at probability 0.5.
ClassificationMetrics evaluate_classifier(const ClsDataset& data,
                                          const Eigen::VectorXd& params);

/// Median |slope * x - y| over the inliers.
double median_inlier_error(const RegDataset& data, double slope);

/// Logistic regression (two weights and a bias) trained with analytic
/// gradients. Mini-batches walk a shuffled permutation that is reshuffled
/// from `seed` every epoch.
TrainReport train_classifier(const ClsDataset& data, ClsLossKind kind,
                             const OptimizerConfig& opt, const GhmConfig& ghm,
                             std::uint64_t seed);

/// Fits y = w * x (no intercept) on the chosen residual loss.
TrainReport train_regressor(const RegDataset& data, RegLossKind kind,
                            const OptimizerConfig& opt, const GhmConfig& ghm,
                            std::uint64_t seed);

}  // namespace ghm

#endif  // GHM_TRAINER_HPP_
