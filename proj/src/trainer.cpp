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

#include "ghm/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <fmt/core.h>

namespace ghm {
namespace {

void require(bool ok, const char* message) {
  if (!ok) {
    throw Error(message);
  }
}

// Indices of the next mini-batch; reshuffles at every epoch boundary.
class BatchSampler {
 public:
  BatchSampler(std::size_t n, std::size_t batch_size, std::uint64_t seed)
      : order_(n), batch_size_(std::min(batch_size, n)), rng_(make_rng(seed)) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    std::shuffle(order_.begin(), order_.end(), rng_);
  }

  std::span<const std::size_t> next() {
    if (cursor_ + batch_size_ > order_.size()) {
      std::shuffle(order_.begin(), order_.end(), rng_);
      cursor_ = 0;
    }
    std::span<const std::size_t> batch(order_.data() + cursor_, batch_size_);
    cursor_ += batch_size_;
    return batch;
  }

 private:
  std::vector<std::size_t> order_;
  std::size_t batch_size_;
  std::size_t cursor_ = 0;
  Rng rng_;
};

WeightTraceEntry trace_weights(std::size_t iteration, std::span<const double> gs,
                               std::span<const double> weights, std::size_t bins) {
  WeightTraceEntry entry{iteration, std::vector<std::size_t>(bins, 0),
                         std::vector<double>(bins, 0.0)};
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const std::size_t j = bin_index(gs[i], bins);
    ++entry.counts[j];
    entry.mean_beta[j] += weights[i];
  }
  for (std::size_t j = 0; j < bins; ++j) {
    if (entry.counts[j] > 0) {
      entry.mean_beta[j] /= static_cast<double>(entry.counts[j]);
    }
  }
  return entry;
}

void check_finite(double loss, std::size_t iteration) {
  if (!std::isfinite(loss)) {
    throw TrainingError(fmt::format("training diverged at iteration {}", iteration));
  }
}

}  // namespace

void ClsDatasetSpec::validate() const {
  require(n_easy_neg + n_pos + n_outliers >= 2, "dataset needs at least two points");
  require(noise_scale >= 0.0 && std::isfinite(noise_scale), "noise_scale must be >= 0");
  require(std::isfinite(cluster_separation), "cluster_separation must be finite");
}

void RegDatasetSpec::validate() const {
  require(n_inliers + n_outliers >= 2, "dataset needs at least two points");
  require(inlier_noise >= 0.0 && std::isfinite(inlier_noise), "inlier_noise must be >= 0");
  require(outlier_scale >= 0.0 && std::isfinite(outlier_scale),
          "outlier_scale must be >= 0");
  require(std::isfinite(slope), "slope must be finite");
}

ClsDataset gen_cls_dataset(const ClsDatasetSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t n = spec.n_easy_neg + spec.n_pos + spec.n_outliers;
  const double offset = spec.cluster_separation / std::sqrt(2.0);

  ClsDataset data;
  data.features.resize(static_cast<Eigen::Index>(n), 2);
  data.labels.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool in_positive_cluster = i >= spec.n_easy_neg;
    const double centre = in_positive_cluster ? offset : 0.0;
    const auto row = static_cast<Eigen::Index>(i);
    data.features(row, 0) = centre + spec.noise_scale * noise(rng);
    data.features(row, 1) = centre + spec.noise_scale * noise(rng);
    data.labels[i] = (in_positive_cluster && i < spec.n_easy_neg + spec.n_pos) ? 1 : 0;
  }
  return data;
}

RegDataset gen_reg_dataset(const RegDatasetSpec& spec) {
  spec.validate();
  Rng rng = make_rng(spec.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 1.0);
  const std::size_t n = spec.n_inliers + spec.n_outliers;

  RegDataset data;
  data.x.resize(static_cast<Eigen::Index>(n));
  data.y.resize(static_cast<Eigen::Index>(n));
  data.is_outlier.resize(n);
  data.true_slope = spec.slope;
  for (std::size_t i = 0; i < n; ++i) {
    const auto k = static_cast<Eigen::Index>(i);
    const bool outlier = i >= spec.n_inliers;
    data.x(k) = unit(rng);
    const double clean = spec.slope * data.x(k);
    data.y(k) = outlier ? clean + spec.outlier_scale * (0.5 + 0.5 * unit(rng))
                        : clean + spec.inlier_noise * noise(rng);
    data.is_outlier[i] = outlier;
  }
  return data;
}

void OptimizerConfig::validate() const {
  require(learning_rate > 0.0 && std::isfinite(learning_rate), "learning_rate must be > 0");
  require(momentum >= 0.0 && momentum < 1.0, "momentum must lie in [0, 1)");
  require(weight_decay >= 0.0 && std::isfinite(weight_decay), "weight_decay must be >= 0");
  require(iterations > 0, "iterations must be > 0");
  require(batch_size > 0, "batch_size must be > 0");
}

SgdMomentum::SgdMomentum(const OptimizerConfig& config, Eigen::Index num_params)
    : learning_rate_(config.learning_rate),
      momentum_(config.momentum),
      weight_decay_(config.weight_decay),
      velocity_(Eigen::VectorXd::Zero(num_params)) {}

void SgdMomentum::step(Eigen::Ref<Eigen::VectorXd> params, const Eigen::VectorXd& grad) {
  velocity_ = momentum_ * velocity_ + grad + weight_decay_ * params;
  params -= learning_rate_ * velocity_;
}

std::string_view to_string(ClsLossKind kind) {
  switch (kind) {
    case ClsLossKind::kCE: return "CE";
    case ClsLossKind::kFocal: return "FL";
    case ClsLossKind::kGhmC: return "GHM-C";
  }
  return "?";
}

std::string_view to_string(RegLossKind kind) {
  switch (kind) {
    case RegLossKind::kSL1: return "SL1";
    case RegLossKind::kASL1: return "ASL1";
    case RegLossKind::kGhmR: return "GHM-R";
  }
  return "?";
}

std::optional<ClsLossKind> parse_cls_loss(std::string_view name) {
  for (auto kind : {ClsLossKind::kCE, ClsLossKind::kFocal, ClsLossKind::kGhmC}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

std::optional<RegLossKind> parse_reg_loss(std::string_view name) {
  for (auto kind : {RegLossKind::kSL1, RegLossKind::kASL1, RegLossKind::kGhmR}) {
    if (name == to_string(kind)) return kind;
  }
  return std::nullopt;
}

void GhmConfig::validate() const {
  require(bins > 0, "bins must be > 0");
  require(reg_bins > 0, "reg_bins must be > 0");
  require(momentum >= 0.0 && momentum < 1.0, "EMA alpha must lie in [0, 1)");
  require(gamma >= 0.0, "gamma must be >= 0");
  require(alpha_balance > 0.0 && alpha_balance <= 1.0, "alpha_balance must lie in (0, 1]");
  require(mu > 0.0, "mu must be > 0");
  require(delta > 0.0, "delta must be > 0");
}

ClassificationMetrics evaluate_classifier(const ClsDataset& data,
                                          const Eigen::VectorXd& params) {
  const Eigen::VectorXd logits = data.features * params.head<2>() +
                                 Eigen::VectorXd::Constant(data.features.rows(), params(2));
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const bool predicted = logits(static_cast<Eigen::Index>(i)) >= 0.0;
    const bool actual = data.labels[i] == 1;
    tp += (predicted && actual) ? 1 : 0;
    fp += (predicted && !actual) ? 1 : 0;
    fn += (!predicted && actual) ? 1 : 0;
  }
  ClassificationMetrics m;
  m.precision = tp + fp > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fp) : 0.0;
  m.recall = tp + fn > 0 ? static_cast<double>(tp) / static_cast<double>(tp + fn) : 0.0;
  m.f1 = m.precision + m.recall > 0.0
             ? 2.0 * m.precision * m.recall / (m.precision + m.recall)
             : 0.0;
  return m;
}

double median_inlier_error(const RegDataset& data, double slope) {
  std::vector<double> errors;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.is_outlier[i]) {
      const auto k = static_cast<Eigen::Index>(i);
      errors.push_back(std::abs(slope * data.x(k) - data.y(k)));
    }
  }
  if (errors.empty()) {
    return 0.0;
  }
  const auto mid = errors.begin() + static_cast<std::ptrdiff_t>(errors.size() / 2);
  std::nth_element(errors.begin(), mid, errors.end());
  if (errors.size() % 2 == 1) {
    return *mid;
  }
  const double upper = *mid;
  const double lower = *std::max_element(errors.begin(), mid);
  return 0.5 * (lower + upper);
}

TrainReport train_classifier(const ClsDataset& data, ClsLossKind kind,
                             const OptimizerConfig& opt, const GhmConfig& ghm,
                             std::uint64_t seed) {
  opt.validate();
  ghm.validate();
  require(data.size() >= 2, "classification dataset needs at least two points");

  Eigen::VectorXd params = Eigen::VectorXd::Zero(3);
  SgdMomentum sgd(opt, params.size());
  BatchSampler sampler(data.size(), opt.batch_size, seed);
  GhmCLoss ghm_loss(ghm.bins, ghm.use_ema, ghm.momentum);

  TrainReport report;
  report.loss_curve.reserve(opt.iterations);
  ClassificationBatch batch;
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    const auto idx = sampler.next();
    batch.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(idx[i]);
      const double x = data.features.row(row).dot(params.head<2>()) + params(2);
      batch[i] = {sigmoid(x), data.labels[idx[i]]};
    }

    HarmonizedBatchResult result;
    switch (kind) {
      case ClsLossKind::kCE: result = ce_batch(batch); break;
      case ClsLossKind::kFocal: result = focal_batch(batch, ghm.gamma, ghm.alpha_balance); break;
      case ClsLossKind::kGhmC: result = ghm_loss(batch); break;
    }
    check_finite(result.total_loss, it);
    report.loss_curve.push_back(result.total_loss);

    if (kind == ClsLossKind::kGhmC && ghm.trace_every > 0 && it % ghm.trace_every == 0) {
      report.weight_trace.push_back(
          trace_weights(it, gradient_norms_cls(batch), result.weights, ghm.bins));
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(3);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto row = static_cast<Eigen::Index>(idx[i]);
      grad.head<2>() += result.per_example_grad[i] * data.features.row(row).transpose();
      grad(2) += result.per_example_grad[i];
    }
    sgd.step(params, grad);
    if (!params.allFinite()) {
      throw TrainingError(fmt::format("parameters diverged at iteration {}", it));
    }
  }
  report.classification = evaluate_classifier(data, params);
  report.params = std::move(params);
  return report;
}

TrainReport train_regressor(const RegDataset& data, RegLossKind kind,
                            const OptimizerConfig& opt, const GhmConfig& ghm,
                            std::uint64_t seed) {
  opt.validate();
  ghm.validate();
  require(data.size() >= 2, "regression dataset needs at least two points");

  Eigen::VectorXd params = Eigen::VectorXd::Zero(1);
  SgdMomentum sgd(opt, params.size());
  BatchSampler sampler(data.size(), opt.batch_size, seed);
  GhmRLoss ghm_loss(ghm.mu, ghm.reg_bins, ghm.use_ema, ghm.momentum);

  TrainReport report;
  report.loss_curve.reserve(opt.iterations);
  std::vector<RegressionResidual> residuals;
  for (std::size_t it = 0; it < opt.iterations; ++it) {
    const auto idx = sampler.next();
    residuals.resize(idx.size());
    for (std::size_t i = 0; i < idx.size(); ++i) {
      const auto k = static_cast<Eigen::Index>(idx[i]);
      residuals[i] = params(0) * data.x(k) - data.y(k);
    }

    HarmonizedBatchResult result;
    switch (kind) {
      case RegLossKind::kSL1: result = sl1_batch(residuals, ghm.delta); break;
      case RegLossKind::kASL1: result = asl1_batch(residuals, ghm.mu); break;
      case RegLossKind::kGhmR: result = ghm_loss(residuals); break;
    }
    check_finite(result.total_loss, it);
    report.loss_curve.push_back(result.total_loss);

    if (kind == RegLossKind::kGhmR && ghm.trace_every > 0 && it % ghm.trace_every == 0) {
      report.weight_trace.push_back(trace_weights(
          it, gradient_norms_reg(residuals, ghm.mu), result.weights, ghm.reg_bins));
    }

    Eigen::VectorXd grad = Eigen::VectorXd::Zero(1);
    for (std::size_t i = 0; i < idx.size(); ++i) {
      grad(0) += result.per_example_grad[i] * data.x(static_cast<Eigen::Index>(idx[i]));
    }
    sgd.step(params, grad);
    if (!params.allFinite()) {
      throw TrainingError(fmt::format("parameters diverged at iteration {}", it));
    }
  }
  report.median_abs_error = median_inlier_error(data, params(0));
  report.params = std::move(params);
  return report;
}

}  // namespace ghm
