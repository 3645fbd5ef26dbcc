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

#ifndef GHM_CLS_LOSS_HPP_
#define GHM_CLS_LOSS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "ghm/core.hpp"
#include "ghm/density.hpp"

namespace ghm {

/// Probabilities are floored at this value before taking logarithms.
inline constexpr double kMinProbability = 1e-12;
inline constexpr double kDefaultFocalGamma = 2.0;
inline constexpr double kDefaultFocalAlpha = 0.25;

/// Binary cross entropy. Exactly zero for a perfect prediction.
double ce_loss(const ClassificationExample& ex);

/// dCE/dx for p = sigmoid(x): p - label. Uses the unclamped probability.
double ce_grad_logit(const ClassificationExample& ex);

/// |p - label|, the magnitude of ce_grad_logit.
double gradient_norm_cls(const ClassificationExample& ex);

std::vector<double> gradient_norms_cls(std::span<const ClassificationExample> batch);

struct LossAndGrad {
  double loss = 0.0;
  double grad = 0.0;  // with respect to the logit
};

/// -alpha * (1 - p_t)^gamma * log(p_t), with p_t the probability assigned to
/// the true class. alpha scales both classes alike.
LossAndGrad focal_loss(const ClassificationExample& ex, double gamma = kDefaultFocalGamma,
                       double alpha_balance = kDefaultFocalAlpha);

/// Plain mean cross entropy, in the same result shape as the harmonized
/// losses (all weights 1).
HarmonizedBatchResult ce_batch(std::span<const ClassificationExample> batch);

/// Mean focal loss over the batch.
HarmonizedBatchResult focal_batch(std::span<const ClassificationExample> batch,
                                  double gamma = kDefaultFocalGamma,
                                  double alpha_balance = kDefaultFocalAlpha);

/// GHM-C with the exact density over an epsilon window. The weights are
/// treated as constants in the returned gradients.
HarmonizedBatchResult ghm_c_exact(std::span<const ClassificationExample> batch,
                                  double epsilon,
                                  DensityKind estimator = DensityKind::kExactSorted);

/// GHM-C with unit-region density read from a prepared histogram: raw counts
/// must already hold this batch, or the EMA must be initialized.
HarmonizedBatchResult ghm_c_approx(std::span<const ClassificationExample> batch,
                                   const UnitRegionHistogram& hist, bool use_ema);

/// Stateful GHM-C for training loops. Each call bins the batch, updates the
/// histogram (and its EMA if enabled), then weights the batch with it.
class GhmCLoss {
 public:
  explicit GhmCLoss(std::size_t bins = kDefaultClassificationBins, bool use_ema = false,
                    double momentum = kDefaultMomentum);

  HarmonizedBatchResult operator()(std::span<const ClassificationExample> batch);

  const UnitRegionHistogram& histogram() const noexcept { return hist_; }
  bool use_ema() const noexcept { return use_ema_; }

 private:
  UnitRegionHistogram hist_;
  bool use_ema_;
};

/// Weighted-loss assembly shared by the harmonized losses.
HarmonizedBatchResult weight_batch(std::vector<double> weights,
                                   std::vector<double> losses,
                                   std::span<const double> raw_grads);

}  // namespace ghm

#endif  // GHM_CLS_LOSS_HPP_
