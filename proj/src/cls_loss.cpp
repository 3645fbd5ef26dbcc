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

#include "ghm/cls_loss.hpp"

#include <algorithm>
#include <cmath>

namespace ghm {
namespace {

void check_nonempty(std::span<const ClassificationExample> batch) {
  if (batch.empty()) {
    throw Error("classification batch is empty");
  }
}

}  // namespace

double ce_loss(const ClassificationExample& ex) {
  const double pt = ex.label == 1 ? ex.p : 1.0 - ex.p;
  return -std::log(std::max(pt, kMinProbability));
}

double ce_grad_logit(const ClassificationExample& ex) {
  return ex.p - static_cast<double>(ex.label);
}

double gradient_norm_cls(const ClassificationExample& ex) {
  return std::abs(ce_grad_logit(ex));
}

std::vector<double> gradient_norms_cls(std::span<const ClassificationExample> batch) {
  std::vector<double> gs(batch.size());
  std::transform(batch.begin(), batch.end(), gs.begin(), gradient_norm_cls);
  return gs;
}

LossAndGrad focal_loss(const ClassificationExample& ex, double gamma,
                       double alpha_balance) {
  if (!(gamma >= 0.0)) {
    throw Error("focal gamma must be non-negative");
  }
  if (!(alpha_balance > 0.0 && alpha_balance <= 1.0)) {
    throw Error("focal alpha must lie in (0, 1]");
  }
  const bool positive = ex.label == 1;
  const double pt = positive ? ex.p : 1.0 - ex.p;
  const double hard = 1.0 - pt;
  const double log_pt = std::log(std::max(pt, kMinProbability));
  const double modulator = std::pow(hard, gamma);
  // dp_t/dx = +-p_t(1 - p_t), so
  // dL/dx = +-alpha (1 - p_t)^gamma (gamma p_t log p_t - (1 - p_t)).
  const double sign = positive ? 1.0 : -1.0;
  return {-alpha_balance * modulator * log_pt,
          sign * alpha_balance * modulator * (gamma * pt * log_pt - hard)};
}

HarmonizedBatchResult weight_batch(std::vector<double> weights,
                                   std::vector<double> losses,
                                   std::span<const double> raw_grads) {
  const std::size_t n = losses.size();
  const auto inv_n = 1.0 / static_cast<double>(n);
  HarmonizedBatchResult out;
  out.per_example_grad.resize(n);
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    total += weights[i] * losses[i];
    out.per_example_grad[i] = weights[i] * raw_grads[i] * inv_n;
  }
  out.total_loss = total * inv_n;
  out.weights = std::move(weights);
  out.per_example_loss = std::move(losses);
  return out;
}

namespace {

HarmonizedBatchResult weighted_ce(std::span<const ClassificationExample> batch,
                                  std::vector<double> weights) {
  std::vector<double> losses(batch.size());
  std::vector<double> grads(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    losses[i] = ce_loss(batch[i]);
    grads[i] = ce_grad_logit(batch[i]);
  }
  return weight_batch(std::move(weights), std::move(losses), grads);
}

}  // namespace

HarmonizedBatchResult ce_batch(std::span<const ClassificationExample> batch) {
  check_nonempty(batch);
  return weighted_ce(batch, std::vector<double>(batch.size(), 1.0));
}

HarmonizedBatchResult focal_batch(std::span<const ClassificationExample> batch,
                                  double gamma, double alpha_balance) {
  check_nonempty(batch);
  std::vector<double> losses(batch.size());
  std::vector<double> grads(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const auto fl = focal_loss(batch[i], gamma, alpha_balance);
    losses[i] = fl.loss;
    grads[i] = fl.grad;
  }
  return weight_batch(std::vector<double>(batch.size(), 1.0), std::move(losses), grads);
}

HarmonizedBatchResult ghm_c_exact(std::span<const ClassificationExample> batch,
                                  double epsilon, DensityKind estimator) {
  check_nonempty(batch);
  if (estimator == DensityKind::kUnitRegion) {
    throw Error("ghm_c_exact needs an exact density estimator");
  }
  const auto gs = gradient_norms_cls(batch);
  const auto density = estimate_density(gs, {estimator, epsilon, 1});
  return weighted_ce(batch, harmonizing_weights(gs, density));
}

HarmonizedBatchResult ghm_c_approx(std::span<const ClassificationExample> batch,
                                   const UnitRegionHistogram& hist, bool use_ema) {
  check_nonempty(batch);
  const auto gs = gradient_norms_cls(batch);
  const auto density =
      histogram_density(hist, gs, use_ema ? CountSource::kEma : CountSource::kRaw);
  return weighted_ce(batch, harmonizing_weights(gs, density));
}

GhmCLoss::GhmCLoss(std::size_t bins, bool use_ema, double momentum)
    : hist_(bins, momentum), use_ema_(use_ema) {}

HarmonizedBatchResult GhmCLoss::operator()(std::span<const ClassificationExample> batch) {
  check_nonempty(batch);
  const auto gs = gradient_norms_cls(batch);
  if (use_ema_) {
    hist_.ema_update(unit_region_counts(gs, hist_.bins()));
  } else {
    hist_.set_batch(gs);
  }
  return ghm_c_approx(batch, hist_, use_ema_);
}

}  // namespace ghm
