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

#include "ghm/reg_loss.hpp"

#include <cmath>

#include <fmt/core.h>

#include "ghm/cls_loss.hpp"

namespace ghm {
namespace {

void check_positive(double value, const char* name) {
  if (!(value > 0.0)) {
    throw Error(fmt::format("{} must be positive, got {}", name, value));
  }
}

void check_residuals(std::span<const RegressionResidual> residuals) {
  if (residuals.empty()) {
    throw Error("residual batch is empty");
  }
  validate_residuals(residuals);
}

HarmonizedBatchResult weighted_asl1(std::span<const RegressionResidual> residuals,
                                    double mu, std::vector<double> weights) {
  std::vector<double> losses(residuals.size());
  std::vector<double> grads(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    losses[i] = asl1(residuals[i], mu);
    grads[i] = asl1_grad(residuals[i], mu);
  }
  return weight_batch(std::move(weights), std::move(losses), grads);
}

}  // namespace

double sl1(RegressionResidual d, double delta) {
  check_positive(delta, "smooth L1 delta");
  const double a = std::abs(d);
  return a <= delta ? d * d / (2.0 * delta) : a - delta / 2.0;
}

double sl1_grad(RegressionResidual d, double delta) {
  check_positive(delta, "smooth L1 delta");
  return std::abs(d) <= delta ? d / delta : std::copysign(1.0, d);
}

double asl1(RegressionResidual d, double mu) {
  check_positive(mu, "ASL1 mu");
  // Same as sqrt(d^2 + mu^2) - mu without cancellation near d = 0.
  return d * d / (std::hypot(d, mu) + mu);
}

double asl1_grad(RegressionResidual d, double mu) {
  check_positive(mu, "ASL1 mu");
  return d / std::hypot(d, mu);
}

double gradient_norm_reg(RegressionResidual d, double mu) {
  return std::abs(asl1_grad(d, mu));
}

std::vector<double> gradient_norms_reg(std::span<const RegressionResidual> residuals,
                                       double mu) {
  std::vector<double> gs(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    gs[i] = gradient_norm_reg(residuals[i], mu);
  }
  return gs;
}

HarmonizedBatchResult sl1_batch(std::span<const RegressionResidual> residuals,
                                double delta) {
  check_residuals(residuals);
  std::vector<double> losses(residuals.size());
  std::vector<double> grads(residuals.size());
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    losses[i] = sl1(residuals[i], delta);
    grads[i] = sl1_grad(residuals[i], delta);
  }
  return weight_batch(std::vector<double>(residuals.size(), 1.0), std::move(losses), grads);
}

HarmonizedBatchResult asl1_batch(std::span<const RegressionResidual> residuals,
                                 double mu) {
  check_residuals(residuals);
  return weighted_asl1(residuals, mu, std::vector<double>(residuals.size(), 1.0));
}

HarmonizedBatchResult ghm_r(std::span<const RegressionResidual> residuals, double mu,
                            const DensityConfig& density) {
  check_residuals(residuals);
  const auto gs = gradient_norms_reg(residuals, mu);
  return weighted_asl1(residuals, mu, harmonizing_weights(gs, estimate_density(gs, density)));
}

GhmRLoss::GhmRLoss(double mu, std::size_t bins, bool use_ema, double momentum)
    : mu_(mu), hist_(bins, momentum), use_ema_(use_ema) {
  check_positive(mu, "ASL1 mu");
}

HarmonizedBatchResult GhmRLoss::operator()(std::span<const RegressionResidual> residuals) {
  check_residuals(residuals);
  const auto gs = gradient_norms_reg(residuals, mu_);
  if (use_ema_) {
    hist_.ema_update(unit_region_counts(gs, hist_.bins()));
  } else {
    hist_.set_batch(gs);
  }
  const auto density =
      histogram_density(hist_, gs, use_ema_ ? CountSource::kEma : CountSource::kRaw);
  return weighted_asl1(residuals, mu_, harmonizing_weights(gs, density));
}

}  // namespace ghm
