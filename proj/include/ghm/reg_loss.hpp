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

#ifndef GHM_REG_LOSS_HPP_
#define GHM_REG_LOSS_HPP_

#include <cstddef>
#include <span>
#include <vector>

#include "ghm/core.hpp"
#include "ghm/density.hpp"

namespace ghm {

inline constexpr double kDefaultSmoothL1Delta = 1.0 / 9.0;
inline constexpr double kDefaultAsl1Mu = 0.02;
inline constexpr std::size_t kDefaultRegressionBins = 10;

/// Smooth L1: d^2 / (2 delta) inside the division point, |d| - delta / 2 outside.
double sl1(RegressionResidual d, double delta = kDefaultSmoothL1Delta);
double sl1_grad(RegressionResidual d, double delta = kDefaultSmoothL1Delta);

/// Authentic smooth L1: sqrt(d^2 + mu^2) - mu. Smooth everywhere.
double asl1(RegressionResidual d, double mu = kDefaultAsl1Mu);

/// d / sqrt(d^2 + mu^2); always strictly inside (-1, 1).
double asl1_grad(RegressionResidual d, double mu = kDefaultAsl1Mu);

/// |asl1_grad(d)|, the regression gradient norm in [0, 1).
double gradient_norm_reg(RegressionResidual d, double mu = kDefaultAsl1Mu);

std::vector<double> gradient_norms_reg(std::span<const RegressionResidual> residuals,
                                       double mu = kDefaultAsl1Mu);

inline DensityConfig default_regression_density() {
  return {DensityKind::kUnitRegion, 1.0 / static_cast<double>(kDefaultRegressionBins),
          kDefaultRegressionBins};
}

/// Mean smooth L1 over the residuals (all weights 1).
HarmonizedBatchResult sl1_batch(std::span<const RegressionResidual> residuals,
                                double delta = kDefaultSmoothL1Delta);

/// Mean authentic smooth L1 over the residuals (all weights 1).
HarmonizedBatchResult asl1_batch(std::span<const RegressionResidual> residuals,
                                 double mu = kDefaultAsl1Mu);

/// GHM-R: ASL1 weighted by N / GD(gr), with the density estimated over the
/// batch's own gradient norms. Each residual coordinate counts as one example.
HarmonizedBatchResult ghm_r(std::span<const RegressionResidual> residuals,
                            double mu = kDefaultAsl1Mu,
                            const DensityConfig& density = default_regression_density());

/// GHM-R over unit regions with an optional moving-average histogram; updates
/// the histogram with each batch before weighting it.
class GhmRLoss {
 public:
  explicit GhmRLoss(double mu = kDefaultAsl1Mu, std::size_t bins = kDefaultRegressionBins,
                    bool use_ema = false, double momentum = kDefaultMomentum);

  HarmonizedBatchResult operator()(std::span<const RegressionResidual> residuals);

  const UnitRegionHistogram& histogram() const noexcept { return hist_; }

 private:
  double mu_;
  UnitRegionHistogram hist_;
  bool use_ema_;
};

}  // namespace ghm

#endif  // GHM_REG_LOSS_HPP_
