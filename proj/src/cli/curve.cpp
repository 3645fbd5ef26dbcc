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

#include <algorithm>
#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "ghm/cli.hpp"
#include "ghm/cls_loss.hpp"
#include "ghm/reg_loss.hpp"

namespace ghm::cli {
namespace {

bool is_harmonized(CurveLoss loss) {
  return loss == CurveLoss::kGhmC || loss == CurveLoss::kGhmR;
}

std::size_t default_bins(CurveLoss loss) {
  return is_regression_curve(loss) ? kDefaultRegressionBins : kDefaultClassificationBins;
}

}  // namespace

std::optional<CurveLoss> parse_curve_loss(std::string_view name) {
  if (name == "CE") return CurveLoss::kCE;
  if (name == "FL") return CurveLoss::kFL;
  if (name == "GHM-C") return CurveLoss::kGhmC;
  if (name == "SL1") return CurveLoss::kSL1;
  if (name == "ASL1") return CurveLoss::kASL1;
  if (name == "GHM-R") return CurveLoss::kGhmR;
  return std::nullopt;
}

bool is_regression_curve(CurveLoss loss) {
  return loss == CurveLoss::kSL1 || loss == CurveLoss::kASL1 || loss == CurveLoss::kGhmR;
}

ReferenceWeights::ReferenceWeights(std::span<const double> reference_gs, std::size_t bins,
                                   bool use_ema, double alpha, std::size_t batch_size)
    : hist_(bins, alpha), use_ema_(use_ema) {
  if (reference_gs.empty()) {
    throw Error("reference distribution is empty");
  }
  const std::size_t n = reference_gs.size();
  const std::size_t chunk = (use_ema && batch_size > 0 && batch_size < n) ? batch_size : n;
  batch_n_ = static_cast<double>(chunk);
  if (!use_ema) {
    hist_.set_batch(reference_gs);
    return;
  }
  // Consecutive chunks play the role of mini-batches; a trailing partial
  // chunk is dropped.
  for (std::size_t start = 0; start + chunk <= n; start += chunk) {
    hist_.ema_update(unit_region_counts(reference_gs.subspan(start, chunk), bins));
  }
}

double ReferenceWeights::beta(double g) const {
  const auto m = static_cast<double>(hist_.bins());
  const double density =
      use_ema_ ? std::max(gd_histogram(hist_, g, CountSource::kEma), m * (1.0 - hist_.momentum()))
               : std::max(gd_histogram(hist_, g, CountSource::kRaw), m);
  return batch_n_ / density;
}

double curve_value(const CurveOptions& options, double x, const ReferenceWeights* reference) {
  if (is_harmonized(options.loss) && reference == nullptr) {
    throw Error("GHM curves require a reference distribution");
  }
  switch (options.loss) {
    case CurveLoss::kCE:
      return x;
    case CurveLoss::kFL:
      // A positive with p = 1 - g; the magnitude is the same for negatives.
      return std::abs(focal_loss({1.0 - x, 1}, options.gamma, options.alpha_balance).grad);
    case CurveLoss::kGhmC:
      return reference->beta(x) * x;
    case CurveLoss::kSL1:
      return std::abs(sl1_grad(x, options.delta));
    case CurveLoss::kASL1:
      return std::abs(asl1_grad(x, options.mu));
    case CurveLoss::kGhmR:
      return reference->beta(gradient_norm_reg(x, options.mu)) *
             std::abs(asl1_grad(x, options.mu));
  }
  return 0.0;
}

void curve(const CurveOptions& options, std::istream* reference, std::ostream& out) {
  if (options.points == 0) {
    throw Error("points must be positive");
  }
  const bool regression = is_regression_curve(options.loss);
  if (regression && !(options.max_abs_d > 0.0)) {
    throw Error("max |d| must be positive");
  }
  std::optional<ReferenceWeights> weights;
  if (is_harmonized(options.loss)) {
    if (reference == nullptr) {
      throw Error("GHM curves require a reference distribution");
    }
    const auto gs = read_gradient_norms(
        *reference, regression ? DumpKind::kRegression : DumpKind::kClassification,
        options.mu);
    weights.emplace(gs, options.bins.value_or(default_bins(options.loss)),
                    options.use_ema, options.alpha, options.batch_size);
  }

  const double span = regression ? options.max_abs_d : 1.0;
  const auto points = static_cast<double>(options.points);
  out << (regression ? "abs_d" : "g") << ",contribution\n";
  for (std::size_t k = 0; k < options.points; ++k) {
    const double x = (static_cast<double>(k) + 0.5) * span / points;
    const double y = curve_value(options, x, weights ? &*weights : nullptr);
    out << fmt::format("{},{}\n", format_real(x), format_real(y));
  }
}

}  // namespace ghm::cli
