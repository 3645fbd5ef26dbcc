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

#include "ghm/core.hpp"

#include <cmath>

#include <fmt/core.h>

namespace ghm {

ValidationError::ValidationError(std::size_t index, std::string field)
    : Error(fmt::format("invalid example at index {}: field {}", index, field)),
      index_(index),
      field_(std::move(field)) {}

double sigmoid(double x) {
  if (!std::isfinite(x)) {
    throw Error("sigmoid: non-finite input");
  }
  // Branch on sign so exp never overflows.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double logit(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error("logit: probability must lie in (0, 1)");
  }
  return std::log(p) - std::log1p(-p);
}

ClassificationBatch validate_batch(std::span<const ClassificationExample> examples) {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (!(ex.p >= 0.0 && ex.p <= 1.0)) {
      throw ValidationError(i, "p");
    }
    if (ex.label != 0 && ex.label != 1) {
      throw ValidationError(i, "label");
    }
  }
  return {examples.begin(), examples.end()};
}

void validate_residuals(std::span<const RegressionResidual> residuals) {
  for (std::size_t i = 0; i < residuals.size(); ++i) {
    if (!std::isfinite(residuals[i])) {
      throw ValidationError(i, "d");
    }
  }
}

std::vector<double> uniform_samples(std::size_t n, std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& v : out) {
    v = dist(rng);
  }
  return out;
}

}  // namespace ghm
