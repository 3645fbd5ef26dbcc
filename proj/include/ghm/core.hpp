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

#ifndef GHM_CORE_HPP_
#define GHM_CORE_HPP_

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace ghm {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised by validate_batch; carries the position of the first bad record.
class ValidationError : public Error {
 public:
  ValidationError(std::size_t index, std::string field);

  std::size_t index() const noexcept { return index_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::size_t index_;
  std::string field_;
};

/// One binary classification candidate: predicted probability and label.
struct ClassificationExample {
  double p = 0.0;
  int label = 0;
};

using ClassificationBatch = std::vector<ClassificationExample>;

/// Per-coordinate regression error d = prediction - target.
using RegressionResidual = double;

/// Sum of raw losses weighted by the harmonizing parameters, plus the
/// per-example logit (or residual) gradients of that weighted loss.
struct HarmonizedBatchResult {
  std::vector<double> weights;           // beta_i, all > 0
  std::vector<double> per_example_loss;  // unweighted loss of each example
  double total_loss = 0.0;               // (1/N) sum weights_i * loss_i
  std::vector<double> per_example_grad;  // weights_i * dloss_i / N
};

/// Logistic function. Throws on non-finite input.
double sigmoid(double x);

/// Inverse of sigmoid; p must lie strictly inside (0, 1).
double logit(double p);

/// Returns a copy of the batch if every example has p in [0,1] and a 0/1
/// label, otherwise throws ValidationError naming the first violation.
ClassificationBatch validate_batch(std::span<const ClassificationExample> examples);

/// Throws ghm::Error unless every value is finite.
void validate_residuals(std::span<const RegressionResidual> residuals);

/// Every randomized utility takes one of these, seeded explicitly.
using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng{seed}; }

/// N values uniform in [0, 1) drawn from a fresh generator seeded with `seed`.
std::vector<double> uniform_samples(std::size_t n, std::uint64_t seed);

}  // namespace ghm

#endif  // GHM_CORE_HPP_
