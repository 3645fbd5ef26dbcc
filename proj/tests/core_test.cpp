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
#include <vector>

#include <gtest/gtest.h>

namespace ghm {
namespace {

TEST(SigmoidTest, SymmetryPoint) { EXPECT_EQ(sigmoid(0.0), 0.5); }

TEST(SigmoidTest, Saturates) {
  const double s = sigmoid(30.0);
  EXPECT_GT(s, 1.0 - 1e-12);
  EXPECT_LT(s, 1.0);
  EXPECT_GT(sigmoid(-800.0), -1.0);
  EXPECT_LE(sigmoid(800.0), 1.0);
}

TEST(SigmoidTest, ReflectionIdentity) {
  EXPECT_NEAR(sigmoid(-1.7), 1.0 - sigmoid(1.7), 1e-15);
}

TEST(SigmoidTest, RejectsNonFinite) {
  EXPECT_THROW(sigmoid(std::nan("")), Error);
  EXPECT_THROW(sigmoid(INFINITY), Error);
}

TEST(SigmoidTest, StrictlyMonotoneOnGrid) {
  double prev = sigmoid(-20.0);
  for (double x = -19.9; x <= 20.0; x += 0.1) {
    const double s = sigmoid(x);
    EXPECT_GT(s, prev) << "x=" << x;
    prev = s;
  }
}

TEST(SigmoidTest, LogitRoundTrip) {
  for (double p : uniform_samples(500, 3)) {
    if (p <= 0.0) continue;
    EXPECT_NEAR(sigmoid(logit(p)), p, 1e-12);
  }
  EXPECT_THROW(logit(0.0), Error);
  EXPECT_THROW(logit(1.0), Error);
}

TEST(ValidateBatchTest, AcceptsValid) {
  const std::vector<ClassificationExample> batch = {{0.3, 0}, {0.9, 1}};
  EXPECT_EQ(validate_batch(batch).size(), 2u);
}

TEST(ValidateBatchTest, ReportsIndexAndField) {
  const std::vector<ClassificationExample> bad_p = {{1.2, 0}};
  try {
    validate_batch(bad_p);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.index(), 0u);
    EXPECT_EQ(e.field(), "p");
  }

  const std::vector<ClassificationExample> bad_label = {{0.5, 1}, {0.5, 2}};
  try {
    validate_batch(bad_label);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_EQ(e.index(), 1u);
    EXPECT_EQ(e.field(), "label");
  }
}

TEST(ValidateBatchTest, EmptyIsVacuouslyValid) {
  EXPECT_TRUE(validate_batch({}).empty());
}

TEST(ValidateResidualsTest, RejectsNan) {
  const std::vector<double> ds = {0.1, std::nan("")};
  EXPECT_THROW(validate_residuals(ds), ValidationError);
}

TEST(RngTest, SeededSamplesAreReproducible) {
  EXPECT_EQ(uniform_samples(64, 9), uniform_samples(64, 9));
  EXPECT_NE(uniform_samples(64, 9), uniform_samples(64, 10));
}

}  // namespace
}  // namespace ghm
