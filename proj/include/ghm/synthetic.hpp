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

#ifndef GHM_SYNTHETIC_HPP_
#define GHM_SYNTHETIC_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "ghm/core.hpp"

namespace ghm {

/// Predictions shaped like those of a converged one-stage detector: most
/// examples are easy (tiny gradient norm), the count falls off steeply with g,
/// and a block of persistent outliers piles up next to g = 1.
///
/// Each example draws a classification margin m and sets g = sigmoid(-m):
///   - with probability 0.06, m ~ N(-6, 1)    (outliers)
///   - otherwise           m ~ N(4.5, 2)      (bulk)
/// The label is 1 with probability 0.1, and p is chosen so |p - label| = g.
std::vector<ClassificationExample> heavy_tailed_classification(std::size_t n,
                                                               std::uint64_t seed);

/// Residuals with a dense inlier core and a sparse set of large errors:
/// a fraction `outlier_fraction` has |d| uniform in [1, 3], the rest has |d|
/// uniform in [0, 0.05]. Signs are random.
std::vector<double> heavy_tailed_residuals(std::size_t n, std::uint64_t seed,
                                           double outlier_fraction = 0.05);

}  // namespace ghm

#endif  // GHM_SYNTHETIC_HPP_
