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

#include "ghm/synthetic.hpp"

#include <random>

namespace ghm {

std::vector<ClassificationExample> heavy_tailed_classification(std::size_t n,
                                                               std::uint64_t seed) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> outlier_margin(-6.0, 1.0);
  std::normal_distribution<double> bulk_margin(4.5, 2.0);

  std::vector<ClassificationExample> out(n);
  for (auto& ex : out) {
    const double margin = unit(rng) < 0.06 ? outlier_margin(rng) : bulk_margin(rng);
    const double g = sigmoid(-margin);
    ex.label = unit(rng) < 0.1 ? 1 : 0;
    ex.p = ex.label == 1 ? 1.0 - g : g;
  }
  return out;
}

std::vector<double> heavy_tailed_residuals(std::size_t n, std::uint64_t seed,
                                           double outlier_fraction) {
  Rng rng = make_rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> out(n);
  for (auto& d : out) {
    const double magnitude =
        unit(rng) < outlier_fraction ? 1.0 + 2.0 * unit(rng) : 0.05 * unit(rng);
    d = unit(rng) < 0.5 ? -magnitude : magnitude;
  }
  return out;
}

}  // namespace ghm
