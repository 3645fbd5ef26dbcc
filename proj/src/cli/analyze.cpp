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

#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "ghm/cli.hpp"
#include "ghm/density.hpp"

namespace ghm::cli {

void analyze(std::istream& in, const AnalyzeOptions& options, std::ostream& out) {
  if (options.bins == 0) {
    throw Error("bins must be positive");
  }
  const auto gs = read_gradient_norms(in, options.kind, options.mu);
  const auto hist = build_histogram(gs, options.bins);
  const auto m = static_cast<double>(options.bins);
  const double epsilon = options.epsilon.value_or(1.0 / m);
  const auto n = static_cast<double>(gs.size());

  out << "bin,bin_center,count,fraction,log10_fraction,gd_exact,gd_histogram\n";
  for (std::size_t j = 0; j < options.bins; ++j) {
    const double centre = (static_cast<double>(j) + 0.5) / m;
    const std::size_t count = hist.raw_counts()[j];
    const double fraction = static_cast<double>(count) / n;
    const double log_fraction = count > 0 ? std::log10(fraction) : kEmptyLogSentinel;
    out << fmt::format("{},{},{},{},{},{},{}\n", j + 1, format_real(centre), count,
                       format_real(fraction), format_real(log_fraction),
                       format_real(gd_naive(gs, centre, epsilon)),
                       format_real(gd_histogram(hist, centre)));
  }
}

}  // namespace ghm::cli
