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
#include <chrono>
#include <cmath>
#include <ostream>

#include <fmt/core.h>

#include "ghm/cli.hpp"
#include "ghm/density.hpp"

namespace ghm::cli {
namespace {

DensityEstimate run_estimator(Estimator estimator, std::span<const double> gs,
                              std::size_t bins) {
  const double epsilon = 1.0 / static_cast<double>(bins);
  switch (estimator) {
    case Estimator::kNaive:
      return gd_all_naive(gs, epsilon);
    case Estimator::kSorted:
      return gd_sorted_scan(gs, epsilon);
    case Estimator::kHistogram:
      break;
  }
  return histogram_density(build_histogram(gs, bins), gs, CountSource::kRaw);
}

double median(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

double max_abs_diff(const DensityEstimate& a, const DensityEstimate& b) {
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) {
    worst = std::max(worst, std::abs(a.values[i] - b.values[i]));
  }
  return worst;
}

}  // namespace

std::optional<Estimator> parse_estimator(std::string_view name) {
  for (auto e : {Estimator::kNaive, Estimator::kSorted, Estimator::kHistogram}) {
    if (name == to_string(e)) return e;
  }
  return std::nullopt;
}

std::string_view to_string(Estimator estimator) {
  switch (estimator) {
    case Estimator::kNaive: return "naive";
    case Estimator::kSorted: return "sorted";
    case Estimator::kHistogram: return "histogram";
  }
  return "?";
}

std::vector<BenchRow> run_bench(const BenchOptions& options) {
  if (options.repetitions == 0) {
    throw Error("repetitions must be positive");
  }
  if (options.sizes.empty() || options.bins.empty() || options.estimators.empty()) {
    throw Error("bench needs at least one size, bin count and estimator");
  }
  for (auto n : options.sizes) {
    if (n == 0) throw Error("bench sizes must be positive");
  }
  for (auto m : options.bins) {
    if (m == 0) throw Error("bench bin counts must be positive");
  }

  using Clock = std::chrono::steady_clock;
  std::vector<BenchRow> rows;
  for (std::size_t n : options.sizes) {
    const auto gs = uniform_samples(n, options.seed);
    for (std::size_t m : options.bins) {
      const std::size_t first = rows.size();
      std::optional<DensityEstimate> reference;
      for (Estimator estimator : options.estimators) {
        BenchRow row{estimator, n, m, {}, 0.0, std::nullopt, std::nullopt};
        DensityEstimate result;
        for (std::size_t rep = 0; rep < options.repetitions; ++rep) {
          const auto start = Clock::now();
          result = run_estimator(estimator, gs, m);
          row.seconds.push_back(std::chrono::duration<double>(Clock::now() - start).count());
        }
        row.median_seconds = median(row.seconds);
        if (estimator == Estimator::kNaive) {
          reference = std::move(result);
        } else if (estimator == Estimator::kSorted) {
          // Exact estimators must agree; checked against a naive run below.
          reference = reference ? reference : gd_all_naive(gs, 1.0 / static_cast<double>(m));
          row.max_abs_diff_vs_naive = max_abs_diff(result, *reference);
        }
        rows.push_back(std::move(row));
      }
      const auto naive = std::find_if(rows.begin() + static_cast<std::ptrdiff_t>(first),
                                      rows.end(), [](const BenchRow& r) {
                                        return r.estimator == Estimator::kNaive;
                                      });
      if (naive != rows.end()) {
        naive->max_abs_diff_vs_naive = 0.0;
        for (auto it = rows.begin() + static_cast<std::ptrdiff_t>(first); it != rows.end(); ++it) {
          it->speedup_vs_naive = naive->median_seconds / it->median_seconds;
        }
      }
    }
  }
  return rows;
}

void write_bench(const BenchOptions& options, const std::vector<BenchRow>& rows,
                 std::ostream& out) {
  const auto time = [&](double s) { return options.mask_timings ? std::string("-") : format_real(s); };
  const auto opt = [&](const std::optional<double>& v, bool timing) {
    if (!v) return std::string();
    return timing ? time(*v) : format_real(*v);
  };
  out << "estimator,n,bins,repetition,seconds,speedup_vs_naive,max_abs_diff_vs_naive\n";
  for (const auto& row : rows) {
    for (std::size_t rep = 0; rep < row.seconds.size(); ++rep) {
      out << fmt::format("{},{},{},{},{},,\n", to_string(row.estimator), row.n, row.bins,
                         rep, time(row.seconds[rep]));
    }
    out << fmt::format("{},{},{},median,{},{},{}\n", to_string(row.estimator), row.n,
                       row.bins, time(row.median_seconds), opt(row.speedup_vs_naive, true),
                       opt(row.max_abs_diff_vs_naive, false));
  }
}

}  // namespace ghm::cli
