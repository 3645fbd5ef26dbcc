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

#include "ghm/density.hpp"

#include <algorithm>
#include <cfloat>
#include <cmath>
#include <numeric>

#include <fmt/core.h>

#include "ghm/core.hpp"

namespace ghm {
namespace {

void check_epsilon(double epsilon) {
  if (!(epsilon > 0.0 && epsilon <= 1.0)) {
    throw Error(fmt::format("epsilon must lie in (0, 1], got {}", epsilon));
  }
}

void check_norm(double g) {
  if (!(g >= 0.0 && g <= 1.0)) {
    throw Error(fmt::format("gradient norm must lie in [0, 1], got {}", g));
  }
}

void check_norms(std::span<const double> gs) {
  if (gs.empty()) {
    throw Error("gradient density needs at least one example");
  }
  std::for_each(gs.begin(), gs.end(), check_norm);
}

// Valid (clipped to [0, 1]) length of the window centred at q.
double window_length(double q, double half) {
  return std::min(q + half, 1.0) - std::max(q - half, 0.0);
}

double naive_unchecked(std::span<const double> gs, double query, double half) {
  const double left = query - half;
  const double right = query + half;
  // Counted in a double (exact below 2^53); this form vectorizes.
  double count = 0.0;
  for (double g : gs) {
    count += (g >= left && g < right) ? 1.0 : 0.0;
  }
  return count / window_length(query, half);
}

}  // namespace

double gd_naive(std::span<const double> gs, double query, double epsilon) {
  check_epsilon(epsilon);
  check_norms(gs);
  check_norm(query);
  return naive_unchecked(gs, query, epsilon / 2.0);
}

DensityEstimate gd_all_naive(std::span<const double> gs, double epsilon) {
  check_epsilon(epsilon);
  check_norms(gs);
  const double half = epsilon / 2.0;
  DensityEstimate out;
  out.values.reserve(gs.size());
  for (double q : gs) {
    out.values.push_back(naive_unchecked(gs, q, half));
  }
  return out;
}

DensityEstimate gd_sorted_scan(std::span<const double> gs, double epsilon) {
  check_epsilon(epsilon);
  check_norms(gs);
  const double half = epsilon / 2.0;
  const std::size_t n = gs.size();

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return gs[a] < gs[b]; });
  std::vector<double> sorted(n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted[k] = gs[order[k]];
  }

  // lo: first element >= q - half; hi: first element >= q + half. Both bounds
  // are non-decreasing in q, so each pointer only moves forward.
  DensityEstimate out;
  out.values.resize(n);
  std::size_t lo = 0;
  std::size_t hi = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double q = sorted[k];
    const double left = q - half;
    const double right = q + half;
    while (lo < n && sorted[lo] < left) ++lo;
    while (hi < n && sorted[hi] < right) ++hi;
    out.values[order[k]] = static_cast<double>(hi - lo) / window_length(q, half);
  }
  return out;
}

std::size_t bin_index(double g, std::size_t bins) {
  if (bins == 0) {
    throw Error("number of unit regions must be positive");
  }
  check_norm(g);
  double t = g * static_cast<double>(bins);
  const double up = std::ceil(t);
  if (up - t <= 4.0 * DBL_EPSILON * std::max(1.0, t)) {
    t = up;
  }
  const auto j = static_cast<std::size_t>(std::floor(t));
  return std::min(j, bins - 1);
}

std::vector<std::size_t> unit_region_counts(std::span<const double> gs,
                                            std::size_t bins) {
  if (bins == 0) {
    throw Error("number of unit regions must be positive");
  }
  std::vector<std::size_t> counts(bins, 0);
  for (double g : gs) {
    ++counts[bin_index(g, bins)];
  }
  return counts;
}

UnitRegionHistogram::UnitRegionHistogram(std::size_t bins, double momentum)
    : raw_counts_(bins, 0), ema_counts_(bins, 0.0), momentum_(momentum) {
  if (bins == 0) {
    throw Error("number of unit regions must be positive");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw Error(fmt::format("EMA momentum must lie in [0, 1), got {}", momentum));
  }
}

void UnitRegionHistogram::set_batch(std::span<const double> gs) {
  raw_counts_ = unit_region_counts(gs, bins());
}

void UnitRegionHistogram::ema_update(std::span<const std::size_t> new_counts) {
  if (new_counts.size() != bins()) {
    throw Error(fmt::format("EMA update expects {} counts, got {}", bins(),
                            new_counts.size()));
  }
  std::copy(new_counts.begin(), new_counts.end(), raw_counts_.begin());
  for (std::size_t j = 0; j < bins(); ++j) {
    const auto r = static_cast<double>(raw_counts_[j]);
    ema_counts_[j] = initialized_ ? momentum_ * ema_counts_[j] + (1.0 - momentum_) * r : r;
  }
  initialized_ = true;
}

UnitRegionHistogram build_histogram(std::span<const double> gs, std::size_t bins,
                                    double momentum) {
  UnitRegionHistogram hist(bins, momentum);
  hist.set_batch(gs);
  return hist;
}

UnitRegionHistogram ema_update(UnitRegionHistogram hist,
                               std::span<const std::size_t> new_counts) {
  hist.ema_update(new_counts);
  return hist;
}

double gd_histogram(const UnitRegionHistogram& hist, double query, CountSource source) {
  const std::size_t j = hist.index(query);
  const auto m = static_cast<double>(hist.bins());
  if (source == CountSource::kRaw) {
    return static_cast<double>(hist.raw_counts()[j]) * m;
  }
  if (!hist.initialized()) {
    throw Error("EMA density queried before the first update");
  }
  return hist.ema_counts()[j] * m;
}

DensityEstimate histogram_density(const UnitRegionHistogram& hist,
                                  std::span<const double> gs, CountSource source) {
  const auto m = static_cast<double>(hist.bins());
  const double floor = source == CountSource::kEma ? m * (1.0 - hist.momentum()) : 0.0;
  DensityEstimate out;
  out.values.reserve(gs.size());
  for (double g : gs) {
    out.values.push_back(std::max(gd_histogram(hist, g, source), floor));
  }
  return out;
}

std::vector<double> harmonizing_weights(std::span<const double> gs,
                                        const DensityEstimate& density) {
  if (density.values.size() != gs.size()) {
    throw Error(fmt::format("density has {} values for {} examples",
                            density.values.size(), gs.size()));
  }
  const auto n = static_cast<double>(gs.size());
  std::vector<double> beta(gs.size());
  for (std::size_t i = 0; i < gs.size(); ++i) {
    const double gd = density.values[i];
    if (!(gd > 0.0)) {
      throw Error(fmt::format("non-positive gradient density at index {}", i));
    }
    beta[i] = n / gd;
  }
  return beta;
}

void DensityConfig::validate() const {
  if (kind == DensityKind::kUnitRegion) {
    if (bins == 0) {
      throw Error("number of unit regions must be positive");
    }
  } else {
    check_epsilon(epsilon);
  }
}

DensityEstimate estimate_density(std::span<const double> gs, const DensityConfig& config) {
  config.validate();
  switch (config.kind) {
    case DensityKind::kExactNaive:
      return gd_all_naive(gs, config.epsilon);
    case DensityKind::kExactSorted:
      return gd_sorted_scan(gs, config.epsilon);
    case DensityKind::kUnitRegion:
      break;
  }
  return histogram_density(build_histogram(gs, config.bins), gs, CountSource::kRaw);
}

}  // namespace ghm
