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

#ifndef GHM_DENSITY_HPP_
#define GHM_DENSITY_HPP_

#include <cstddef>
#include <span>
#include <vector>

namespace ghm {

inline constexpr std::size_t kDefaultClassificationBins = 30;
inline constexpr double kDefaultMomentum = 0.75;

/// One gradient density value per queried example.
struct DensityEstimate {
  std::vector<double> values;
};

/// Exact gradient density at `query`: the number of g_k inside the half-open
/// window [query - eps/2, query + eps/2), divided by the part of the window
/// that lies inside [0, 1].
double gd_naive(std::span<const double> gs, double query, double epsilon);

/// gd_naive evaluated at every element of gs. Quadratic; used as the oracle.
DensityEstimate gd_all_naive(std::span<const double> gs, double epsilon);

/// Same values as gd_all_naive, computed by sorting once and sliding a
/// two-pointer window over the sorted norms. O(N log N).
DensityEstimate gd_sorted_scan(std::span<const double> gs, double epsilon);

/// 0-based unit region of g for M bins. Bin j covers [j/M, (j+1)/M); g = 1
/// is clamped into the top bin. Values within a few ulps below a boundary
/// are snapped onto it, so decimal inputs such as |0.9 - 1| land where they
/// read.
std::size_t bin_index(double g, std::size_t bins);

/// Per-bin counts of the latest batch plus their exponential moving average.
///
/// The moving average is seeded with the first batch (S = R), and every later
/// update applies S = alpha * S + (1 - alpha) * R. Single writer: exactly one
/// update per training step; readers may query between updates.
class UnitRegionHistogram {
 public:
  explicit UnitRegionHistogram(std::size_t bins, double momentum = kDefaultMomentum);

  std::size_t bins() const noexcept { return raw_counts_.size(); }
  double momentum() const noexcept { return momentum_; }
  bool initialized() const noexcept { return initialized_; }
  double epsilon() const noexcept { return 1.0 / static_cast<double>(bins()); }

  std::span<const std::size_t> raw_counts() const noexcept { return raw_counts_; }
  std::span<const double> ema_counts() const noexcept { return ema_counts_; }

  std::size_t index(double g) const { return bin_index(g, bins()); }

  /// Replaces the raw counts with the binning of gs; leaves the EMA alone.
  void set_batch(std::span<const double> gs);

  /// Replaces the raw counts and folds them into the moving average.
  void ema_update(std::span<const std::size_t> new_counts);

 private:
  std::vector<std::size_t> raw_counts_;
  std::vector<double> ema_counts_;
  double momentum_;
  bool initialized_ = false;
};

/// Raw counts of gs over M unit regions (EMA not initialized).
UnitRegionHistogram build_histogram(std::span<const double> gs, std::size_t bins,
                                    double momentum = kDefaultMomentum);

/// Value-returning form of UnitRegionHistogram::ema_update.
UnitRegionHistogram ema_update(UnitRegionHistogram hist,
                               std::span<const std::size_t> new_counts);

/// Counts of gs per unit region, without touching any histogram state.
std::vector<std::size_t> unit_region_counts(std::span<const double> gs,
                                            std::size_t bins);

enum class CountSource { kRaw, kEma };

/// Approximate density R_ind(g) * M, or S_ind(g) * M with the EMA source.
double gd_histogram(const UnitRegionHistogram& hist, double query,
                    CountSource source = CountSource::kRaw);

/// Densities used for weighting every g in gs. With the EMA source each value
/// is floored at M * (1 - alpha), which caps beta at N / (M * (1 - alpha)).
DensityEstimate histogram_density(const UnitRegionHistogram& hist,
                                  std::span<const double> gs, CountSource source);

/// beta_i = N / GD(g_i). Throws if any density is not positive.
std::vector<double> harmonizing_weights(std::span<const double> gs,
                                        const DensityEstimate& density);

/// Which estimator a harmonized loss uses for its density.
enum class DensityKind { kExactNaive, kExactSorted, kUnitRegion };

struct DensityConfig {
  DensityKind kind = DensityKind::kUnitRegion;
  double epsilon = 1.0 / static_cast<double>(kDefaultClassificationBins);
  std::size_t bins = kDefaultClassificationBins;

  void validate() const;
};

/// Density of every g in gs under a stateless config (exact or raw counts).
DensityEstimate estimate_density(std::span<const double> gs, const DensityConfig& config);

}  // namespace ghm

#endif  // GHM_DENSITY_HPP_
