/* Copyright 2026 The canopybench Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "canopybench/raster.hpp"

namespace canopy {

// Prediction and ground truth on one grid. Statistics only ever look at
// pixels valid in both rasters.
class EvalPair {
 public:
  EvalPair(Raster prediction, Raster ground_truth);

  const Raster& prediction() const noexcept { return prediction_; }
  const Raster& ground_truth() const noexcept { return ground_truth_; }

  bool valid(std::size_t i) const {
    return is_valid(prediction_.values()[i]) && is_valid(ground_truth_.values()[i]);
  }
  std::size_t size() const noexcept { return prediction_.size(); }
  std::size_t n_valid() const;

 private:
  Raster prediction_;
  Raster ground_truth_;
};

// Per-pixel tree / background / outside-domain labels.
struct BinaryMask {
  enum Cell : std::uint8_t { background = 0, tree = 1, outside = 2 };

  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::vector<std::uint8_t> cells;

  bool in_domain(std::size_t i) const { return cells[i] != outside; }
  bool is_tree(std::size_t i) const { return cells[i] == tree; }
  std::size_t count_tree() const;
  std::size_t domain_size() const;
};

inline constexpr double kTreeThreshold = 1e-4;

// tree where value > threshold (strict); nodata pixels fall outside the domain.
BinaryMask tree_mask(const Raster& raster, double threshold = kTreeThreshold);

// Restricts a mask's domain to the pixels valid in both rasters of `pair`.
BinaryMask restrict_to(BinaryMask mask, const EvalPair& pair);

double mae(const EvalPair& pair);

struct IouResult {
  double value = 1.0;
  std::size_t intersection = 0;
  std::size_t union_count = 0;
  bool empty_union = false;  // value is 1 by convention
};

IouResult iou(const BinaryMask& pred_mask, const BinaryMask& gt_mask);

enum class PcRegion { gt_tree, union_tree };

std::string_view to_string(PcRegion region);
PcRegion pc_region_from_string(std::string_view name);

// Region over which the correlation is taken: ground-truth trees, or trees
// in either raster. Domain is the joint valid set of the pair.
BinaryMask pc_region_mask(const EvalPair& pair, PcRegion region, double threshold = kTreeThreshold);

struct PearsonResult {
  std::optional<double> value;  // empty when fewer than 2 pixels or zero variance
  std::size_t n = 0;
};

PearsonResult pearson_tree(const EvalPair& pair, PcRegion region = PcRegion::gt_tree,
                           double threshold = kTreeThreshold);

// Correlation of the pair's values over an externally supplied region.
PearsonResult pearson_masked(const EvalPair& pair, const BinaryMask& region);

struct Normalized {
  Raster raster;
  bool degenerate = false;  // max == min, output all zero
  double min = 0.0;
  double max = 0.0;
};

// (v - min) / (max - min) over valid pixels; units become relative.
Normalized minmax_normalize(const Raster& raster);
// Same affine map with caller-supplied bounds (dataset-wide normalization).
Normalized minmax_normalize(const Raster& raster, double min, double max);

}  // namespace canopy
