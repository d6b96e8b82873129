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

#include "canopybench/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "canopybench/error.hpp"
#include "canopybench/summation.hpp"

namespace canopy {

EvalPair::EvalPair(Raster prediction, Raster ground_truth)
    : prediction_(std::move(prediction)), ground_truth_(std::move(ground_truth)) {
  if (!same_geometry(prediction_.geometry(), ground_truth_.geometry())) {
    throw Error(ErrorKind::GeometryMismatch, "prediction and ground truth grids differ");
  }
}

std::size_t EvalPair::n_valid() const {
  std::size_t n = 0;
  for (std::size_t i = 0; i < size(); ++i) n += valid(i) ? 1 : 0;
  return n;
}

std::size_t BinaryMask::count_tree() const {
  return static_cast<std::size_t>(std::count(cells.begin(), cells.end(), tree));
}

std::size_t BinaryMask::domain_size() const {
  return cells.size() - static_cast<std::size_t>(std::count(cells.begin(), cells.end(), outside));
}

BinaryMask tree_mask(const Raster& raster, double threshold) {
  BinaryMask mask{raster.width(), raster.height(), std::vector<std::uint8_t>(raster.size())};
  const auto values = raster.values();
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!is_valid(values[i])) {
      mask.cells[i] = BinaryMask::outside;
    } else {
      mask.cells[i] = values[i] > threshold ? BinaryMask::tree : BinaryMask::background;
    }
  }
  return mask;
}

BinaryMask restrict_to(BinaryMask mask, const EvalPair& pair) {
  if (mask.cells.size() != pair.size()) throw Error(ErrorKind::DomainMismatch, "mask and pair sizes differ");
  for (std::size_t i = 0; i < mask.cells.size(); ++i) {
    if (!pair.valid(i)) mask.cells[i] = BinaryMask::outside;
  }
  return mask;
}

double mae(const EvalPair& pair) {
  const auto pred = pair.prediction().values();
  const auto gt = pair.ground_truth().values();
  CompensatedSum sum;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!pair.valid(i)) continue;
    sum.add(std::abs(static_cast<double>(pred[i]) - static_cast<double>(gt[i])));
    ++n;
  }
  if (n == 0) throw Error(ErrorKind::NoValidPixels, "MAE over an empty valid set");
  return sum.value() / static_cast<double>(n);
}

IouResult iou(const BinaryMask& pred_mask, const BinaryMask& gt_mask) {
  if (pred_mask.width != gt_mask.width || pred_mask.height != gt_mask.height ||
      pred_mask.cells.size() != gt_mask.cells.size()) {
    throw Error(ErrorKind::DomainMismatch, "IoU masks have different shapes");
  }
  IouResult r;
  for (std::size_t i = 0; i < pred_mask.cells.size(); ++i) {
    if (pred_mask.in_domain(i) != gt_mask.in_domain(i)) {
      throw Error(ErrorKind::DomainMismatch, "IoU masks cover different valid pixels");
    }
    const bool p = pred_mask.is_tree(i);
    const bool g = gt_mask.is_tree(i);
    r.intersection += (p && g) ? 1 : 0;
    r.union_count += (p || g) ? 1 : 0;
  }
  if (r.union_count == 0) {
    r.empty_union = true;
    r.value = 1.0;
  } else {
    r.value = static_cast<double>(r.intersection) / static_cast<double>(r.union_count);
  }
  return r;
}

std::string_view to_string(PcRegion region) { return region == PcRegion::gt_tree ? "gt" : "union"; }

PcRegion pc_region_from_string(std::string_view name) {
  if (name == "gt" || name == "gt_tree") return PcRegion::gt_tree;
  if (name == "union" || name == "union_tree") return PcRegion::union_tree;
  throw Error(ErrorKind::InvalidArgument, "unknown PC region '" + std::string(name) + "'");
}

BinaryMask pc_region_mask(const EvalPair& pair, PcRegion region, double threshold) {
  auto gt = restrict_to(tree_mask(pair.ground_truth(), threshold), pair);
  if (region == PcRegion::gt_tree) return gt;
  const auto pred = tree_mask(pair.prediction(), threshold);
  for (std::size_t i = 0; i < gt.cells.size(); ++i) {
    if (gt.in_domain(i) && pred.is_tree(i)) gt.cells[i] = BinaryMask::tree;
  }
  return gt;
}

PearsonResult pearson_masked(const EvalPair& pair, const BinaryMask& region) {
  if (region.cells.size() != pair.size()) throw Error(ErrorKind::DomainMismatch, "region and pair sizes differ");
  const auto pred = pair.prediction().values();
  const auto gt = pair.ground_truth().values();
  // Streaming co-moments (Welford); constant inputs leave the second moments
  // at exactly zero.
  double mean_x = 0.0;
  double mean_y = 0.0;
  double m2_x = 0.0;
  double m2_y = 0.0;
  double c_xy = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    if (!region.is_tree(i) || !pair.valid(i)) continue;
    ++n;
    const double x = gt[i];
    const double y = pred[i];
    const double dx = x - mean_x;
    const double dy = y - mean_y;
    const double inv = 1.0 / static_cast<double>(n);
    mean_x += dx * inv;
    mean_y += dy * inv;
    m2_x += dx * (x - mean_x);
    m2_y += dy * (y - mean_y);
    c_xy += dx * (y - mean_y);
  }
  PearsonResult r;
  r.n = n;
  if (n < 2 || m2_x <= 0.0 || m2_y <= 0.0) return r;
  r.value = std::clamp(c_xy / std::sqrt(m2_x * m2_y), -1.0, 1.0);
  return r;
}

PearsonResult pearson_tree(const EvalPair& pair, PcRegion region, double threshold) {
  return pearson_masked(pair, pc_region_mask(pair, region, threshold));
}

Normalized minmax_normalize(const Raster& raster, double min, double max) {
  Normalized out;
  out.min = min;
  out.max = max;
  out.degenerate = !(max > min);
  std::vector<float> values(raster.values().begin(), raster.values().end());
  const double range = max - min;
  for (auto& v : values) {
    if (!is_valid(v)) continue;
    v = out.degenerate ? 0.0f : static_cast<float>((static_cast<double>(v) - min) / range);
  }
  out.raster = raster.with_values(std::move(values), Units::relative);
  return out;
}

Normalized minmax_normalize(const Raster& raster) {
  double lo = INFINITY;
  double hi = -INFINITY;
  for (float v : raster.values()) {
    if (!is_valid(v)) continue;
    lo = std::min(lo, static_cast<double>(v));
    hi = std::max(hi, static_cast<double>(v));
  }
  if (!std::isfinite(lo)) throw Error(ErrorKind::NoValidPixels, "cannot normalize a raster with no valid pixels");
  return minmax_normalize(raster, lo, hi);
}

}  // namespace canopy
