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

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canopybench/metrics.hpp"

namespace canopy {

enum class Aggregation { micro, macro };
enum class NormalizeScope { per_tile, per_dataset };

std::string_view to_string(Aggregation agg);
Aggregation aggregation_from_string(std::string_view name);
std::string_view to_string(NormalizeScope scope);
NormalizeScope normalize_scope_from_string(std::string_view name);

struct EvalConfig {
  double threshold = kTreeThreshold;
  Aggregation aggregation = Aggregation::micro;
  bool normalize_pred = true;
  bool normalize_gt = true;
  NormalizeScope normalize_scope = NormalizeScope::per_tile;
  PcRegion pc_region = PcRegion::gt_tree;
  std::uint32_t tile_size = 0;  // 0: one tile per pair
  unsigned workers = 1;         // never affects results
};

struct NamedPair {
  std::string id;
  EvalPair pair;
};

struct TileMetrics {
  std::string id;
  std::string pair_id;
  std::uint32_t row_off = 0;
  std::uint32_t col_off = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  bool partial = false;

  std::size_t n_valid = 0;
  std::size_t n_tree_gt = 0;
  std::size_t n_tree_pred = 0;
  std::size_t intersection = 0;
  std::size_t union_count = 0;
  double abs_error_sum = 0.0;

  std::optional<double> mae;  // empty when the tile has no valid pixel
  double iou = 1.0;
  bool empty_union = false;
  std::optional<double> pearson;
  std::size_t pearson_n = 0;
  bool pred_degenerate = false;
  bool gt_degenerate = false;
};

struct MetricReport {
  double mae = 0.0;
  double iou = 1.0;
  std::optional<double> pearson;  // empty when no tile has a defined value
  std::size_t n_valid = 0;
  std::size_t n_tree_gt = 0;
  std::size_t n_tree_pred = 0;
  Aggregation aggregation = Aggregation::micro;

  std::size_t n_tiles = 0;
  std::size_t n_partial_tiles = 0;
  std::size_t n_pearson_undefined = 0;
  std::size_t n_empty_union = 0;
  bool iou_empty_union = false;
};

struct EvalReport {
  EvalConfig config;
  std::vector<TileMetrics> tiles;  // tile-id order
  MetricReport aggregate;
};

// Metrics for one tile (already cropped). Normalization bounds, when given,
// override the per-tile min/max (dataset-wide scope).
struct NormalizationBounds {
  double pred_min, pred_max, gt_min, gt_max;
};
TileMetrics tile_metrics(const EvalPair& pair, const EvalConfig& config,
                         const std::optional<NormalizationBounds>& bounds = std::nullopt);

// Combines per-tile rows in the order given; the result depends only on the
// rows, never on how they were produced.
MetricReport aggregate(const std::vector<TileMetrics>& tiles, Aggregation aggregation);

// Pairs are loaded lazily by index so workers can stream them from disk.
using PairSource = std::function<NamedPair(std::size_t)>;

EvalReport evaluate(std::size_t n_pairs, const PairSource& source, const EvalConfig& config);
EvalReport evaluate(const std::vector<NamedPair>& pairs, const EvalConfig& config);

// Stable-key JSON (aggregate fields: mae, iou, pearson, n_valid, n_tree_gt,
// n_tree_pred, aggregation).
std::string report_to_json(const EvalReport& report);

// Short plain-text summary in the MAE / IoU / PC layout.
std::string report_summary(const EvalReport& report);

}  // namespace canopy
