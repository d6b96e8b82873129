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

#include "canopybench/evaluate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "canopybench/error.hpp"
#include "canopybench/parallel.hpp"
#include "canopybench/summation.hpp"
#include "canopybench/tiling.hpp"
#include "json.hpp"

namespace canopy {

namespace {

using nlohmann::json;

struct Bounds {
  double lo = INFINITY;
  double hi = -INFINITY;

  void include(const Raster& r) {
    for (float v : r.values()) {
      if (!is_valid(v)) continue;
      lo = std::min(lo, static_cast<double>(v));
      hi = std::max(hi, static_cast<double>(v));
    }
  }
  void merge(const Bounds& o) {
    lo = std::min(lo, o.lo);
    hi = std::max(hi, o.hi);
  }
};

json optional_number(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

std::vector<std::pair<Tile, EvalPair>> split_into_tiles(const NamedPair& named, std::uint32_t tile_size) {
  std::vector<std::pair<Tile, EvalPair>> out;
  const auto& gt = named.pair.ground_truth();
  if (tile_size == 0) {
    Tile whole{named.id, 0, 0, std::max(gt.width(), gt.height()), gt.height(), gt.width(), false};
    out.emplace_back(std::move(whole), named.pair);
    return out;
  }
  for (auto& tile : grid_tiles(gt, tile_size, named.id)) {
    EvalPair piece(crop(named.pair.prediction(), tile), crop(gt, tile));
    out.emplace_back(std::move(tile), std::move(piece));
  }
  return out;
}

std::string tile_label(const Tile& t, std::uint32_t tile_size) {
  if (tile_size == 0) return t.parent_id;
  return t.parent_id + "@r" + std::to_string(t.row_off) + "c" + std::to_string(t.col_off);
}

}  // namespace

std::string_view to_string(Aggregation agg) { return agg == Aggregation::micro ? "micro" : "macro"; }

Aggregation aggregation_from_string(std::string_view name) {
  if (name == "micro") return Aggregation::micro;
  if (name == "macro") return Aggregation::macro;
  throw Error(ErrorKind::InvalidArgument, "unknown aggregation '" + std::string(name) + "'");
}

std::string_view to_string(NormalizeScope scope) {
  return scope == NormalizeScope::per_tile ? "per_tile" : "per_dataset";
}

NormalizeScope normalize_scope_from_string(std::string_view name) {
  if (name == "per_tile" || name == "tile") return NormalizeScope::per_tile;
  if (name == "per_dataset" || name == "dataset") return NormalizeScope::per_dataset;
  throw Error(ErrorKind::InvalidArgument, "unknown normalization scope '" + std::string(name) + "'");
}

TileMetrics tile_metrics(const EvalPair& pair, const EvalConfig& config,
                         const std::optional<NormalizationBounds>& bounds) {
  TileMetrics m;
  m.n_valid = pair.n_valid();
  if (m.n_valid == 0) {
    m.empty_union = true;
    return m;
  }

  // Heights used for MAE/PC may be normalized; tree masks come from metric
  // heights whenever the raster is in meters, else from what MAE sees.
  auto prepare = [&](const Raster& r, bool normalize, double lo, double hi, bool& degenerate) {
    if (!normalize) return r;
    auto n = bounds ? minmax_normalize(r, lo, hi) : minmax_normalize(r);
    degenerate = n.degenerate;
    return std::move(n.raster);
  };
  const auto& pred_raw = pair.prediction();
  const auto& gt_raw = pair.ground_truth();
  Raster pred = prepare(pred_raw, config.normalize_pred, bounds ? bounds->pred_min : 0.0,
                        bounds ? bounds->pred_max : 0.0, m.pred_degenerate);
  Raster gt = prepare(gt_raw, config.normalize_gt, bounds ? bounds->gt_min : 0.0,
                      bounds ? bounds->gt_max : 0.0, m.gt_degenerate);
  const EvalPair scored(pred, gt);

  const auto& pred_mask_src = pred_raw.units() == Units::meters ? pred_raw : pred;
  const auto& gt_mask_src = gt_raw.units() == Units::meters ? gt_raw : gt;
  const auto pred_mask = restrict_to(tree_mask(pred_mask_src, config.threshold), pair);
  const auto gt_mask = restrict_to(tree_mask(gt_mask_src, config.threshold), pair);

  CompensatedSum abs_sum;
  const auto p = scored.prediction().values();
  const auto g = scored.ground_truth().values();
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!pair.valid(i)) continue;
    abs_sum.add(std::abs(static_cast<double>(p[i]) - static_cast<double>(g[i])));
  }
  m.abs_error_sum = abs_sum.value();
  m.mae = m.abs_error_sum / static_cast<double>(m.n_valid);

  const auto overlap = iou(pred_mask, gt_mask);
  m.intersection = overlap.intersection;
  m.union_count = overlap.union_count;
  m.iou = overlap.value;
  m.empty_union = overlap.empty_union;
  m.n_tree_gt = gt_mask.count_tree();
  m.n_tree_pred = pred_mask.count_tree();

  BinaryMask region = gt_mask;
  if (config.pc_region == PcRegion::union_tree) {
    for (std::size_t i = 0; i < region.cells.size(); ++i) {
      if (pred_mask.is_tree(i)) region.cells[i] = BinaryMask::tree;
    }
  }
  const auto pc = pearson_masked(scored, region);
  m.pearson = pc.value;
  m.pearson_n = pc.n;
  return m;
}

MetricReport aggregate(const std::vector<TileMetrics>& tiles, Aggregation aggregation) {
  MetricReport r;
  r.aggregation = aggregation;
  r.n_tiles = tiles.size();

  CompensatedSum abs_total;
  CompensatedSum mae_total;
  CompensatedSum iou_total;
  CompensatedSum pc_total;
  std::size_t mae_tiles = 0;
  std::size_t iou_tiles = 0;
  std::size_t pc_tiles = 0;
  std::size_t intersection = 0;
  std::size_t union_count = 0;
  for (const auto& t : tiles) {
    r.n_partial_tiles += t.partial ? 1 : 0;
    r.n_valid += t.n_valid;
    r.n_tree_gt += t.n_tree_gt;
    r.n_tree_pred += t.n_tree_pred;
    intersection += t.intersection;
    union_count += t.union_count;
    abs_total.add(t.abs_error_sum);
    if (t.mae) {
      mae_total.add(*t.mae);
      ++mae_tiles;
    }
    if (t.empty_union) {
      ++r.n_empty_union;
    } else {
      iou_total.add(t.iou);
      ++iou_tiles;
    }
    if (t.pearson) {
      pc_total.add(*t.pearson);
      ++pc_tiles;
    } else {
      ++r.n_pearson_undefined;
    }
  }
  if (r.n_valid == 0) throw Error(ErrorKind::NoValidPixels, "no tile contributed a valid pixel");

  if (aggregation == Aggregation::micro) {
    r.mae = abs_total.value() / static_cast<double>(r.n_valid);
    r.iou_empty_union = union_count == 0;
    r.iou = r.iou_empty_union ? 1.0 : static_cast<double>(intersection) / static_cast<double>(union_count);
  } else {
    r.mae = mae_total.value() / static_cast<double>(mae_tiles);
    r.iou_empty_union = iou_tiles == 0;
    r.iou = r.iou_empty_union ? 1.0 : iou_total.value() / static_cast<double>(iou_tiles);
  }
  if (pc_tiles > 0) r.pearson = pc_total.value() / static_cast<double>(pc_tiles);
  return r;
}

EvalReport evaluate(std::size_t n_pairs, const PairSource& source, const EvalConfig& config) {
  if (n_pairs == 0) throw Error(ErrorKind::NoValidPixels, "nothing to evaluate");

  std::optional<NormalizationBounds> bounds;
  if (config.normalize_scope == NormalizeScope::per_dataset && (config.normalize_pred || config.normalize_gt)) {
    std::vector<Bounds> pred_b(n_pairs);
    std::vector<Bounds> gt_b(n_pairs);
    parallel_for(n_pairs, config.workers, [&](std::size_t i) {
      const auto named = source(i);
      pred_b[i].include(named.pair.prediction());
      gt_b[i].include(named.pair.ground_truth());
    });
    Bounds pred_all;
    Bounds gt_all;
    for (std::size_t i = 0; i < n_pairs; ++i) {
      pred_all.merge(pred_b[i]);
      gt_all.merge(gt_b[i]);
    }
    if (!std::isfinite(pred_all.lo) || !std::isfinite(gt_all.lo)) {
      throw Error(ErrorKind::NoValidPixels, "dataset has no valid pixels to normalize");
    }
    bounds = NormalizationBounds{pred_all.lo, pred_all.hi, gt_all.lo, gt_all.hi};
  }

  std::vector<std::vector<TileMetrics>> per_pair(n_pairs);
  parallel_for(n_pairs, config.workers, [&](std::size_t i) {
    const auto named = source(i);
    for (const auto& [tile, piece] : split_into_tiles(named, config.tile_size)) {
      auto m = tile_metrics(piece, config, bounds);
      m.id = tile_label(tile, config.tile_size);
      m.pair_id = named.id;
      m.row_off = tile.row_off;
      m.col_off = tile.col_off;
      m.rows = tile.rows;
      m.cols = tile.cols;
      m.partial = tile.partial;
      per_pair[i].push_back(std::move(m));
    }
  });

  EvalReport report;
  report.config = config;
  for (auto& rows : per_pair) {
    for (auto& m : rows) report.tiles.push_back(std::move(m));
  }
  report.aggregate = aggregate(report.tiles, config.aggregation);
  return report;
}

EvalReport evaluate(const std::vector<NamedPair>& pairs, const EvalConfig& config) {
  return evaluate(pairs.size(), [&](std::size_t i) { return pairs[i]; }, config);
}

std::string report_to_json(const EvalReport& report) {
  const auto& c = report.config;
  json config = {
      {"threshold", c.threshold},
      {"aggregation", std::string(to_string(c.aggregation))},
      {"normalize_pred", c.normalize_pred},
      {"normalize_gt", c.normalize_gt},
      {"normalize_scope", std::string(to_string(c.normalize_scope))},
      {"pc_region", std::string(to_string(c.pc_region))},
      {"tile_size", c.tile_size},
  };
  json tiles = json::array();
  for (const auto& t : report.tiles) {
    tiles.push_back({
        {"id", t.id},
        {"pair_id", t.pair_id},
        {"row_off", t.row_off},
        {"col_off", t.col_off},
        {"rows", t.rows},
        {"cols", t.cols},
        {"partial", t.partial},
        {"n_valid", t.n_valid},
        {"n_tree_gt", t.n_tree_gt},
        {"n_tree_pred", t.n_tree_pred},
        {"intersection", t.intersection},
        {"union", t.union_count},
        {"mae", optional_number(t.mae)},
        {"iou", t.iou},
        {"empty_union", t.empty_union},
        {"pearson", optional_number(t.pearson)},
        {"pearson_n", t.pearson_n},
        {"pred_degenerate", t.pred_degenerate},
        {"gt_degenerate", t.gt_degenerate},
    });
  }
  const auto& a = report.aggregate;
  json aggregate = {
      {"mae", a.mae},
      {"iou", a.iou},
      {"pearson", optional_number(a.pearson)},
      {"pearson_defined", a.pearson.has_value()},
      {"n_valid", a.n_valid},
      {"n_tree_gt", a.n_tree_gt},
      {"n_tree_pred", a.n_tree_pred},
      {"aggregation", std::string(to_string(a.aggregation))},
      {"n_tiles", a.n_tiles},
      {"n_partial_tiles", a.n_partial_tiles},
      {"n_pearson_undefined", a.n_pearson_undefined},
      {"n_empty_union", a.n_empty_union},
      {"iou_empty_union", a.iou_empty_union},
  };
  json doc = {{"config", config}, {"tiles", tiles}, {"aggregate", aggregate}};
  return doc.dump(2) + "\n";
}

std::string report_summary(const EvalReport& report) {
  const auto& a = report.aggregate;
  const auto& c = report.config;
  char pc[32] = "undefined";
  if (a.pearson) std::snprintf(pc, sizeof pc, "%.4f", *a.pearson);

  std::string normalize = "none";
  if (c.normalize_pred || c.normalize_gt) {
    const char* which = c.normalize_pred && c.normalize_gt ? "pred,gt" : (c.normalize_pred ? "pred" : "gt");
    normalize = std::string(to_string(c.normalize_scope)) + "(" + which + ")";
  }

  char buf[512];
  std::snprintf(buf, sizeof buf,
                "%-8s %-8s %-8s %-10s %-6s\n%-8.4f %-8.4f %-8s %-10zu %-6s\n"
                "tiles=%zu partial=%zu pc_undefined=%zu empty_union=%zu pc_region=%s normalize=%s\n",
                "MAE", "IoU", "PC", "n_valid", "agg", a.mae, a.iou, pc, a.n_valid,
                std::string(to_string(a.aggregation)).c_str(), a.n_tiles, a.n_partial_tiles, a.n_pearson_undefined,
                a.n_empty_union, std::string(to_string(c.pc_region)).c_str(), normalize.c_str());
  return buf;
}

}  // namespace canopy
