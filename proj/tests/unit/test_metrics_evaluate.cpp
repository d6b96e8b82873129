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

#include <random>

#include "canopybench/error.hpp"
#include "canopybench/evaluate.hpp"
#include "canopybench/metrics.hpp"
#include "doctest.h"
#include "json.hpp"
#include "test_support.hpp"

using namespace canopy;
using canopy::testing::random_chm;
using canopy::testing::rel_err;
using canopy::testing::square;

namespace {

Raster row(std::vector<float> v, Units units = Units::meters) {
  const auto n = static_cast<std::uint32_t>(v.size());
  return Raster(Geometry{n, 1, 1.0, 0.0, 1.0}, std::move(v), units);
}

Raster scaled(const Raster& r, float s) {
  std::vector<float> v(r.values().begin(), r.values().end());
  for (auto& x : v) x *= s;
  return r.with_values(std::move(v), r.units());
}

}  // namespace

TEST_CASE("mae hand cases") {
  CHECK(mae(EvalPair(row({0, 1}), row({1, 1}))) == 0.5);
  CHECK(mae(EvalPair(row({3, 4}), row({3, 4}))) == 0.0);
  CHECK(mae(EvalPair(row({0, nodata_value()}), row({2, 1}))) == 2.0);
  try {
    mae(EvalPair(row({nodata_value()}), row({1})));
    FAIL("expected NoValidPixels");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NoValidPixels);
  }
}

TEST_CASE("eval pair geometry check") {
  CHECK_THROWS_AS(EvalPair(row({1, 2}), row({1, 2, 3})), Error);
}

TEST_CASE("tree_mask threshold is strict") {
  const auto m = tree_mask(row({0.0f, 5e-5f, 2e-4f, nodata_value()}), 1e-4);
  CHECK(m.cells[0] == BinaryMask::background);
  CHECK(m.cells[1] == BinaryMask::background);
  CHECK(m.cells[2] == BinaryMask::tree);
  CHECK(m.cells[3] == BinaryMask::outside);
  CHECK(tree_mask(row({1e-4f}), static_cast<float>(1e-4)).count_tree() == 0);
  CHECK(tree_mask(row({0, 0, 0})).count_tree() == 0);
}

TEST_CASE("iou hand cases") {
  const auto p = tree_mask(row({1, 1, 0, 0}));
  const auto g = tree_mask(row({1, 0, 1, 0}));
  const auto r = iou(p, g);
  CHECK(r.intersection == 1);
  CHECK(r.union_count == 3);
  CHECK(r.value == doctest::Approx(1.0 / 3.0));
  CHECK(iou(g, p).value == r.value);
  CHECK(iou(p, p).value == 1.0);
  CHECK(iou(tree_mask(row({1, 0})), tree_mask(row({0, 1}))).value == 0.0);
  const auto empty = iou(tree_mask(row({0, 0})), tree_mask(row({0, 0})));
  CHECK(empty.value == 1.0);
  CHECK(empty.empty_union);
  try {
    iou(tree_mask(row({1, nodata_value()})), tree_mask(row({1, 1})));
    FAIL("expected DomainMismatch");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainMismatch);
  }
}

TEST_CASE("pearson hand cases") {
  const auto gt = row({0, 1, 2, 3, 5});
  std::vector<float> lin, neg;
  for (float g : gt.values()) {
    lin.push_back(2 * g + 3);
    neg.push_back(-g + 10);
  }
  CHECK(*pearson_tree(EvalPair(row(lin), gt)).value == doctest::Approx(1.0));
  CHECK(*pearson_tree(EvalPair(row(neg), gt)).value == doctest::Approx(-1.0));
  // gt region excludes the zero pixel; union includes it.
  CHECK(pearson_tree(EvalPair(row(lin), gt)).n == 4);
  CHECK(pearson_tree(EvalPair(row(lin), gt), PcRegion::union_tree).n == 5);
  CHECK_FALSE(pearson_tree(EvalPair(row({1, 2}), row({0, 4}))).value.has_value());
  CHECK_FALSE(pearson_tree(EvalPair(row({1, 1, 1}), row({2, 3, 4}))).value.has_value());
}

TEST_CASE("metric oracles on random pairs") {
  std::mt19937_64 rng(101);
  for (int trial = 0; trial < 60; ++trial) {
    const auto g = square(48);
    const auto pred = random_chm(rng, g, 0.3, 0.08);
    const auto gt = random_chm(rng, g, 0.3, 0.08);
    const EvalPair pair(pred, gt);
    CHECK(rel_err(mae(pair), canopy::testing::ref_mae(pred, gt)) <= 1e-12);
    const auto ref = canopy::testing::ref_iou(pred, gt, 1e-4);
    const auto got = iou(restrict_to(tree_mask(pred), pair), restrict_to(tree_mask(gt), pair));
    CHECK(got.intersection == ref.intersection);
    CHECK(got.union_count == ref.union_count);
    const auto pc = pearson_tree(pair);
    const auto ref_pc = canopy::testing::ref_pearson_gt_tree(pred, gt, 1e-4);
    REQUIRE(pc.value.has_value() == ref_pc.has_value());
    if (ref_pc) CHECK(std::fabs(*pc.value - *ref_pc) <= 1e-10);
  }
}

TEST_CASE("metric invariants") {
  std::mt19937_64 rng(202);
  for (int trial = 0; trial < 30; ++trial) {
    const auto g = square(32);
    const auto pred = random_chm(rng, g);
    const auto gt = random_chm(rng, g);
    const EvalPair pair(pred, gt);
    // Powers of two keep float scaling exact.
    for (float s : {0.25f, 2.0f, 8.0f}) {
      CHECK(rel_err(mae(EvalPair(scaled(pred, s), scaled(gt, s))), s * mae(pair)) <= 1e-12);
      CHECK(tree_mask(scaled(gt, s), s * 1e-4).cells == tree_mask(gt, 1e-4).cells);
    }
    // Positive affine maps leave PC unchanged on a fixed region.
    const auto region = pc_region_mask(pair, PcRegion::gt_tree);
    std::vector<float> aff(pred.values().begin(), pred.values().end());
    for (auto& x : aff) x = 3.0f * x + 7.0f;
    const auto a = pearson_masked(pair, region);
    const auto b = pearson_masked(EvalPair(pred.with_values(aff, Units::meters), gt), region);
    REQUIRE(a.value.has_value());
    CHECK(std::fabs(*a.value - *b.value) <= 1e-6);
    CHECK(*a.value >= -1.0);
    CHECK(*a.value <= 1.0);
  }
}

TEST_CASE("minmax_normalize") {
  const auto n = minmax_normalize(row({0, 5, 10}));
  CHECK(n.raster.values()[0] == 0.0f);
  CHECK(n.raster.values()[1] == 0.5f);
  CHECK(n.raster.values()[2] == 1.0f);
  CHECK(n.raster.units() == Units::relative);
  const auto c = minmax_normalize(row({7, 7}));
  CHECK(c.degenerate);
  CHECK(c.raster.values()[0] == 0.0f);
  CHECK(c.raster.values()[1] == 0.0f);
  CHECK_THROWS_AS(minmax_normalize(row({nodata_value()})), Error);

  std::mt19937_64 rng(303);
  for (int trial = 0; trial < 50; ++trial) {
    const auto r = random_chm(rng, square(20));
    const auto out = minmax_normalize(r).raster;
    float lo = 2, hi = -1;
    for (std::size_t i = 0; i < r.size(); ++i) {
      REQUIRE(out.valid_at(i) == r.valid_at(i));
      if (!r.valid_at(i)) continue;
      lo = std::min(lo, out.values()[i]);
      hi = std::max(hi, out.values()[i]);
    }
    CHECK(lo == 0.0f);
    CHECK(hi == 1.0f);
    // Order and ties preserved between every valid pair.
    for (std::size_t i = 0; i < r.size(); i += 7) {
      for (std::size_t j = 0; j < r.size(); j += 5) {
        if (!r.valid_at(i) || !r.valid_at(j)) continue;
        const float a = r.values()[i], b = r.values()[j];
        const float x = out.values()[i], y = out.values()[j];
        if (a == b) REQUIRE(x == y);
        if (a < b) REQUIRE(x <= y);
      }
    }
  }
}

TEST_CASE("macro vs micro MAE: 0.1 over 100 px and 0.3 over 300 px") {
  std::vector<TileMetrics> tiles(2);
  tiles[0].id = "a";
  tiles[0].n_valid = 100;
  tiles[0].abs_error_sum = 10.0;
  tiles[0].mae = 0.1;
  tiles[1].id = "b";
  tiles[1].n_valid = 300;
  tiles[1].abs_error_sum = 90.0;
  tiles[1].mae = 0.3;
  CHECK(aggregate(tiles, Aggregation::macro).mae == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(aggregate(tiles, Aggregation::micro).mae == doctest::Approx(0.25).epsilon(1e-15));
}

TEST_CASE("single pair: micro and macro agree with the direct metrics") {
  std::mt19937_64 rng(404);
  const auto pred = random_chm(rng, square(40));
  const auto gt = random_chm(rng, square(40));
  EvalConfig cfg;
  cfg.normalize_pred = cfg.normalize_gt = false;
  const std::vector<NamedPair> pairs = {{"only", EvalPair(pred, gt)}};
  for (auto agg : {Aggregation::micro, Aggregation::macro}) {
    cfg.aggregation = agg;
    const auto rep = evaluate(pairs, cfg).aggregate;
    CHECK(rel_err(rep.mae, mae(pairs[0].pair)) <= 1e-12);
    const auto ref = canopy::testing::ref_iou(pred, gt, 1e-4);
    CHECK(rep.iou == doctest::Approx(static_cast<double>(ref.intersection) / ref.union_count));
    CHECK(std::fabs(*rep.pearson - *pearson_tree(pairs[0].pair).value) <= 1e-12);
    CHECK(rep.n_tiles == 1);
  }
}

TEST_CASE("evaluate is identical across worker counts") {
  std::mt19937_64 rng(505);
  std::vector<NamedPair> pairs;
  for (int i = 0; i < 9; ++i) {
    pairs.push_back({"p" + std::to_string(i), EvalPair(random_chm(rng, square(37)), random_chm(rng, square(37)))});
  }
  for (auto scope : {NormalizeScope::per_tile, NormalizeScope::per_dataset}) {
    for (auto agg : {Aggregation::micro, Aggregation::macro}) {
      EvalConfig cfg;
      cfg.tile_size = 16;
      cfg.normalize_scope = scope;
      cfg.aggregation = agg;
      cfg.workers = 1;
      const auto serial = report_to_json(evaluate(pairs, cfg));
      for (unsigned w : {2u, 3u, 8u}) {
        cfg.workers = w;
        CHECK(report_to_json(evaluate(pairs, cfg)) == serial);
      }
    }
  }
}

TEST_CASE("tiled micro MAE equals pooled pixels; partial tiles counted") {
  std::mt19937_64 rng(606);
  const auto pred = random_chm(rng, square(50));
  const auto gt = random_chm(rng, square(50));
  EvalConfig cfg;
  cfg.normalize_pred = cfg.normalize_gt = false;
  cfg.tile_size = 16;
  const auto rep = evaluate({{"x", EvalPair(pred, gt)}}, cfg);
  CHECK(rep.aggregate.n_tiles == 16);
  CHECK(rep.aggregate.n_partial_tiles == 7);
  CHECK(rel_err(rep.aggregate.mae, canopy::testing::ref_mae(pred, gt)) <= 1e-12);
  CHECK(rep.aggregate.n_valid == EvalPair(pred, gt).n_valid());
}

TEST_CASE("empty-union tiles are flagged and left out of macro IoU") {
  const auto zeros = row({0, 0, 0, 0});
  const auto trees = row({1, 2, 0, 0});
  EvalConfig cfg;
  cfg.aggregation = Aggregation::macro;
  const auto rep = evaluate({{"a", EvalPair(zeros, zeros)}, {"b", EvalPair(trees, row({1, 0, 0, 0}))}}, cfg);
  CHECK(rep.aggregate.n_empty_union == 1);
  CHECK(rep.aggregate.iou == doctest::Approx(0.5));
  CHECK(rep.tiles[0].empty_union);
  CHECK(rep.aggregate.n_pearson_undefined == 2);
  CHECK_FALSE(rep.aggregate.pearson.has_value());
}

TEST_CASE("report json field names") {
  const auto rep = evaluate({{"a", EvalPair(row({1, 2, 3}), row({1, 2, 4}))}}, EvalConfig{});
  const auto j = nlohmann::json::parse(report_to_json(rep));
  for (const char* key : {"mae", "iou", "pearson", "n_valid", "n_tree_gt", "n_tree_pred", "aggregation"}) {
    CHECK(j.at("aggregate").contains(key));
  }
  CHECK(j.at("tiles").size() == 1);
  CHECK(j.at("config").contains("pc_region"));
  CHECK_FALSE(j.at("config").contains("workers"));
  CHECK(report_summary(rep).find("MAE") != std::string::npos);
}

TEST_CASE("evaluate needs valid pixels") {
  const auto r = row({nodata_value(), nodata_value()});
  CHECK_THROWS_AS(evaluate({{"a", EvalPair(r, r)}}, EvalConfig{}), Error);
  CHECK_THROWS_AS(evaluate(std::vector<NamedPair>{}, EvalConfig{}), Error);
}
