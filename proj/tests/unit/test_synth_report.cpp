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

#include "canopybench/benchmark_table.hpp"
#include "canopybench/error.hpp"
#include "canopybench/hashing.hpp"
#include "canopybench/metrics.hpp"
#include "canopybench/run_manifest.hpp"
#include "canopybench/synthgen.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace canopy;

namespace {

SceneSpec single_crown() {
  SceneSpec s;
  s.name = "one";
  s.size = 64;
  s.terrain.seed = 9;
  s.crowns = {{32.0, 32.0, 10.0, 20.0, CrownShape::paraboloid}};
  return s;
}

}  // namespace

TEST_CASE("generate_scene is deterministic") {
  const auto a = generate_scene(desk_v1_spec(4));
  const auto b = generate_scene(desk_v1_spec(4));
  CHECK(bitwise_equal(a.dsm, b.dsm));
  CHECK(bitwise_equal(a.dtm, b.dtm));
  CHECK(bitwise_equal(a.chm_true, b.chm_true));
  CHECK_FALSE(bitwise_equal(a.dtm, generate_scene(desk_v1_spec(5)).dtm));
}

TEST_CASE("single crown: peak height and support") {
  const auto scene = generate_scene(single_crown());
  const auto& chm = scene.chm_true;
  CHECK(chm.at(32, 32) == 20.0f);
  for (std::uint32_t r = 0; r < chm.height(); ++r) {
    for (std::uint32_t c = 0; c < chm.width(); ++c) {
      const double d = std::hypot(static_cast<double>(r) - 32.0, static_cast<double>(c) - 32.0);
      if (d >= 10.0) REQUIRE(chm.at(r, c) == 0.0f);
      if (d < 9.0) REQUIRE(chm.at(r, c) > 0.0f);
      REQUIRE(chm.at(r, c) <= 20.0f);
    }
  }
}

TEST_CASE("crown profiles") {
  const Crown p{0, 0, 4.0, 10.0, CrownShape::paraboloid};
  const Crown c{0, 0, 4.0, 10.0, CrownShape::cone};
  CHECK(crown_profile(p, 0.0) == 10.0);
  CHECK(crown_profile(p, 2.0) == doctest::Approx(7.5));
  CHECK(crown_profile(c, 2.0) == doctest::Approx(5.0));
  CHECK(crown_profile(p, 4.0) == 0.0);
  CHECK(crown_profile(c, 5.0) == 0.0);
}

TEST_CASE("scene spec validation") {
  auto s = single_crown();
  s.crowns[0].center_x = 64.0;
  try {
    generate_scene(s);
    FAIL("expected CrownOutOfBounds");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CrownOutOfBounds);
  }
  s = single_crown();
  s.crowns[0].height = 0.0;
  CHECK_THROWS_AS(generate_scene(s), Error);
}

TEST_CASE("scene spec json round trip") {
  auto s = desk_v1_spec(7);
  s.noise_sigma = 0.25;
  const auto back = scene_spec_from_json(scene_spec_to_json(s));
  CHECK(back.name == s.name);
  CHECK(back.crowns.size() == s.crowns.size());
  CHECK(back.crowns[3].radius == s.crowns[3].radius);
  CHECK(back.crowns[3].shape == s.crowns[3].shape);
  CHECK(back.noise_sigma == 0.25);
  CHECK(back.terrain.seed == s.terrain.seed);
}

TEST_CASE("noise only touches canopy pixels") {
  auto s = single_crown();
  s.noise_sigma = 0.5;
  const auto noisy = generate_scene(s);
  const auto clean = generate_scene(single_crown());
  for (std::size_t i = 0; i < clean.chm_true.size(); ++i) {
    if (clean.chm_true.values()[i] == 0.0f) REQUIRE(noisy.dsm.values()[i] == clean.dsm.values()[i]);
  }
  CHECK_FALSE(bitwise_equal(noisy.dsm, clean.dsm));
}

TEST_CASE("desk-v1 scenes") {
  for (std::uint32_t i = 1; i <= kDeskV1Scenes; ++i) {
    const auto s = desk_v1_spec(i);
    CHECK(s.size == 256);
    CHECK(s.noise_sigma == 0.0);
    CHECK(s.crowns.size() >= 24);
    CHECK(s.crowns.size() <= 47);
  }
  CHECK_THROWS_AS(desk_v1_spec(0), Error);
  CHECK_THROWS_AS(desk_v1_spec(13), Error);
}

TEST_CASE("dropout perturbation: IoU non-increasing in magnitude") {
  const auto chm = generate_scene(desk_v1_spec(2)).chm_true;
  double prev = 2.0;
  for (double m = 0.0; m <= 45.0; m += 1.5) {
    const auto pred = perturb_prediction(chm, Perturbation::dropout_small_trees, m);
    const double v = iou(tree_mask(pred), tree_mask(chm)).value;
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(prev == 0.0);
}

TEST_CASE("scale perturbation MAE closed form") {
  const auto chm = generate_scene(desk_v1_spec(3)).chm_true;
  long double sum = 0;
  for (float v : chm.values()) sum += v;
  const double mean = static_cast<double>(sum / chm.size());
  for (double s : {0.5, 0.75, 1.0, 1.25, 1.5, 2.0, 3.0}) {
    const auto pred = perturb_prediction(chm, Perturbation::scale, s);
    CHECK(std::fabs(mae(EvalPair(pred, chm)) - std::fabs(s - 1.0) * mean) <= 1e-9);
  }
}

TEST_CASE("blur keeps constants and smooths peaks") {
  const auto flat = Raster::filled(canopy::testing::square(9), 4.0f);
  CHECK(bitwise_equal(perturb_prediction(flat, Perturbation::blur, 2.0), flat));
  std::vector<float> v(25, 0.0f);
  v[12] = 9.0f;
  const auto blurred = perturb_prediction(Raster(canopy::testing::square(5), v), Perturbation::blur, 1.0);
  CHECK(blurred.at(2, 2) == 1.0f);
  CHECK(blurred.at(0, 0) == 0.0f);
  CHECK(blurred.at(1, 1) == 1.0f);
}

TEST_CASE("cost: 2.61 h rounds to $2.09") {
  RunManifest m;
  m.model_id = "m";
  m.dataset_id = "d";
  m.wall_hours = 2.61;
  const auto c = estimate_cost(m);
  CHECK(std::round(c.dollars * 100.0) / 100.0 == 2.09);
  CHECK(std::fabs(c.kg_co2 - 0.24) <= 0.01);
  m.wall_hours = 1.5;
  CHECK(std::fabs(estimate_cost(m).kg_co2 - 0.14) <= 0.01);
  CHECK(std::fabs(estimate_cost(m).dollars - 1.24) <= 0.05);
  CHECK(format_cost_report(m, estimate_cost(m)).find("cost=$1.20") != std::string::npos);
  m.wall_hours = -1;
  CHECK_THROWS_AS(validate_run_manifest(m), Error);
}

TEST_CASE("run manifest json round trip") {
  RunManifest m;
  m.model_id = "dac-s";
  m.n_params_millions = 21.1;
  m.gflops = 40.2;
  m.finetuned = true;
  m.dataset_id = "earthview";
  m.wall_hours = 2.61;
  CHECK(run_manifest_from_json(run_manifest_to_json(m)) == m);
  CHECK_THROWS_AS(run_manifest_from_json("{\"model_id\": 3}"), Error);
}

TEST_CASE("rank_column matches brute force") {
  std::mt19937_64 rng(8);
  std::uniform_int_distribution<int> val(0, 5), len(1, 7);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<std::optional<double>> col(len(rng));
    for (auto& v : col) {
      const int x = val(rng);
      if (x > 0) v = x * 0.1;
    }
    const bool lower = trial % 2 == 0;
    const auto marks = rank_column(col, lower);
    std::vector<double> distinct;
    for (const auto& v : col)
      if (v) distinct.push_back(*v);
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
    if (!lower) std::reverse(distinct.begin(), distinct.end());
    for (std::size_t i = 0; i < col.size(); ++i) {
      Mark expect = Mark::none;
      if (col[i] && *col[i] == distinct[0]) expect = Mark::best;
      else if (col[i] && distinct.size() > 1 && *col[i] == distinct[1]) expect = Mark::second;
      CHECK(marks[i] == expect);
    }
  }
}

TEST_CASE("benchmark table marks the lower MAE as best") {
  auto row = [](const std::string& model, double mae_v, double iou_v) {
    BenchmarkRow r;
    r.manifest.model_id = model;
    r.manifest.dataset_id = "earthview";
    MetricReport m;
    m.mae = mae_v;
    m.iou = iou_v;
    m.pearson = 0.27;
    r.datasets.emplace_back("earthview", m);
    return r;
  };
  const auto text = render_benchmark_table({row("a", 0.1410, 0.5323), row("b", 0.1304, 0.50)});
  CHECK(text.find("**0.1304**") != std::string::npos);
  CHECK(text.find("_0.1410_") != std::string::npos);
  CHECK(text.find("**0.5323**") != std::string::npos);
}

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  Sha256 h;
  h.update("a");
  h.update("bc");
  CHECK(h.hex_digest() == sha256_hex("abc"));
}
