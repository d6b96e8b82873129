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

// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails.

#include <chrono>
#include <cstdio>
#include <functional>
#include <random>
#include <string>

#include "canopybench/chm.hpp"
#include "canopybench/curation.hpp"
#include "canopybench/evaluate.hpp"
#include "canopybench/ks.hpp"
#include "canopybench/metrics.hpp"
#include "canopybench/run_manifest.hpp"
#include "canopybench/stages.hpp"
#include "canopybench/synthgen.hpp"
#include "test_support.hpp"

using namespace canopy;
namespace t = canopy::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

Raster scaled(const Raster& r, float s) {
  std::vector<float> v(r.values().begin(), r.values().end());
  for (auto& x : v) x *= s;
  return r.with_values(std::move(v), r.units());
}

// Heights spread over many decades, including values near the 1e-4 threshold.
Raster log_uniform_chm(std::mt19937_64& rng, std::uint32_t n) {
  std::uniform_real_distribution<double> u(0.0, 1.0), e(-7.0, 1.7);
  std::vector<float> v(static_cast<std::size_t>(n) * n);
  for (auto& x : v) {
    const double r = u(rng);
    x = r < 0.05 ? nodata_value() : (r < 0.3 ? 0.0f : static_cast<float>(std::pow(10.0, e(rng))));
  }
  return Raster(t::square(n), std::move(v));
}

Outcome metric_oracle() {
  Outcome o;
  std::mt19937_64 rng(20260001);
  std::normal_distribution<double> noise(0.0, 4.0);
  const auto start = std::chrono::steady_clock::now();
  double worst_mae = 0, worst_pc = 0;
  for (int i = 0; i < 500; ++i) {
    const auto gt = t::random_chm(rng, t::square(128), 0.3, 0.05);
    // Correlated prediction so PC sits well away from zero.
    std::vector<float> pv(gt.size());
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (std::size_t k = 0; k < pv.size(); ++k) {
      const float g = gt.values()[k];
      pv[k] = u(rng) < 0.05 ? nodata_value()
                            : static_cast<float>(std::max(0.0, (std::isnan(g) ? 0.0 : g) * 0.8 + noise(rng)));
    }
    const Raster pred(gt.geometry(), std::move(pv));
    const EvalPair pair(pred, gt);
    const double e1 = t::rel_err(mae(pair), t::ref_mae(pred, gt));
    worst_mae = std::max(worst_mae, e1);
    o.require(e1 <= 1e-10, "mae mismatch on pair " + std::to_string(i));
    const auto ref = t::ref_iou(pred, gt, kTreeThreshold);
    const auto got = iou(restrict_to(tree_mask(pred), pair), restrict_to(tree_mask(gt), pair));
    o.require(got.intersection == ref.intersection && got.union_count == ref.union_count,
              "iou counts differ on pair " + std::to_string(i));
    const auto pc = pearson_tree(pair);
    const auto ref_pc = t::ref_pearson_gt_tree(pred, gt, kTreeThreshold);
    o.require(pc.value.has_value() == ref_pc.has_value(), "pearson definedness differs");
    if (pc.value && ref_pc) {
      const double e2 = t::rel_err(*pc.value, *ref_pc);
      worst_pc = std::max(worst_pc, e2);
      o.require(e2 <= 1e-10, "pearson mismatch on pair " + std::to_string(i));
    }
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  o.require(secs < 60.0, "runtime over 60 s");
  char buf[160];
  std::snprintf(buf, sizeof buf, "500 pairs, max rel err mae=%.2e pc=%.2e, %.1f s", worst_mae, worst_pc, secs);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome threshold_semantics() {
  Outcome o;
  const Raster r(Geometry{3, 1, 1.0, 0.0, 1.0}, {0.0f, 5e-5f, 2e-4f});
  const auto m = tree_mask(r, 1e-4);
  o.require(!m.is_tree(0) && !m.is_tree(1) && m.is_tree(2), "0 / 5e-5 / 2e-4 classified wrongly");
  std::mt19937_64 rng(20260002);
  std::size_t checked = 0;
  for (int i = 0; i < 100; ++i) {
    const auto base = log_uniform_chm(rng, 64);
    const auto reference = tree_mask(base, kTreeThreshold).cells;
    for (float s : {0.1f, 1.0f, 10.0f}) {
      const auto cells = tree_mask(scaled(base, s), static_cast<double>(s) * kTreeThreshold).cells;
      o.require(cells == reference, "mask changed under joint scaling s=" + std::to_string(s));
      ++checked;
    }
  }
  if (o.pass) o.detail = "strict > at 1e-4; " + std::to_string(checked) + " scaled masks commute";
  return o;
}

Outcome ks_correctness() {
  Outcome o;
  std::mt19937_64 rng(20260003);
  std::uniform_int_distribution<std::size_t> n(1, 500);
  std::uniform_real_distribution<double> shift(-0.5, 0.5);
  double worst_p = 0;
  for (int i = 0; i < 200; ++i) {
    std::normal_distribution<double> da(0.0, 1.0), db(shift(rng), 1.0);
    std::vector<double> a(n(rng)), b(n(rng));
    const bool ties = i % 2 == 0;
    for (auto& x : a) x = ties ? std::round(da(rng) * 4) / 4 : da(rng);
    for (auto& x : b) x = ties ? std::round(db(rng) * 4) / 4 : db(rng);
    const auto r = ks_two_sample(a, b);
    o.require(r.statistic == t::ref_ks_statistic(a, b), "D differs from brute force on pair " + std::to_string(i));
    const double dp = std::fabs(r.p_value - t::ref_ks_pvalue(r.statistic, a.size(), b.size()));
    worst_p = std::max(worst_p, dp);
    o.require(dp <= 1e-6, "p differs from reference on pair " + std::to_string(i));
    const auto s = ks_two_sample(b, a);
    o.require(s.statistic == r.statistic && s.p_value == r.p_value, "asymmetric result on pair " + std::to_string(i));
    auto ta = a, tb = b;
    for (auto* v : {&ta, &tb})
      for (auto& x : *v) x = std::exp(x) + 3.0 * x;
    const auto m = ks_two_sample(ta, tb);
    o.require(m.statistic == r.statistic, "monotone transform changed D on pair " + std::to_string(i));
  }
  const std::vector<double> same = {0.5, 1.0, 1.0, 2.5};
  const auto id = ks_two_sample(same, same);
  o.require(id.statistic == 0.0 && id.p_value == 1.0, "identical samples not D=0, p=1");
  char buf[120];
  std::snprintf(buf, sizeof buf, "200 pairs exact D, max |dp|=%.2e, symmetric, transform-invariant", worst_p);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome curation_fixture() {
  Outcome o;
  std::vector<SampleRecord> recs;
  for (double s : {1.10, 2.53, 3.71}) {
    SampleRecord r;
    r.id = std::to_string(s);
    r.quality_score = s;
    recs.push_back(r);
  }
  const auto out = filter_by_quality(recs, 2.5);
  o.require(out[0].excluded() && out[0].exclusion_reason == ExclusionReason::low_quality, "1.10 not excluded");
  o.require(!out[1].excluded() && !out[2].excluded(), "2.53 or 3.71 excluded");

  t::ScratchDir dir("accept-curation");
  write_raster(Raster(t::square(4), std::vector<float>(16, 0.0f)), dir / "zero.chmf");
  std::vector<float> one(16, 0.0f);
  one[9] = 0.01f;
  write_raster(Raster(t::square(4), one), dir / "one.chmf");
  SampleRecord z, p;
  z.id = "zero";
  z.chm_path = "zero.chmf";
  z.quality_score = 3;
  p.id = "one";
  p.chm_path = "one.chmf";
  p.quality_score = 3;
  const auto e = filter_empty_canopy({z, p}, dir.path());
  o.require(e[0].exclusion_reason == ExclusionReason::empty_canopy, "all-zero CHM kept");
  o.require(!e[1].excluded(), "one-pixel-positive CHM excluded");
  if (o.pass) o.detail = "1.10 excluded at t=2.5; empty CHM excluded, one-pixel CHM kept";
  return o;
}

Outcome chm_closure() {
  Outcome o;
  for (std::uint32_t i = 1; i <= kDeskV1Scenes; ++i) {
    const auto scene = generate_scene(desk_v1_spec(i));
    const auto d = derive_chm(ElevationPair(scene.dsm, scene.dtm));
    o.require(bitwise_equal(d.chm, scene.chm_true), "scene " + std::to_string(i) + " not bitwise equal");
  }
  std::mt19937_64 rng(20260005);
  for (int i = 0; i < 100; ++i) {
    const auto a = t::random_chm(rng, t::square(32), 0.1, 0.1, 300.0);
    const auto b = t::random_chm(rng, t::square(32), 0.1, 0.1, 300.0);
    const auto ab = derive_chm(ElevationPair(a, b), false).chm;
    const auto ba = derive_chm(ElevationPair(b, a), false).chm;
    for (std::size_t k = 0; k < ab.size(); ++k) {
      const bool nodata = !a.valid_at(k) || !b.valid_at(k);
      o.require(ab.valid_at(k) == !nodata, "nodata union violated");
      if (!nodata) o.require(ab.values()[k] == -ba.values()[k], "anti-symmetry violated");
    }
  }
  if (o.pass) o.detail = "12 desk-v1 scenes bitwise; 100 random pairs anti-symmetric with nodata union";
  return o;
}

Outcome schedule_determinism() {
  Outcome o;
  t::ScratchDir dir("accept-sched");
  write_desk_v1(dir.path(), PredictionRecipe{Perturbation::blur, 2.0});
  EvalInputs in;
  in.pred_dir = dir / "pred";
  in.gt_dir = dir / "chm";
  std::size_t configs = 0;
  for (std::uint32_t tile : {0u, 64u}) {
    for (auto agg : {Aggregation::micro, Aggregation::macro}) {
      EvalConfig cfg;
      cfg.tile_size = tile;
      cfg.aggregation = agg;
      std::string reference;
      for (unsigned w : {1u, 2u, 8u}) {
        cfg.workers = w;
        const auto path = dir / ("report-" + std::to_string(w) + ".json");
        write_text(path, report_to_json(evaluate_directories(in, cfg)));
        const auto bytes = read_text(path);
        if (w == 1) reference = bytes;
        o.require(bytes == reference, "report differs with " + std::to_string(w) + " workers");
      }
      ++configs;
    }
  }
  if (o.pass) o.detail = "desk-v1 reports byte-identical for 1/2/8 workers across " + std::to_string(configs) + " configs";
  return o;
}

Outcome cost_estimator() {
  Outcome o;
  RunManifest m;
  m.model_id = "m";
  m.dataset_id = "d";
  m.wall_hours = 2.61;
  const auto c = estimate_cost(m);
  o.require(std::round(c.dollars * 100.0) / 100.0 == 2.09, "2.61 h does not round to $2.09");
  o.require(std::fabs(c.kg_co2 - 0.24) <= 0.01, "2.61 h CO2 not 0.24 +- 0.01");
  m.wall_hours = 1.5;
  const auto c15 = estimate_cost(m);
  o.require(std::fabs(c15.kg_co2 - 0.14) <= 0.01, "1.5 h CO2 not 0.14 +- 0.01");
  char buf[120];
  std::snprintf(buf, sizeof buf, "2.61 h -> $%.4f, %.4f kg; 1.5 h -> %.4f kg", c.dollars, c.kg_co2, c15.kg_co2);
  if (o.pass) o.detail = buf;
  return o;
}

Outcome perturbation_sanity() {
  Outcome o;
  const auto chm = generate_scene(desk_v1_spec(6)).chm_true;
  double prev = 2.0;
  for (double mag = 0.0; mag <= 42.0; mag += 0.5) {
    const double v = iou(tree_mask(perturb_prediction(chm, Perturbation::dropout_small_trees, mag)), tree_mask(chm)).value;
    o.require(v <= prev, "dropout IoU increased at magnitude " + std::to_string(mag));
    prev = v;
  }
  long double sum = 0;
  for (float v : chm.values()) sum += v;
  const double mean = static_cast<double>(sum / chm.size());
  double worst = 0;
  for (double s : {0.5, 0.75, 1.25, 1.5, 2.0, 3.0}) {
    const double got = mae(EvalPair(perturb_prediction(chm, Perturbation::scale, s), chm));
    const double err = std::fabs(got - std::fabs(s - 1.0) * mean);
    worst = std::max(worst, err);
    o.require(err <= 1e-9, "scale MAE off closed form at s=" + std::to_string(s));
  }
  char buf[120];
  std::snprintf(buf, sizeof buf, "dropout IoU non-increasing over 85 magnitudes; scale max err %.2e", worst);
  if (o.pass) o.detail = buf;
  return o;
}

}  // namespace

int main() {
  const std::pair<const char*, std::function<Outcome()>> criteria[] = {
      {"metric-oracle-equivalence", metric_oracle},
      {"threshold-semantics", threshold_semantics},
      {"ks-test-correctness", ks_correctness},
      {"curation-fixture", curation_fixture},
      {"chm-closure", chm_closure},
      {"schedule-determinism", schedule_determinism},
      {"cost-estimator", cost_estimator},
      {"perturbation-sanity", perturbation_sanity},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name, o.detail.c_str());
    std::fflush(stdout);
    failures += o.pass ? 0 : 1;
  }
  return failures == 0 ? 0 : 1;
}
