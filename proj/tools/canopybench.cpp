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

// canopybench: command-line front end for CHM derivation, dataset curation,
// evaluation, synthetic corpora, cost estimation and the staged pipeline.

#include <cstdio>
#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "canopybench/benchmark_table.hpp"
#include "canopybench/chm.hpp"
#include "canopybench/curation.hpp"
#include "canopybench/evaluate.hpp"
#include "canopybench/pipeline.hpp"
#include "canopybench/run_manifest.hpp"
#include "canopybench/stages.hpp"
#include "canopybench/synthgen.hpp"
#include "json.hpp"

namespace {

using namespace canopy;

int exit_code_for(const Error& e) {
  switch (e.kind()) {
    case ErrorKind::ConfigError:
    case ErrorKind::InvalidArgument:
      return kExitConfigError;
    default:
      return kExitStageFailure;
  }
}

unsigned resolve_workers(const CLI::Option* flag, unsigned value) {
  return flag->count() > 0 ? value : workers_from_env(value);
}

std::vector<BenchmarkRow> load_table_spec(const fs::path& path) {
  const auto doc = nlohmann::json::parse(read_text(path));
  const auto base = path.parent_path();
  auto resolve = [&](const std::string& p) { return fs::path(p).is_absolute() ? fs::path(p) : base / p; };
  std::vector<BenchmarkRow> rows;
  for (const auto& entry : doc) {
    BenchmarkRow row;
    row.manifest = read_run_manifest(resolve(entry.at("run_manifest").get<std::string>()));
    for (const auto& [dataset, report] : entry.at("reports").items()) {
      row.datasets.emplace_back(dataset, metric_report_from_json(read_text(resolve(report.get<std::string>()))));
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"canopybench - canopy height model curation and evaluation toolkit"};
  app.require_subcommand(1);

  // chm derive
  auto* chm = app.add_subcommand("chm", "Canopy height model operations");
  chm->require_subcommand(1);
  auto* derive = chm->add_subcommand("derive", "Derive a CHM as DSM - DTM");
  std::string dsm_path, dtm_path, chm_out;
  bool no_clamp = false;
  double max_height = kDefaultMaxHeight;
  derive->add_option("--dsm", dsm_path, "DSM raster (chmf or GeoTIFF)")->required();
  derive->add_option("--dtm", dtm_path, "DTM raster (chmf or GeoTIFF)")->required();
  derive->add_option("--out", chm_out, "Output CHMF path")->required();
  derive->add_flag("--no-clamp", no_clamp, "Keep negative heights instead of clamping to 0");
  derive->add_option("--max-height", max_height, "Heights above this are reported as too_tall")->capture_default_str();

  // curate
  auto* curate = app.add_subcommand("curate", "Filter a sample manifest and check split distributions");
  std::string manifest_in, manifest_out;
  CurateOptions curate_opts;
  std::string height_source = "per_pixel_subsample";
  std::string score_cmd;
  unsigned curate_workers = 1;
  curate->add_option("--manifest", manifest_in, "Input manifest JSON")->required();
  curate->add_option("--out", manifest_out, "Output manifest JSON")->required();
  curate->add_option("--quality-threshold", curate_opts.quality_threshold, "Exclude scores below this")
      ->capture_default_str();
  curate->add_flag("--ks-report", curate_opts.ks_report, "Run KS tests train-val and train-test");
  curate->add_option("--seed", curate_opts.sampling.seed, "Seed for per-pixel subsampling")->capture_default_str();
  curate->add_option("--height-source", height_source, "per_pixel_subsample or per_sample_max")->capture_default_str();
  curate->add_option("--pixels-per-split", curate_opts.sampling.pixels_per_split, "Subsample size per split")
      ->capture_default_str();
  curate->add_option("--score-cmd", score_cmd, "Shell command that prints a quality score for an image path");
  auto* curate_workers_opt = curate->add_option("--workers", curate_workers, "Parallel raster readers");

  // evaluate
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score prediction rasters against ground truth");
  EvalInputs eval_inputs;
  std::string eval_manifest, eval_split = "test", agg = "micro", normalize = "pred,gt", scope = "per_tile",
                             pc_region = "gt", report_path;
  EvalConfig eval_cfg;
  evaluate_cmd->add_option("--pred-dir", eval_inputs.pred_dir, "Prediction rasters")->required();
  evaluate_cmd->add_option("--gt-dir", eval_inputs.gt_dir, "Ground-truth rasters")->required();
  evaluate_cmd->add_option("--manifest", eval_manifest, "Restrict to manifest records of --split");
  evaluate_cmd->add_option("--split", eval_split, "Split used with --manifest")->capture_default_str();
  evaluate_cmd->add_option("--threshold", eval_cfg.threshold, "Tree threshold (strict >)")->capture_default_str();
  evaluate_cmd->add_option("--agg", agg, "micro or macro")->capture_default_str();
  evaluate_cmd->add_option("--normalize", normalize, "pred,gt | pred | gt | none")->capture_default_str();
  evaluate_cmd->add_option("--normalize-scope", scope, "per_tile or per_dataset")->capture_default_str();
  evaluate_cmd->add_option("--pc-region", pc_region, "gt or union")->capture_default_str();
  evaluate_cmd->add_option("--tile-size", eval_cfg.tile_size, "Grid tile size; 0 keeps whole rasters")
      ->capture_default_str();
  auto* eval_workers_opt = evaluate_cmd->add_option("--workers", eval_cfg.workers, "Worker threads");
  evaluate_cmd->add_option("--report", report_path, "Report JSON path")->required();

  // synth
  auto* synth = app.add_subcommand("synth", "Generate synthetic DSM/DTM/CHM scenes");
  std::string spec_path, corpus, out_dir, pred_model;
  double pred_magnitude = 2.0;
  auto* spec_opt = synth->add_option("--spec", spec_path, "Scene spec JSON");
  auto* corpus_opt = synth->add_option("--corpus", corpus, "Named fixture corpus (desk-v1)");
  synth->add_option("--out-dir", out_dir, "Output directory")->required();
  synth->add_option("--pred-model", pred_model, "Also write pseudo-predictions: scale, blur, dropout_small_trees");
  synth->add_option("--pred-magnitude", pred_magnitude, "Perturbation magnitude")->capture_default_str();
  spec_opt->excludes(corpus_opt);

  // run
  auto* run = app.add_subcommand("run", "Run the staged pipeline from a config file");
  std::string config_path;
  run->add_option("--config", config_path, "Pipeline config (INI)")->required();

  // cost
  auto* cost = app.add_subcommand("cost", "Estimate cost, energy and CO2 for a run manifest");
  std::string run_manifest_path;
  cost->add_option("--manifest", run_manifest_path, "RunManifest JSON")->required();

  // table
  auto* table = app.add_subcommand("table", "Render a benchmark table from run manifests and reports");
  std::string table_spec;
  table->add_option("--spec", table_spec, "JSON list of {run_manifest, reports: {dataset: report.json}}")
      ->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*chm && *derive) {
      const ElevationPair pair(read_raster(dsm_path), read_raster(dtm_path));
      const auto derived = derive_chm(pair, !no_clamp);
      write_raster(derived.chm, chm_out);
      for (const auto& a : derivation_anomalies(derived, max_height, !no_clamp)) {
        std::cout << "anomaly=" << to_string(a.kind) << " count=" << a.count << "\n";
      }
      return kExitOk;
    }
    if (*curate) {
      curate_opts.sampling.source = height_source_from_string(height_source);
      if (!score_cmd.empty()) curate_opts.score_command = score_cmd;
      curate_opts.workers = resolve_workers(curate_workers_opt, curate_workers);
      const auto result = curate_manifest(manifest_in, manifest_out, curate_opts);
      std::size_t excluded = 0;
      for (const auto& r : result.records) excluded += r.excluded() ? 1 : 0;
      std::cout << "records=" << result.records.size() << " excluded=" << excluded << "\n";
      for (const auto& c : result.ks) std::cout << format_ks_line(c) << "\n";
      return kExitOk;
    }
    if (*evaluate_cmd) {
      if (!eval_manifest.empty()) eval_inputs.manifest = eval_manifest;
      eval_inputs.split = split_from_string(eval_split);
      eval_cfg.aggregation = aggregation_from_string(agg);
      eval_cfg.normalize_pred = normalize.find("pred") != std::string::npos;
      eval_cfg.normalize_gt = normalize.find("gt") != std::string::npos;
      eval_cfg.normalize_scope = normalize_scope_from_string(scope);
      eval_cfg.pc_region = pc_region_from_string(pc_region);
      eval_cfg.workers = resolve_workers(eval_workers_opt, eval_cfg.workers);
      const auto report = evaluate_directories(eval_inputs, eval_cfg);
      write_text(report_path, report_to_json(report));
      std::cout << report_summary(report);
      return kExitOk;
    }
    if (*synth) {
      std::optional<PredictionRecipe> recipe;
      if (!pred_model.empty()) recipe = PredictionRecipe{perturbation_from_string(pred_model), pred_magnitude};
      if (!corpus.empty()) {
        if (corpus != "desk-v1") throw Error(ErrorKind::InvalidArgument, "unknown corpus '" + corpus + "'");
        const auto outputs = write_desk_v1(out_dir, recipe);
        std::cout << "wrote " << outputs.size() << " files to " << out_dir << "\n";
        return kExitOk;
      }
      if (spec_path.empty()) throw Error(ErrorKind::InvalidArgument, "synth needs --spec or --corpus");
      const auto spec = scene_spec_from_json(read_text(spec_path));
      auto outputs = write_scene(spec, out_dir);
      if (recipe) {
        fs::create_directories(fs::path(out_dir) / "pred");
        const auto pred_path = fs::path(out_dir) / "pred" / (spec.name + ".chmf");
        write_raster(perturb_prediction(read_raster(fs::path(out_dir) / "chm" / (spec.name + ".chmf")),
                                        recipe->model, recipe->magnitude, spec.terrain.seed),
                     pred_path);
        outputs.push_back(pred_path);
      }
      for (const auto& p : outputs) std::cout << p.string() << "\n";
      return kExitOk;
    }
    if (*run) return run_pipeline_main(config_path, std::cout, std::cerr);
    if (*cost) {
      const auto manifest = read_run_manifest(run_manifest_path);
      std::cout << format_cost_report(manifest, estimate_cost(manifest));
      return kExitOk;
    }
    if (*table) {
      std::cout << render_benchmark_table(load_table_spec(table_spec));
      return kExitOk;
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitStageFailure;
  }
  return kExitOk;
}
