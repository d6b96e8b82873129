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

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "canopybench/chm.hpp"
#include "canopybench/curation.hpp"
#include "canopybench/evaluate.hpp"
#include "canopybench/synthgen.hpp"

namespace canopy {

// Directory-level building blocks shared by the CLI subcommands and the
// pipeline runner. Each returns the files it wrote, in a stable order.

namespace fs = std::filesystem;

// *.chmf / *.tif / *.tiff directly inside `dir`, sorted by file name.
std::vector<fs::path> list_rasters(const fs::path& dir);

// Converts every raster in src_dir to canonical CHMF in out_dir.
std::vector<fs::path> ingest_directory(const fs::path& src_dir, const fs::path& out_dir);

struct ChmDirectoryOptions {
  bool clamp_negative = true;
  double max_height = kDefaultMaxHeight;
  unsigned workers = 1;
};

struct ChmFileSummary {
  std::string name;
  std::vector<Anomaly> anomalies;  // includes clamped_negative when any pixel was clamped
};

struct ChmDirectoryResult {
  std::vector<fs::path> outputs;
  std::vector<ChmFileSummary> files;
};

// DSM/DTM files are matched by stem; out_dir gets <stem>.chmf per pair plus
// anomalies.json.
ChmDirectoryResult derive_chm_directory(const fs::path& dsm_dir, const fs::path& dtm_dir, const fs::path& out_dir,
                                        const ChmDirectoryOptions& options);

// Anomalies of a single derivation, clamped count folded in.
std::vector<Anomaly> derivation_anomalies(const ChmDerivation& derivation, double max_height, bool clamped);

struct CurateOptions {
  double quality_threshold = kDefaultQualityThreshold;
  bool ks_report = false;
  HeightSampling sampling;
  std::optional<std::string> score_command;
  unsigned workers = 1;
};

struct CurateResult {
  std::vector<SampleRecord> records;
  std::vector<SplitComparison> ks;
  std::vector<fs::path> outputs;
};

// Reads the manifest, scores/filters it, writes out_manifest and a sidecar
// <stem>.report.json holding threshold, seed, counts and KS results.
CurateResult curate_manifest(const fs::path& in_manifest, const fs::path& out_manifest, const CurateOptions& options);

struct EvalInputs {
  fs::path pred_dir;
  fs::path gt_dir;
  std::optional<fs::path> manifest;  // restricts to records in `split`
  Split split = Split::test;
};

// Pairs gt_dir/<id>.* with pred_dir/<id>.chmf (or the same file name).
EvalReport evaluate_directories(const EvalInputs& inputs, const EvalConfig& config);

// Writes dsm/, dtm/, chm/ CHMF rasters and specs/<name>.json under out_dir.
std::vector<fs::path> write_scene(const SceneSpec& spec, const fs::path& out_dir);

struct PredictionRecipe {
  Perturbation model = Perturbation::blur;
  double magnitude = 2.0;
};

// desk-v1 fixture corpus: the 12 scenes, manifest.json (8 train / 2 val /
// 2 test, deterministic quality scores), and optionally pred/<name>.chmf.
std::vector<fs::path> write_desk_v1(const fs::path& out_dir, const std::optional<PredictionRecipe>& predictions = {});

void write_text(const fs::path& path, const std::string& text);
std::string read_text(const fs::path& path);

}  // namespace canopy
