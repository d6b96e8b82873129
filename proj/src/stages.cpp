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

#include "canopybench/stages.hpp"

#include <algorithm>
#include <map>

#include "canopybench/error.hpp"
#include "canopybench/parallel.hpp"
#include "json.hpp"

namespace canopy {

namespace {

using nlohmann::json;

bool is_raster_file(const fs::path& p) {
  auto ext = p.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  return ext == ".chmf" || ext == ".tif" || ext == ".tiff";
}

void require_directory(const fs::path& dir, const std::string& role) {
  if (!fs::is_directory(dir)) throw Error(ErrorKind::IoFailure, role + " directory '" + dir.string() + "' does not exist");
}

std::optional<fs::path> find_by_stem(const fs::path& dir, const std::string& stem) {
  for (const auto* ext : {".chmf", ".tif", ".tiff"}) {
    auto candidate = dir / (stem + ext);
    if (fs::exists(candidate)) return candidate;
  }
  return std::nullopt;
}

fs::path sidecar_path(const fs::path& manifest) {
  return manifest.parent_path() / (manifest.stem().string() + ".report.json");
}

}  // namespace

void write_text(const fs::path& path, const std::string& text) {
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

std::string read_text(const fs::path& path) {
  const auto bytes = read_file_bytes(path);
  return std::string(bytes.begin(), bytes.end());
}

std::vector<fs::path> list_rasters(const fs::path& dir) {
  require_directory(dir, "raster");
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && is_raster_file(entry.path())) out.push_back(entry.path());
  }
  std::sort(out.begin(), out.end(), [](const fs::path& a, const fs::path& b) { return a.filename() < b.filename(); });
  return out;
}

std::vector<fs::path> ingest_directory(const fs::path& src_dir, const fs::path& out_dir) {
  const auto inputs = list_rasters(src_dir);
  fs::create_directories(out_dir);
  std::vector<fs::path> outputs;
  for (const auto& in : inputs) {
    const auto out = out_dir / (in.stem().string() + ".chmf");
    write_raster(read_raster(in), out);
    outputs.push_back(out);
  }
  return outputs;
}

std::vector<Anomaly> derivation_anomalies(const ChmDerivation& derivation, double max_height, bool clamped) {
  auto anomalies = validate_chm(derivation.chm, max_height);
  if (clamped && derivation.clamped > 0) {
    anomalies.push_back({AnomalyKind::clamped_negative, derivation.clamped});
  }
  return anomalies;
}

ChmDirectoryResult derive_chm_directory(const fs::path& dsm_dir, const fs::path& dtm_dir, const fs::path& out_dir,
                                        const ChmDirectoryOptions& options) {
  require_directory(dtm_dir, "DTM");
  const auto dsm_files = list_rasters(dsm_dir);
  if (dsm_files.empty()) throw Error(ErrorKind::IoFailure, "no rasters in DSM directory " + dsm_dir.string());
  fs::create_directories(out_dir);

  ChmDirectoryResult result;
  result.files.resize(dsm_files.size());
  result.outputs.resize(dsm_files.size());
  parallel_for(dsm_files.size(), options.workers, [&](std::size_t i) {
    const auto stem = dsm_files[i].stem().string();
    const auto dtm_path = find_by_stem(dtm_dir, stem);
    if (!dtm_path) throw Error(ErrorKind::IoFailure, "no DTM matching '" + stem + "'");
    const ElevationPair pair(read_raster(dsm_files[i]), read_raster(*dtm_path));
    const auto derived = derive_chm(pair, options.clamp_negative);
    result.outputs[i] = out_dir / (stem + ".chmf");
    write_raster(derived.chm, result.outputs[i]);
    result.files[i] = {stem, derivation_anomalies(derived, options.max_height, options.clamp_negative)};
  });

  json summary = json::object();
  for (const auto& f : result.files) {
    json kinds = json::object();
    for (const auto& a : f.anomalies) kinds[std::string(to_string(a.kind))] = a.count;
    summary[f.name] = kinds;
  }
  const auto anomalies_path = out_dir / "anomalies.json";
  write_text(anomalies_path, summary.dump(2) + "\n");
  result.outputs.push_back(anomalies_path);
  return result;
}

CurateResult curate_manifest(const fs::path& in_manifest, const fs::path& out_manifest, const CurateOptions& options) {
  const auto base_dir = in_manifest.parent_path();
  auto records = read_manifest(in_manifest);
  if (options.score_command) records = score_with_command(std::move(records), *options.score_command, base_dir);
  records = filter_by_quality(std::move(records), options.quality_threshold);
  records = filter_empty_canopy(std::move(records), base_dir, options.workers);

  CurateResult result;
  if (options.ks_report) result.ks = split_distribution_report(records, options.sampling, base_dir);

  // Paths stay relative to the input manifest's directory; rewrite them when
  // the output lands elsewhere.
  auto out_records = records;
  const auto out_dir = fs::absolute(out_manifest).parent_path();
  const auto in_dir = fs::absolute(in_manifest).parent_path();
  if (out_dir != in_dir) {
    for (auto& r : out_records) {
      for (auto* p : {&r.chm_path, &r.image_path}) {
        if (p->empty() || fs::path(*p).is_absolute()) continue;
        *p = fs::relative(in_dir / *p, out_dir).generic_string();
      }
    }
  }
  if (!out_manifest.parent_path().empty()) fs::create_directories(out_manifest.parent_path());
  write_manifest(out_records, out_manifest);

  std::map<std::string, std::size_t> counts;
  for (const auto& r : records) {
    ++counts[std::string(to_string(r.split))];
    if (r.excluded()) ++counts["excluded_" + std::string(to_string(r.exclusion_reason))];
  }
  json ks = json::array();
  for (const auto& c : result.ks) {
    ks.push_back({{"pair", c.pair},
                  {"statistic", c.result.statistic},
                  {"p_value", c.result.p_value},
                  {"n1", c.result.n1},
                  {"n2", c.result.n2}});
  }
  json report = {
      {"quality_threshold", options.quality_threshold},
      {"threshold_rule", "exclude when score < threshold"},
      {"height_source", std::string(to_string(options.sampling.source))},
      {"pixels_per_split", options.sampling.pixels_per_split},
      {"seed", options.sampling.seed},
      {"counts", counts},
      {"ks", ks},
  };
  const auto sidecar = sidecar_path(out_manifest);
  write_text(sidecar, report.dump(2) + "\n");

  result.records = std::move(records);
  result.outputs = {out_manifest, sidecar};
  return result;
}

std::vector<fs::path> write_scene(const SceneSpec& spec, const fs::path& out_dir) {
  const auto scene = generate_scene(spec);
  std::vector<fs::path> outputs;
  for (const auto* sub : {"dsm", "dtm", "chm", "specs"}) fs::create_directories(out_dir / sub);
  const std::pair<const char*, const Raster*> layers[] = {
      {"dsm", &scene.dsm}, {"dtm", &scene.dtm}, {"chm", &scene.chm_true}};
  for (const auto& [sub, raster] : layers) {
    outputs.push_back(out_dir / sub / (spec.name + ".chmf"));
    write_raster(*raster, outputs.back());
  }
  outputs.push_back(out_dir / "specs" / (spec.name + ".json"));
  write_text(outputs.back(), scene_spec_to_json(spec));
  return outputs;
}

std::vector<fs::path> write_desk_v1(const fs::path& out_dir, const std::optional<PredictionRecipe>& predictions) {
  std::vector<fs::path> outputs;
  std::vector<SampleRecord> records;
  if (predictions) fs::create_directories(out_dir / "pred");
  for (std::uint32_t i = 1; i <= kDeskV1Scenes; ++i) {
    const auto spec = desk_v1_spec(i);
    for (auto& p : write_scene(spec, out_dir)) outputs.push_back(std::move(p));
    if (predictions) {
      const auto chm = read_raster(out_dir / "chm" / (spec.name + ".chmf"));
      outputs.push_back(out_dir / "pred" / (spec.name + ".chmf"));
      write_raster(perturb_prediction(chm, predictions->model, predictions->magnitude, i), outputs.back());
    }
    SampleRecord r;
    r.id = spec.name;
    r.image_path = "dsm/" + spec.name + ".chmf";
    r.chm_path = "chm/" + spec.name + ".chmf";
    // Scores cycle through 1.10 .. 4.85 so the 2.5 threshold bites.
    r.quality_score = 1.10 + 0.25 * static_cast<double>((i * 7) % 16);
    r.split = i <= 8 ? Split::train : (i <= 10 ? Split::val : Split::test);
    records.push_back(std::move(r));
  }
  outputs.push_back(out_dir / "manifest.json");
  write_manifest(records, outputs.back());
  return outputs;
}

EvalReport evaluate_directories(const EvalInputs& inputs, const EvalConfig& config) {
  require_directory(inputs.gt_dir, "ground-truth");
  require_directory(inputs.pred_dir, "prediction");

  struct Job {
    std::string id;
    fs::path gt;
    fs::path pred;
  };
  std::vector<Job> jobs;
  auto pred_for = [&](const std::string& id, const fs::path& gt_path) {
    auto p = inputs.pred_dir / (id + ".chmf");
    if (fs::exists(p)) return p;
    p = inputs.pred_dir / gt_path.filename();
    if (fs::exists(p)) return p;
    throw Error(ErrorKind::IoFailure, "no prediction for sample '" + id + "' in " + inputs.pred_dir.string());
  };
  if (inputs.manifest) {
    for (const auto& r : read_manifest(*inputs.manifest)) {
      if (r.split != inputs.split) continue;
      const auto gt = find_by_stem(inputs.gt_dir, r.id);
      if (!gt) throw Error(ErrorKind::IoFailure, "no ground truth for sample '" + r.id + "'");
      jobs.push_back({r.id, *gt, pred_for(r.id, *gt)});
    }
  } else {
    for (const auto& gt : list_rasters(inputs.gt_dir)) {
      const auto id = gt.stem().string();
      jobs.push_back({id, gt, pred_for(id, gt)});
    }
  }
  if (jobs.empty()) throw Error(ErrorKind::NoValidPixels, "no samples selected for evaluation");

  return evaluate(
      jobs.size(),
      [&](std::size_t i) {
        try {
          return NamedPair{jobs[i].id, EvalPair(read_raster(jobs[i].pred), read_raster(jobs[i].gt))};
        } catch (const Error& e) {
          throw Error(e.kind(), "sample '" + jobs[i].id + "': " + e.detail());
        }
      },
      config);
}

}  // namespace canopy
