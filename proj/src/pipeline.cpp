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

#include "canopybench/pipeline.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include <cstdlib>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <set>

#include "canopybench/benchmark_table.hpp"
#include "canopybench/hashing.hpp"
#include "canopybench/run_manifest.hpp"
#include "canopybench/stages.hpp"
#include "json.hpp"

namespace canopy {

namespace {

using nlohmann::json;
namespace pt = boost::property_tree;

const std::vector<std::string> kStageOrder = {"ingest", "chm", "curate", "evaluate", "report"};

const std::map<std::string, std::set<std::string>> kAllowedKeys = {
    {"run", {"work_dir", "workers", "seed"}},
    {"ingest", {"src_dir", "out_dir"}},
    {"chm", {"dsm_dir", "dtm_dir", "out_dir", "clamp", "max_height"}},
    {"curate",
     {"manifest", "out", "quality_threshold", "ks_report", "height_source", "pixels_per_split", "seed",
      "score_cmd"}},
    {"evaluate",
     {"pred_dir", "gt_dir", "manifest", "split", "threshold", "agg", "normalize", "normalize_scope", "pc_region",
      "tile_size", "report"}},
    {"report", {"run_manifest", "dataset_id", "eval_report", "out"}},
};

// One INI section with typed, path-aware lookups. Errors are ConfigError.
class Section {
 public:
  Section(std::string name, std::map<std::string, std::string> values, fs::path base)
      : name_(std::move(name)), values_(std::move(values)), base_(std::move(base)) {}

  const std::map<std::string, std::string>& values() const { return values_; }

  bool has(const std::string& key) const { return values_.count(key) != 0; }

  std::string text(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end()) throw Error(ErrorKind::ConfigError, "[" + name_ + "] missing required key '" + key + "'");
    return it->second;
  }

  std::string text(const std::string& key, const std::string& fallback) const {
    return has(key) ? text(key) : fallback;
  }

  fs::path path(const std::string& key) const { return resolve(text(key)); }

  fs::path path(const std::string& key, const std::string& fallback) const { return resolve(text(key, fallback)); }

  double number(const std::string& key, double fallback) const {
    if (!has(key)) return fallback;
    try {
      std::size_t used = 0;
      const auto v = std::stod(text(key), &used);
      if (used != text(key).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, "[" + name_ + "] '" + key + "' is not a number");
    }
  }

  std::uint64_t integer(const std::string& key, std::uint64_t fallback) const {
    if (!has(key)) return fallback;
    try {
      std::size_t used = 0;
      const auto v = std::stoull(text(key), &used);
      if (used != text(key).size()) throw std::invalid_argument("trailing characters");
      return v;
    } catch (const std::exception&) {
      throw Error(ErrorKind::ConfigError, "[" + name_ + "] '" + key + "' is not a non-negative integer");
    }
  }

  bool flag(const std::string& key, bool fallback) const {
    if (!has(key)) return fallback;
    const auto v = text(key);
    if (v == "true" || v == "yes" || v == "1" || v == "on") return true;
    if (v == "false" || v == "no" || v == "0" || v == "off") return false;
    throw Error(ErrorKind::ConfigError, "[" + name_ + "] '" + key + "' is not a boolean");
  }

 private:
  fs::path resolve(const std::string& p) const {
    fs::path path(p);
    return path.is_absolute() ? path : base_ / path;
  }

  std::string name_;
  std::map<std::string, std::string> values_;
  fs::path base_;
};

struct Config {
  fs::path base;
  fs::path work_dir;
  unsigned workers = 1;
  std::uint64_t seed = 0;
  std::map<std::string, Section> sections;
};

Config load_config(const fs::path& config_path) {
  if (!fs::is_regular_file(config_path)) {
    throw Error(ErrorKind::ConfigError, "config file '" + config_path.string() + "' not found");
  }
  pt::ptree tree;
  try {
    pt::ini_parser::read_ini(config_path.string(), tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorKind::ConfigError, e.what());
  }
  Config config;
  config.base = fs::absolute(config_path).parent_path();
  for (const auto& [name, node] : tree) {
    auto allowed = kAllowedKeys.find(name);
    if (allowed == kAllowedKeys.end() || node.empty()) {
      throw Error(ErrorKind::ConfigError, "unknown section or top-level key '" + name + "'");
    }
    std::map<std::string, std::string> values;
    for (const auto& [key, value] : node) {
      if (allowed->second.count(key) == 0) {
        throw Error(ErrorKind::ConfigError, "[" + name + "] unknown key '" + key + "'");
      }
      values[key] = value.get_value<std::string>();
    }
    config.sections.emplace(name, Section(name, std::move(values), config.base));
  }
  const Section run = config.sections.count("run") ? config.sections.at("run") : Section("run", {}, config.base);
  config.work_dir = run.path("work_dir", "work");
  config.workers = static_cast<unsigned>(std::max<std::uint64_t>(1, run.integer("workers", 1)));
  config.workers = workers_from_env(config.workers);
  config.seed = run.integer("seed", 0);
  bool any_stage = false;
  for (const auto& stage : kStageOrder) any_stage = any_stage || config.sections.count(stage);
  if (!any_stage) throw Error(ErrorKind::ConfigError, "config enables no stages");
  return config;
}

struct StagePlan {
  std::vector<fs::path> inputs;
  std::function<std::vector<fs::path>()> run;
};

std::vector<fs::path> directory_files(const fs::path& dir) {
  std::vector<fs::path> files;
  if (!fs::is_directory(dir)) return files;
  for (const auto& e : fs::recursive_directory_iterator(dir)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  return files;
}

EvalConfig eval_config_from(const Section& s, unsigned workers) {
  EvalConfig c;
  c.threshold = s.number("threshold", kTreeThreshold);
  c.aggregation = aggregation_from_string(s.text("agg", "micro"));
  const auto normalize = s.text("normalize", "pred,gt");
  c.normalize_pred = normalize.find("pred") != std::string::npos;
  c.normalize_gt = normalize.find("gt") != std::string::npos;
  if (normalize != "none" && !c.normalize_pred && !c.normalize_gt) {
    throw Error(ErrorKind::ConfigError, "[evaluate] normalize must be pred, gt, pred,gt or none");
  }
  c.normalize_scope = normalize_scope_from_string(s.text("normalize_scope", "per_tile"));
  c.pc_region = pc_region_from_string(s.text("pc_region", "gt"));
  c.tile_size = static_cast<std::uint32_t>(s.integer("tile_size", 0));
  c.workers = workers;
  return c;
}

StagePlan plan_stage(const std::string& stage, const Config& config) {
  const auto& s = config.sections.at(stage);
  StagePlan plan;
  if (stage == "ingest") {
    const auto src = s.path("src_dir");
    const auto out = s.path("out_dir");
    plan.inputs = directory_files(src);
    plan.run = [src, out] { return ingest_directory(src, out); };
  } else if (stage == "chm") {
    const auto dsm = s.path("dsm_dir");
    const auto dtm = s.path("dtm_dir");
    const auto out = s.path("out_dir");
    ChmDirectoryOptions options;
    options.clamp_negative = s.flag("clamp", true);
    options.max_height = s.number("max_height", kDefaultMaxHeight);
    options.workers = config.workers;
    plan.inputs = directory_files(dsm);
    for (auto& f : directory_files(dtm)) plan.inputs.push_back(std::move(f));
    plan.run = [=] { return derive_chm_directory(dsm, dtm, out, options).outputs; };
  } else if (stage == "curate") {
    const auto manifest = s.path("manifest");
    const auto out = s.path("out");
    CurateOptions options;
    options.quality_threshold = s.number("quality_threshold", kDefaultQualityThreshold);
    options.ks_report = s.flag("ks_report", false);
    options.sampling.source = height_source_from_string(s.text("height_source", "per_pixel_subsample"));
    options.sampling.pixels_per_split = s.integer("pixels_per_split", 100000);
    options.sampling.seed = s.integer("seed", config.seed);
    if (s.has("score_cmd")) options.score_command = s.text("score_cmd");
    options.workers = config.workers;
    plan.inputs = {manifest};
    if (fs::exists(manifest)) {
      for (const auto& r : read_manifest(manifest)) {
        const fs::path chm(r.chm_path);
        plan.inputs.push_back(chm.is_absolute() ? chm : manifest.parent_path() / chm);
      }
    }
    plan.run = [=] { return curate_manifest(manifest, out, options).outputs; };
  } else if (stage == "evaluate") {
    EvalInputs inputs;
    inputs.pred_dir = s.path("pred_dir");
    inputs.gt_dir = s.path("gt_dir");
    if (s.has("manifest")) inputs.manifest = s.path("manifest");
    inputs.split = split_from_string(s.text("split", "test"));
    const auto eval = eval_config_from(s, config.workers);
    const auto report_path = s.path("report", (config.work_dir / "evaluate.report.json").string());
    plan.inputs = directory_files(inputs.gt_dir);
    for (auto& f : directory_files(inputs.pred_dir)) plan.inputs.push_back(std::move(f));
    if (inputs.manifest) plan.inputs.push_back(*inputs.manifest);
    plan.run = [=] {
      const auto report = evaluate_directories(inputs, eval);
      if (!report_path.parent_path().empty()) fs::create_directories(report_path.parent_path());
      write_text(report_path, report_to_json(report));
      return std::vector<fs::path>{report_path};
    };
  } else if (stage == "report") {
    const auto run_manifest = s.path("run_manifest");
    const auto dataset = s.text("dataset_id", "dataset");
    std::string default_eval = (config.work_dir / "evaluate.report.json").string();
    if (config.sections.count("evaluate") && config.sections.at("evaluate").has("report")) {
      default_eval = config.sections.at("evaluate").path("report").string();
    }
    const auto eval_report = s.path("eval_report", default_eval);
    const auto out = s.path("out", (config.work_dir / "benchmark.txt").string());
    plan.inputs = {run_manifest, eval_report};
    plan.run = [=] {
      const auto manifest = read_run_manifest(run_manifest);
      const auto metrics = metric_report_from_json(read_text(eval_report));
      std::string text = render_benchmark_table({BenchmarkRow{manifest, {{dataset, metrics}}}});
      text += "\n" + format_cost_report(manifest, estimate_cost(manifest));
      if (!out.parent_path().empty()) fs::create_directories(out.parent_path());
      write_text(out, text);
      return std::vector<fs::path>{out};
    };
  }
  return plan;
}

std::string relative_label(const fs::path& p, const fs::path& base) {
  const auto rel = fs::absolute(p).lexically_relative(base);
  return rel.empty() ? p.generic_string() : rel.generic_string();
}

std::string input_hash(const std::string& stage, const Config& config, const StagePlan& plan) {
  Sha256 h;
  h.update("canopybench-stage-v1\n" + stage + "\n");
  for (const auto& [k, v] : config.sections.at(stage).values()) h.update(k + "=" + v + "\n");
  h.update("seed=" + std::to_string(config.seed) + "\n");
  std::vector<std::pair<std::string, fs::path>> files;
  for (const auto& p : plan.inputs) files.emplace_back(relative_label(p, config.base), p);
  std::sort(files.begin(), files.end());
  for (const auto& [label, p] : files) {
    h.update(label + "\n");
    h.update(fs::exists(p) ? sha256_file(p) : std::string("<missing>"));
    h.update("\n");
  }
  return h.hex_digest();
}

bool up_to_date(const fs::path& record_path, const std::string& hash, const fs::path& base) {
  if (!fs::exists(record_path)) return false;
  try {
    const auto record = json::parse(read_text(record_path));
    if (record.at("input_hash").get<std::string>() != hash) return false;
    for (const auto& out : record.at("outputs")) {
      const fs::path p = base / out.at("path").get<std::string>();
      if (!fs::exists(p) || sha256_file(p) != out.at("sha256").get<std::string>()) return false;
    }
    return true;
  } catch (const std::exception&) {
    return false;
  }
}

}  // namespace

unsigned workers_from_env(unsigned fallback) {
  const char* env = std::getenv(kWorkersEnv);
  if (env == nullptr || *env == '\0') return fallback;
  try {
    const auto v = std::stoul(env);
    return v == 0 ? fallback : static_cast<unsigned>(v);
  } catch (const std::exception&) {
    throw Error(ErrorKind::ConfigError, std::string(kWorkersEnv) + " must be a positive integer");
  }
}

MetricReport metric_report_from_json(const std::string& report_json) {
  MetricReport r;
  try {
    const auto doc = json::parse(report_json);
    const auto& a = doc.contains("aggregate") ? doc.at("aggregate") : doc;
    r.mae = a.at("mae").get<double>();
    r.iou = a.at("iou").get<double>();
    if (!a.at("pearson").is_null()) r.pearson = a.at("pearson").get<double>();
    r.n_valid = a.at("n_valid").get<std::size_t>();
    r.n_tree_gt = a.at("n_tree_gt").get<std::size_t>();
    r.n_tree_pred = a.at("n_tree_pred").get<std::size_t>();
    r.aggregation = aggregation_from_string(a.at("aggregation").get<std::string>());
    r.n_tiles = a.value("n_tiles", std::size_t{0});
    r.n_partial_tiles = a.value("n_partial_tiles", std::size_t{0});
    r.n_pearson_undefined = a.value("n_pearson_undefined", std::size_t{0});
    r.n_empty_union = a.value("n_empty_union", std::size_t{0});
    r.iou_empty_union = a.value("iou_empty_union", false);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad metric report: ") + e.what());
  }
  return r;
}

PipelineResult run_pipeline(const fs::path& config_path) {
  const auto config = load_config(config_path);
  const auto stages_dir = config.work_dir / "stages";
  fs::create_directories(stages_dir);

  PipelineResult result;
  for (const auto& stage : kStageOrder) {
    if (!config.sections.count(stage)) continue;
    StagePlan plan;
    try {
      plan = plan_stage(stage, config);
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      if (e.kind() == ErrorKind::InvalidArgument || e.kind() == ErrorKind::InvalidRecord) {
        throw Error(ErrorKind::ConfigError, "[" + stage + "] " + e.detail());
      }
      throw StageFailure(stage, e.what());
    }
    try {
      const auto hash = input_hash(stage, config, plan);
      const auto record_path = stages_dir / (stage + ".json");
      if (up_to_date(record_path, hash, config.base)) {
        result.log.push_back("stage=" + stage + " status=skipped");
        continue;
      }
      const auto outputs = plan.run();
      json outs = json::array();
      for (const auto& p : outputs) {
        outs.push_back({{"path", relative_label(p, config.base)}, {"sha256", sha256_file(p)}});
      }
      const json record = {{"stage", stage}, {"input_hash", hash}, {"outputs", outs}};
      write_text(record_path, record.dump(2) + "\n");
      result.log.push_back("stage=" + stage + " status=ran outputs=" + std::to_string(outputs.size()));
    } catch (const StageFailure&) {
      throw;
    } catch (const Error& e) {
      if (e.kind() == ErrorKind::ConfigError) throw;
      throw StageFailure(stage, e.what());
    } catch (const std::exception& e) {
      throw StageFailure(stage, e.what());
    }
  }
  write_text(config.work_dir / "last_run.log", [&] {
    std::string s;
    for (const auto& line : result.log) s += line + "\n";
    return s;
  }());
  return result;
}

int run_pipeline_main(const fs::path& config_path, std::ostream& out, std::ostream& err) {
  try {
    const auto result = run_pipeline(config_path);
    for (const auto& line : result.log) out << line << "\n";
    return kExitOk;
  } catch (const StageFailure& e) {
    err << "error: " << e.what() << "\n";
    return kExitStageFailure;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::ConfigError ? kExitConfigError : kExitStageFailure;
  }
}

}  // namespace canopy
