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

#include "canopybench/curation.hpp"

#include <array>
#include <cmath>
#include <cstdio>
#include <memory>
#include <sstream>

#include "canopybench/error.hpp"
#include "canopybench/parallel.hpp"
#include "canopybench/raster.hpp"
#include "canopybench/rng.hpp"
#include "json.hpp"

namespace canopy {

namespace {

using nlohmann::json;

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

Raster read_record_chm(const SampleRecord& r, const std::filesystem::path& base_dir) {
  try {
    return read_raster(resolve(base_dir, r.chm_path));
  } catch (const Error& e) {
    throw Error(e.kind(), "record '" + r.id + "': " + e.detail());
  }
}

json record_to_json(const SampleRecord& r) {
  json j;
  j["id"] = r.id;
  j["image_path"] = r.image_path;
  j["chm_path"] = r.chm_path;
  j["quality_score"] = r.quality_score ? json(*r.quality_score) : json(nullptr);
  j["split"] = std::string(to_string(r.split));
  j["exclusion_reason"] = std::string(to_string(r.exclusion_reason));
  return j;
}

SampleRecord record_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorKind::InvalidRecord, "manifest entries must be objects");
  SampleRecord r;
  try {
    r.id = j.at("id").get<std::string>();
    r.image_path = j.value("image_path", std::string{});
    r.chm_path = j.at("chm_path").get<std::string>();
    if (j.contains("quality_score") && !j.at("quality_score").is_null()) {
      r.quality_score = j.at("quality_score").get<double>();
    }
    r.split = split_from_string(j.value("split", std::string("train")));
    r.exclusion_reason = exclusion_from_string(j.value("exclusion_reason", std::string("none")));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidRecord, std::string("malformed record: ") + e.what());
  }
  validate_record(r);
  return r;
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::train: return "train";
    case Split::val: return "val";
    case Split::test: return "test";
    case Split::excluded: return "excluded";
  }
  return "unknown";
}

std::string_view to_string(ExclusionReason reason) {
  switch (reason) {
    case ExclusionReason::none: return "none";
    case ExclusionReason::low_quality: return "low_quality";
    case ExclusionReason::empty_canopy: return "empty_canopy";
  }
  return "unknown";
}

Split split_from_string(std::string_view name) {
  if (name == "train") return Split::train;
  if (name == "val") return Split::val;
  if (name == "test") return Split::test;
  if (name == "excluded") return Split::excluded;
  throw Error(ErrorKind::InvalidRecord, "unknown split '" + std::string(name) + "'");
}

ExclusionReason exclusion_from_string(std::string_view name) {
  if (name == "none") return ExclusionReason::none;
  if (name == "low_quality") return ExclusionReason::low_quality;
  if (name == "empty_canopy") return ExclusionReason::empty_canopy;
  throw Error(ErrorKind::InvalidRecord, "unknown exclusion reason '" + std::string(name) + "'");
}

std::string_view to_string(HeightSource source) {
  return source == HeightSource::per_pixel_subsample ? "per_pixel_subsample" : "per_sample_max";
}

HeightSource height_source_from_string(std::string_view name) {
  if (name == "per_pixel_subsample") return HeightSource::per_pixel_subsample;
  if (name == "per_sample_max") return HeightSource::per_sample_max;
  throw Error(ErrorKind::InvalidArgument, "unknown height source '" + std::string(name) + "'");
}

void validate_record(const SampleRecord& r) {
  if (r.quality_score && !(*r.quality_score >= 0.0 && *r.quality_score <= 5.0)) {
    throw Error(ErrorKind::InvalidRecord, "record '" + r.id + "' has quality_score outside [0, 5]");
  }
  if ((r.split == Split::excluded) != (r.exclusion_reason != ExclusionReason::none)) {
    throw Error(ErrorKind::InvalidRecord,
                "record '" + r.id + "': split=excluded must pair with a non-none exclusion_reason");
  }
}

std::vector<SampleRecord> filter_by_quality(std::vector<SampleRecord> records, double threshold) {
  for (const auto& r : records) {
    if (!r.quality_score) throw Error(ErrorKind::MissingScore, "record '" + r.id + "' has no quality_score");
  }
  for (auto& r : records) {
    if (!r.excluded() && *r.quality_score < threshold) {
      r.split = Split::excluded;
      r.exclusion_reason = ExclusionReason::low_quality;
    }
  }
  return records;
}

std::vector<SampleRecord> filter_empty_canopy(std::vector<SampleRecord> records,
                                              const std::filesystem::path& base_dir, unsigned workers) {
  std::vector<char> empty(records.size(), 0);
  parallel_for(records.size(), workers, [&](std::size_t i) {
    if (records[i].excluded()) return;
    const auto chm = read_record_chm(records[i], base_dir);
    const auto values = chm.values();
    empty[i] = std::none_of(values.begin(), values.end(), [](float v) { return is_valid(v) && v > 0.0f; });
  });
  for (std::size_t i = 0; i < records.size(); ++i) {
    if (empty[i]) {
      records[i].split = Split::excluded;
      records[i].exclusion_reason = ExclusionReason::empty_canopy;
    }
  }
  return records;
}

std::map<Split, std::vector<double>> collect_split_heights(const std::vector<SampleRecord>& records,
                                                           const HeightSampling& sampling,
                                                           const std::filesystem::path& base_dir) {
  std::map<Split, std::vector<double>> heights;
  for (auto split : {Split::train, Split::val, Split::test}) {
    auto& out = heights[split];
    SplitMix64 rng(sampling.seed);
    std::uint64_t seen = 0;
    for (const auto& r : records) {
      if (r.split != split) continue;
      const auto chm = read_record_chm(r, base_dir);
      if (sampling.source == HeightSource::per_sample_max) {
        double best = -INFINITY;
        for (float v : chm.values()) {
          if (is_valid(v)) best = std::max(best, static_cast<double>(v));
        }
        if (std::isfinite(best)) out.push_back(best);
        continue;
      }
      for (float v : chm.values()) {
        if (!is_valid(v)) continue;
        if (out.size() < sampling.pixels_per_split) {
          out.push_back(v);
        } else {
          const auto slot = rng.next_below(seen + 1);
          if (slot < sampling.pixels_per_split) out[slot] = v;
        }
        ++seen;
      }
    }
  }
  return heights;
}

std::vector<SplitComparison> split_distribution_report(const std::vector<SampleRecord>& records,
                                                       const HeightSampling& sampling,
                                                       const std::filesystem::path& base_dir) {
  for (auto split : {Split::train, Split::val, Split::test}) {
    if (std::none_of(records.begin(), records.end(), [&](const SampleRecord& r) { return r.split == split; })) {
      throw Error(ErrorKind::EmptySplit, "no records in split '" + std::string(to_string(split)) + "'");
    }
  }
  const auto heights = collect_split_heights(records, sampling, base_dir);
  for (const auto& [split, values] : heights) {
    if (values.empty()) {
      throw Error(ErrorKind::EmptySplit, "split '" + std::string(to_string(split)) + "' has no valid heights");
    }
  }
  return {
      {"train-val", ks_two_sample(heights.at(Split::train), heights.at(Split::val))},
      {"train-test", ks_two_sample(heights.at(Split::train), heights.at(Split::test))},
  };
}

std::string format_ks_line(const SplitComparison& c) {
  char buf[160];
  std::snprintf(buf, sizeof buf, "pair=%s D=%.6f p=%.6g n1=%zu n2=%zu", c.pair.c_str(), c.result.statistic,
                c.result.p_value, c.result.n1, c.result.n2);
  return buf;
}

std::vector<SampleRecord> score_with_command(std::vector<SampleRecord> records, const std::string& command,
                                             const std::filesystem::path& base_dir) {
  for (auto& r : records) {
    if (r.quality_score) continue;
    auto image = resolve(base_dir, r.image_path).string();
    std::string quoted = "'";
    for (char c : image) quoted += c == '\'' ? std::string("'\\''") : std::string(1, c);
    quoted += "'";
    const auto full = command + " " + quoted;
    std::unique_ptr<FILE, int (*)(FILE*)> pipe(popen(full.c_str(), "r"), pclose);
    if (!pipe) throw Error(ErrorKind::IoFailure, "cannot run score command for '" + r.id + "'");
    std::string output;
    std::array<char, 256> buf{};
    while (std::fgets(buf.data(), buf.size(), pipe.get())) output += buf.data();
    double score = 0.0;
    std::istringstream in(output);
    if (!(in >> score)) {
      throw Error(ErrorKind::MissingScore, "score command printed no number for '" + r.id + "'");
    }
    r.quality_score = score;
    validate_record(r);
  }
  return records;
}

std::vector<SampleRecord> parse_manifest(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::InvalidRecord, std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_array()) throw Error(ErrorKind::InvalidRecord, "manifest must be a JSON array");
  std::vector<SampleRecord> records;
  records.reserve(doc.size());
  for (const auto& item : doc) records.push_back(record_from_json(item));
  return records;
}

std::vector<SampleRecord> read_manifest(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  return parse_manifest(std::string_view(reinterpret_cast<const char*>(bytes.data()), bytes.size()));
}

std::string manifest_to_json(const std::vector<SampleRecord>& records) {
  json doc = json::array();
  for (const auto& r : records) doc.push_back(record_to_json(r));
  return doc.dump(2) + "\n";
}

void write_manifest(const std::vector<SampleRecord>& records, const std::filesystem::path& path) {
  const auto text = manifest_to_json(records);
  write_file_bytes(path, std::span(reinterpret_cast<const std::uint8_t*>(text.data()), text.size()));
}

}  // namespace canopy
