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
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "canopybench/ks.hpp"

namespace canopy {

enum class Split { train, val, test, excluded };
enum class ExclusionReason { none, low_quality, empty_canopy };

std::string_view to_string(Split split);
std::string_view to_string(ExclusionReason reason);
Split split_from_string(std::string_view name);
ExclusionReason exclusion_from_string(std::string_view name);

struct SampleRecord {
  std::string id;
  std::string image_path;
  std::string chm_path;
  std::optional<double> quality_score;  // [0, 5] when present
  Split split = Split::train;
  ExclusionReason exclusion_reason = ExclusionReason::none;

  bool excluded() const noexcept { return split == Split::excluded; }
  bool operator==(const SampleRecord&) const = default;
};

// Throws InvalidRecord on an out-of-range score or a split/reason mismatch.
void validate_record(const SampleRecord& record);

inline constexpr double kDefaultQualityThreshold = 2.5;

// Marks records scoring strictly below `threshold` as excluded/low_quality.
// Order and length are preserved; records already excluded keep their reason.
std::vector<SampleRecord> filter_by_quality(std::vector<SampleRecord> records, double threshold);

// Marks records whose CHM has no valid pixel above zero as excluded/empty_canopy.
// Relative chm paths resolve against base_dir. Already-excluded records are
// not read. Raster errors are rethrown with the record id prepended.
std::vector<SampleRecord> filter_empty_canopy(std::vector<SampleRecord> records,
                                              const std::filesystem::path& base_dir = {},
                                              unsigned workers = 1);

enum class HeightSource { per_pixel_subsample, per_sample_max };

std::string_view to_string(HeightSource source);
HeightSource height_source_from_string(std::string_view name);

struct HeightSampling {
  HeightSource source = HeightSource::per_pixel_subsample;
  std::size_t pixels_per_split = 100000;
  std::uint64_t seed = 0;
};

// Height populations per non-excluded split. per_pixel_subsample keeps a
// reservoir of valid pixels (Algorithm R, SplitMix64 seeded identically for
// every split, records visited in manifest order); per_sample_max takes one
// maximum valid height per sample.
std::map<Split, std::vector<double>> collect_split_heights(const std::vector<SampleRecord>& records,
                                                           const HeightSampling& sampling,
                                                           const std::filesystem::path& base_dir = {});

struct SplitComparison {
  std::string pair;  // "train-val" or "train-test"
  KsResult result;
};

std::vector<SplitComparison> split_distribution_report(const std::vector<SampleRecord>& records,
                                                       const HeightSampling& sampling,
                                                       const std::filesystem::path& base_dir = {});

// `pair=train-val D=<d> p=<p> n1=<n1> n2=<n2>`
std::string format_ks_line(const SplitComparison& comparison);

// Fills missing scores by running `command '<image_path>'` through the shell
// and parsing the first number on its standard output.
std::vector<SampleRecord> score_with_command(std::vector<SampleRecord> records, const std::string& command,
                                             const std::filesystem::path& base_dir = {});

std::vector<SampleRecord> read_manifest(const std::filesystem::path& path);
std::vector<SampleRecord> parse_manifest(std::string_view json_text);
std::string manifest_to_json(const std::vector<SampleRecord>& records);
void write_manifest(const std::vector<SampleRecord>& records, const std::filesystem::path& path);

}  // namespace canopy
