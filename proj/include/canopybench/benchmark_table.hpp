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

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "canopybench/evaluate.hpp"
#include "canopybench/run_manifest.hpp"

namespace canopy {

struct BenchmarkRow {
  RunManifest manifest;
  std::vector<std::pair<std::string, MetricReport>> datasets;  // dataset id -> aggregate
};

enum class Mark { none, best, second };

// Marks per row for one metric column. Missing values are never marked.
// Every row holding the best value is marked best; every row holding the
// next distinct value is marked second.
std::vector<Mark> rank_column(const std::vector<std::optional<double>>& values, bool lower_is_better);

// Fixed-width table: Model | FT | #Params | GFLOPs | (MAE, IoU, PC) per dataset.
// Best cells render as **x**, second-best as _x_.
std::string render_benchmark_table(const std::vector<BenchmarkRow>& rows);

}  // namespace canopy
