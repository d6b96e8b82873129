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
#include <iosfwd>
#include <string>
#include <vector>

#include "canopybench/error.hpp"
#include "canopybench/evaluate.hpp"

namespace canopy {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfigError = 2;
inline constexpr int kExitStageFailure = 3;

inline constexpr const char* kWorkersEnv = "CANOPY_BENCH_WORKERS";

class StageFailure : public Error {
 public:
  StageFailure(std::string stage, const std::string& cause)
      : Error(ErrorKind::StageFailure, "stage '" + stage + "': " + cause), stage_(std::move(stage)) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

struct PipelineResult {
  std::vector<std::string> log;  // one "stage=<name> status=<ran|skipped>" line per stage
};

// Runs the stages configured in an INI file in the fixed order
// ingest -> chm -> curate -> evaluate -> report. A stage is skipped when the
// SHA-256 of its settings and input files matches its record under
// <work_dir>/stages/ and every recorded output still hashes the same.
// Throws Error(ConfigError) or StageFailure.
PipelineResult run_pipeline(const std::filesystem::path& config_path);

// run_pipeline with log lines on `out`, errors on `err`, and the exit code
// convention 0 / 2 (config) / 3 (stage failure).
int run_pipeline_main(const std::filesystem::path& config_path, std::ostream& out, std::ostream& err);

// Worker count from CANOPY_BENCH_WORKERS when set, else `fallback`.
unsigned workers_from_env(unsigned fallback);

// Inverse of the aggregate block written by report_to_json.
MetricReport metric_report_from_json(const std::string& report_json);

}  // namespace canopy
