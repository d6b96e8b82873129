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
#include <string>
#include <string_view>

namespace canopy {

// Defaults back-derived from a 2.61 h / $2.09 fine-tuning run and from
// 0.14 kg CO2 at 1.5 h with a 300 W GPU. Configurable; not measured values.
inline constexpr double kDefaultPricePerHour = 0.80;
inline constexpr double kDefaultGpuPowerKw = 0.3;
inline constexpr double kDefaultCarbonIntensity = 0.311;

struct RunManifest {
  std::string model_id;
  double n_params_millions = 0.0;
  double gflops = 0.0;
  bool finetuned = false;
  std::string dataset_id;
  double wall_hours = 0.0;
  std::string gpu_name = "NVIDIA RTX A6000";
  double gpu_power_kw = kDefaultGpuPowerKw;
  double price_per_hour = kDefaultPricePerHour;
  double carbon_intensity = kDefaultCarbonIntensity;  // kg CO2 per kWh

  bool operator==(const RunManifest&) const = default;
};

void validate_run_manifest(const RunManifest& m);

struct CostReport {
  double dollars = 0.0;
  double kg_co2 = 0.0;
  double kwh = 0.0;
};

// Unrounded: kwh = wall_hours * gpu_power_kw, kg_co2 = kwh * carbon_intensity,
// dollars = wall_hours * price_per_hour.
CostReport estimate_cost(const RunManifest& manifest);

// Two-decimal display plus a footer explaining where the constants came from.
std::string format_cost_report(const RunManifest& manifest, const CostReport& cost);

std::string run_manifest_to_json(const RunManifest& m);
RunManifest run_manifest_from_json(std::string_view text);
RunManifest read_run_manifest(const std::filesystem::path& path);

}  // namespace canopy
