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

#include "canopybench/chm.hpp"

#include "canopybench/error.hpp"

namespace canopy {

ElevationPair::ElevationPair(Raster dsm, Raster dtm) : dsm_(std::move(dsm)), dtm_(std::move(dtm)) {
  if (!same_geometry(dsm_.geometry(), dtm_.geometry())) {
    throw Error(ErrorKind::GeometryMismatch, "DSM and DTM grids differ");
  }
  if (dsm_.units() != Units::meters || dtm_.units() != Units::meters) {
    throw Error(ErrorKind::UnitsMismatch, "DSM and DTM must both be in meters");
  }
}

ChmDerivation derive_chm(const ElevationPair& pair, bool clamp_negative) {
  const auto dsm = pair.dsm().values();
  const auto dtm = pair.dtm().values();
  std::vector<float> out(dsm.size());
  std::size_t clamped = 0;
  for (std::size_t i = 0; i < out.size(); ++i) {
    if (!is_valid(dsm[i]) || !is_valid(dtm[i])) {
      out[i] = nodata_value();
      continue;
    }
    float h = dsm[i] - dtm[i];
    if (clamp_negative && h < 0.0f) {
      h = 0.0f;
      ++clamped;
    }
    out[i] = h;
  }
  return {pair.dsm().with_values(std::move(out), Units::meters), clamped};
}

std::string_view to_string(AnomalyKind kind) {
  switch (kind) {
    case AnomalyKind::negative: return "negative";
    case AnomalyKind::too_tall: return "too_tall";
    case AnomalyKind::clamped_negative: return "clamped_negative";
  }
  return "unknown";
}

std::vector<Anomaly> validate_chm(const Raster& chm, double max_height) {
  if (chm.units() != Units::meters) {
    throw Error(ErrorKind::UnitsMismatch, "CHM validation expects heights in meters");
  }
  std::size_t negative = 0;
  std::size_t too_tall = 0;
  for (float v : chm.values()) {
    if (!is_valid(v)) continue;
    if (v < 0.0f) ++negative;
    if (v > max_height) ++too_tall;
  }
  std::vector<Anomaly> anomalies;
  if (negative > 0) anomalies.push_back({AnomalyKind::negative, negative});
  if (too_tall > 0) anomalies.push_back({AnomalyKind::too_tall, too_tall});
  return anomalies;
}

}  // namespace canopy
