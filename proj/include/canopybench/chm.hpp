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

#include <cstddef>
#include <string_view>
#include <vector>

#include "canopybench/raster.hpp"

namespace canopy {

// DSM/DTM with matching geometry, both in meters. Validated on construction.
class ElevationPair {
 public:
  ElevationPair(Raster dsm, Raster dtm);

  const Raster& dsm() const noexcept { return dsm_; }
  const Raster& dtm() const noexcept { return dtm_; }

 private:
  Raster dsm_;
  Raster dtm_;
};

struct ChmDerivation {
  Raster chm;
  std::size_t clamped = 0;  // negative differences forced to zero
};

// chm = dsm - dtm per pixel in f32; nodata wherever either input is nodata.
ChmDerivation derive_chm(const ElevationPair& pair, bool clamp_negative = true);

enum class AnomalyKind { negative, too_tall, clamped_negative };

std::string_view to_string(AnomalyKind kind);

struct Anomaly {
  AnomalyKind kind;
  std::size_t count = 0;

  bool operator==(const Anomaly&) const = default;
};

inline constexpr double kDefaultMaxHeight = 120.0;

// Negative and over-tall pixel counts; an empty result means the CHM is clean.
std::vector<Anomaly> validate_chm(const Raster& chm, double max_height = kDefaultMaxHeight);

}  // namespace canopy
