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
#include <string>
#include <vector>

#include "canopybench/raster.hpp"

namespace canopy {

// A square window into a parent raster. Grid tiles at the right/bottom edge
// may be smaller than `size`; their true extent is in rows/cols and `partial`
// is set.
struct Tile {
  std::string parent_id;
  std::uint32_t row_off = 0;
  std::uint32_t col_off = 0;
  std::uint32_t size = 0;
  std::uint32_t rows = 0;
  std::uint32_t cols = 0;
  bool partial = false;

  bool operator==(const Tile&) const = default;
};

// Offsets come from counter_draw(seed, 2i) for rows and counter_draw(seed, 2i+1)
// for columns, mapped onto [0, extent - size] with bounded().
std::vector<Tile> random_tiles(const Raster& raster, std::uint32_t size, std::uint32_t count,
                               std::uint64_t seed, const std::string& parent_id = {});

// Row-major, non-overlapping cover of the raster.
std::vector<Tile> grid_tiles(const Raster& raster, std::uint32_t size, const std::string& parent_id = {});

// Copy of the tile region; origin shifted so the crop stays georeferenced.
Raster crop(const Raster& raster, const Tile& tile);

}  // namespace canopy
