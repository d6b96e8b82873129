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

#include "canopybench/tiling.hpp"

#include <algorithm>

#include "canopybench/error.hpp"
#include "canopybench/rng.hpp"

namespace canopy {

std::vector<Tile> random_tiles(const Raster& raster, std::uint32_t size, std::uint32_t count,
                               std::uint64_t seed, const std::string& parent_id) {
  if (size == 0 || size > std::min(raster.width(), raster.height())) {
    throw Error(ErrorKind::TileTooLarge, "tile size " + std::to_string(size) + " does not fit a " +
                                             std::to_string(raster.width()) + "x" +
                                             std::to_string(raster.height()) + " raster");
  }
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "tile count must be at least 1");

  const std::uint64_t row_slots = raster.height() - size + 1;
  const std::uint64_t col_slots = raster.width() - size + 1;
  std::vector<Tile> tiles;
  tiles.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    Tile t;
    t.parent_id = parent_id;
    t.row_off = static_cast<std::uint32_t>(bounded(counter_draw(seed, 2 * i), row_slots));
    t.col_off = static_cast<std::uint32_t>(bounded(counter_draw(seed, 2 * i + 1), col_slots));
    t.size = t.rows = t.cols = size;
    tiles.push_back(std::move(t));
  }
  return tiles;
}

std::vector<Tile> grid_tiles(const Raster& raster, std::uint32_t size, const std::string& parent_id) {
  if (size == 0) throw Error(ErrorKind::InvalidArgument, "tile size must be at least 1");
  std::vector<Tile> tiles;
  for (std::uint32_t r = 0; r < raster.height(); r += size) {
    for (std::uint32_t c = 0; c < raster.width(); c += size) {
      Tile t;
      t.parent_id = parent_id;
      t.row_off = r;
      t.col_off = c;
      t.size = size;
      t.rows = std::min(size, raster.height() - r);
      t.cols = std::min(size, raster.width() - c);
      t.partial = t.rows < size || t.cols < size;
      tiles.push_back(std::move(t));
      if (raster.width() - c <= size) break;
    }
    if (raster.height() - r <= size) break;
  }
  return tiles;
}

Raster crop(const Raster& raster, const Tile& tile) {
  if (tile.rows == 0 || tile.cols == 0 || tile.row_off + tile.rows > raster.height() ||
      tile.col_off + tile.cols > raster.width()) {
    throw Error(ErrorKind::InvalidArgument, "tile lies outside its parent raster");
  }
  Geometry g = raster.geometry();
  g.width = tile.cols;
  g.height = tile.rows;
  g.origin_x += tile.col_off * g.pixel_size;
  g.origin_y -= tile.row_off * g.pixel_size;
  std::vector<float> values;
  values.reserve(static_cast<std::size_t>(tile.rows) * tile.cols);
  const auto src = raster.values();
  for (std::uint32_t r = 0; r < tile.rows; ++r) {
    const auto begin = src.begin() + static_cast<std::ptrdiff_t>((tile.row_off + r) * static_cast<std::size_t>(raster.width()) + tile.col_off);
    values.insert(values.end(), begin, begin + tile.cols);
  }
  return Raster(g, std::move(values), raster.units(), raster.nodata_sentinel());
}

}  // namespace canopy
