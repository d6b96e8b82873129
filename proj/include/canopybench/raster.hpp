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

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <span>
#include <string_view>
#include <vector>

namespace canopy {

enum class Units : std::uint8_t { meters = 0, relative = 1, score = 2, dimensionless = 3 };

std::string_view to_string(Units units);
Units units_from_string(std::string_view name);

struct Geometry {
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  double pixel_size = 1.0;
  double origin_x = 0.0;  // map x of the north-west corner
  double origin_y = 0.0;  // map y of the north-west corner
};

inline constexpr double kGeometryTolerance = 1e-6;

// Dimensions exactly, pixel size and origin within kGeometryTolerance meters.
bool same_geometry(const Geometry& a, const Geometry& b, double tolerance = kGeometryTolerance);

inline bool is_valid(float v) noexcept { return !std::isnan(v); }

inline float nodata_value() noexcept { return std::numeric_limits<float>::quiet_NaN(); }

// Single-band float grid, row-major, row 0 northmost.
//
// Invalid pixels are stored as a canonical quiet NaN. `nodata_sentinel` is the
// value the raster declares on disk; the constructor folds any element equal
// to it into NaN so downstream code has a single notion of "invalid".
class Raster {
 public:
  Raster() = default;
  Raster(Geometry geometry, std::vector<float> values, Units units = Units::meters,
         float nodata_sentinel = nodata_value());

  static Raster filled(Geometry geometry, float value, Units units = Units::meters,
                       float nodata_sentinel = nodata_value());

  const Geometry& geometry() const noexcept { return geometry_; }
  std::uint32_t width() const noexcept { return geometry_.width; }
  std::uint32_t height() const noexcept { return geometry_.height; }
  double pixel_size() const noexcept { return geometry_.pixel_size; }
  double origin_x() const noexcept { return geometry_.origin_x; }
  double origin_y() const noexcept { return geometry_.origin_y; }
  Units units() const noexcept { return units_; }
  float nodata_sentinel() const noexcept { return nodata_; }

  std::size_t size() const noexcept { return values_.size(); }
  std::span<const float> values() const noexcept { return values_; }

  float at(std::size_t row, std::size_t col) const { return values_[row * geometry_.width + col]; }
  bool valid_at(std::size_t index) const { return is_valid(values_[index]); }
  std::size_t count_valid() const noexcept;

  // Derived raster with the same geometry/sentinel and new contents.
  Raster with_values(std::vector<float> values, Units units) const;

 private:
  Geometry geometry_{};
  Units units_ = Units::meters;
  float nodata_ = nodata_value();
  std::vector<float> values_;
};

// Same shape, same units, same sentinel bits, and every value bit-identical.
bool bitwise_equal(const Raster& a, const Raster& b);

enum class RasterFormat { chmf, geotiff };

RasterFormat format_from_path(const std::filesystem::path& path);

Raster read_raster(const std::filesystem::path& path, RasterFormat format);
Raster read_raster(const std::filesystem::path& path);
void write_raster(const Raster& raster, const std::filesystem::path& path);

// CHMF v1 codec on in-memory buffers; the file functions are thin wrappers.
inline constexpr std::size_t kChmfHeaderSize = 41;
std::vector<std::uint8_t> encode_chmf(const Raster& raster);
Raster decode_chmf(std::span<const std::uint8_t> bytes);

// Baseline GeoTIFF: one sample per pixel, no compression.
Raster decode_geotiff(std::span<const std::uint8_t> bytes);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes);

}  // namespace canopy
