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

#include "canopybench/raster.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include "canopybench/error.hpp"

namespace canopy {

namespace {

constexpr std::uint8_t kChmfMagic[5] = {'C', 'H', 'M', 'F', 0x01};
constexpr std::uint32_t kCanonicalNan = 0x7FC00000U;

float canonical_nan() { return std::bit_cast<float>(kCanonicalNan); }

void validate_geometry(const Geometry& g) {
  if (g.width == 0 || g.height == 0) {
    throw Error(ErrorKind::InvalidArgument, "raster dimensions must be positive");
  }
  if (!(g.pixel_size > 0.0) || !std::isfinite(g.pixel_size)) {
    throw Error(ErrorKind::InvalidArgument, "pixel_size must be a positive finite number");
  }
  if (!std::isfinite(g.origin_x) || !std::isfinite(g.origin_y)) {
    throw Error(ErrorKind::InvalidArgument, "origin must be finite");
  }
}

bool matches_sentinel(float v, float sentinel) {
  if (std::isnan(v)) return true;
  return !std::isnan(sentinel) && v == sentinel;
}

class ByteWriter {
 public:
  explicit ByteWriter(std::vector<std::uint8_t>& out) : out_(out) {}

  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    if constexpr (sizeof(T) == 1) {
      out_.push_back(static_cast<std::uint8_t>(value));
    } else {
      using U = std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>;
      auto bits = std::bit_cast<U>(value);
      for (std::size_t i = 0; i < sizeof(T); ++i) {
        out_.push_back(static_cast<std::uint8_t>(bits >> (8 * i)));
      }
    }
  }

 private:
  std::vector<std::uint8_t>& out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  template <typename T>
  T get() {
    using U = std::conditional_t<sizeof(T) == 1, std::uint8_t,
                                 std::conditional_t<sizeof(T) == 4, std::uint32_t, std::uint64_t>>;
    U bits = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      bits |= static_cast<U>(static_cast<U>(in_[pos_ + i]) << (8 * i));
    }
    pos_ += sizeof(T);
    return std::bit_cast<T>(bits);
  }

  std::size_t position() const { return pos_; }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view to_string(Units units) {
  switch (units) {
    case Units::meters: return "meters";
    case Units::relative: return "relative";
    case Units::score: return "score";
    case Units::dimensionless: return "dimensionless";
  }
  return "unknown";
}

Units units_from_string(std::string_view name) {
  if (name == "meters") return Units::meters;
  if (name == "relative") return Units::relative;
  if (name == "score") return Units::score;
  if (name == "dimensionless") return Units::dimensionless;
  throw Error(ErrorKind::InvalidArgument, "unknown units tag '" + std::string(name) + "'");
}

bool same_geometry(const Geometry& a, const Geometry& b, double tolerance) {
  return a.width == b.width && a.height == b.height &&
         std::abs(a.pixel_size - b.pixel_size) <= tolerance &&
         std::abs(a.origin_x - b.origin_x) <= tolerance &&
         std::abs(a.origin_y - b.origin_y) <= tolerance;
}

Raster::Raster(Geometry geometry, std::vector<float> values, Units units, float nodata_sentinel)
    : geometry_(geometry), units_(units), nodata_(nodata_sentinel), values_(std::move(values)) {
  validate_geometry(geometry_);
  const auto expected = static_cast<std::size_t>(geometry_.width) * geometry_.height;
  if (values_.size() != expected) {
    throw Error(ErrorKind::InvalidArgument,
                "values length " + std::to_string(values_.size()) + " != width*height " +
                    std::to_string(expected));
  }
  if (std::isnan(nodata_)) nodata_ = canonical_nan();
  for (auto& v : values_) {
    if (matches_sentinel(v, nodata_)) v = canonical_nan();
  }
}

Raster Raster::filled(Geometry geometry, float value, Units units, float nodata_sentinel) {
  std::vector<float> values(static_cast<std::size_t>(geometry.width) * geometry.height, value);
  return Raster(geometry, std::move(values), units, nodata_sentinel);
}

std::size_t Raster::count_valid() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(values_.begin(), values_.end(), [](float v) { return is_valid(v); }));
}

Raster Raster::with_values(std::vector<float> values, Units units) const {
  return Raster(geometry_, std::move(values), units, nodata_);
}

bool bitwise_equal(const Raster& a, const Raster& b) {
  const auto& ga = a.geometry();
  const auto& gb = b.geometry();
  if (ga.width != gb.width || ga.height != gb.height) return false;
  if (std::bit_cast<std::uint64_t>(ga.pixel_size) != std::bit_cast<std::uint64_t>(gb.pixel_size) ||
      std::bit_cast<std::uint64_t>(ga.origin_x) != std::bit_cast<std::uint64_t>(gb.origin_x) ||
      std::bit_cast<std::uint64_t>(ga.origin_y) != std::bit_cast<std::uint64_t>(gb.origin_y)) {
    return false;
  }
  if (a.units() != b.units()) return false;
  if (std::bit_cast<std::uint32_t>(a.nodata_sentinel()) !=
      std::bit_cast<std::uint32_t>(b.nodata_sentinel())) {
    return false;
  }
  return std::memcmp(a.values().data(), b.values().data(), a.size() * sizeof(float)) == 0;
}

std::vector<std::uint8_t> encode_chmf(const Raster& raster) {
  std::vector<std::uint8_t> out;
  out.reserve(kChmfHeaderSize + raster.size() * 4);
  ByteWriter w(out);
  for (auto b : kChmfMagic) w.put(b);
  w.put(raster.width());
  w.put(raster.height());
  w.put(static_cast<std::uint8_t>(raster.units()));
  w.put(std::uint8_t{0});
  w.put(std::uint8_t{0});
  w.put(std::uint8_t{0});
  w.put(raster.nodata_sentinel());
  w.put(static_cast<float>(raster.pixel_size()));
  w.put(raster.origin_x());
  w.put(raster.origin_y());
  const float sentinel = raster.nodata_sentinel();
  for (float v : raster.values()) w.put(is_valid(v) ? v : sentinel);
  return out;
}

Raster decode_chmf(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < kChmfHeaderSize) {
    throw Error(ErrorKind::CorruptFile, "CHMF file shorter than its 41-byte header");
  }
  if (!std::equal(std::begin(kChmfMagic), std::end(kChmfMagic), bytes.begin())) {
    throw Error(ErrorKind::CorruptFile, "bad CHMF magic");
  }
  ByteReader r(bytes.subspan(5));
  Geometry g;
  g.width = r.get<std::uint32_t>();
  g.height = r.get<std::uint32_t>();
  const auto units_tag = r.get<std::uint8_t>();
  if (units_tag > 3) throw Error(ErrorKind::CorruptFile, "unknown units tag");
  for (int i = 0; i < 3; ++i) {
    if (r.get<std::uint8_t>() != 0) throw Error(ErrorKind::CorruptFile, "reserved bytes not zero");
  }
  const auto nodata = r.get<float>();
  g.pixel_size = r.get<float>();
  g.origin_x = r.get<double>();
  g.origin_y = r.get<double>();

  const auto pixels = static_cast<std::uint64_t>(g.width) * g.height;
  if (bytes.size() - kChmfHeaderSize != pixels * 4) {
    throw Error(ErrorKind::CorruptFile, "payload length " +
                                            std::to_string(bytes.size() - kChmfHeaderSize) +
                                            " != width*height*4 (" + std::to_string(pixels * 4) +
                                            ")");
  }
  if (g.width == 0 || g.height == 0 || !(g.pixel_size > 0.0)) {
    throw Error(ErrorKind::CorruptFile, "invalid CHMF geometry");
  }
  ByteReader payload(bytes.subspan(kChmfHeaderSize));
  std::vector<float> values(pixels);
  for (auto& v : values) v = payload.get<float>();
  return Raster(g, std::move(values), static_cast<Units>(units_tag), nodata);
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::IoFailure, "cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (in.bad()) throw Error(ErrorKind::IoFailure, "read failed for " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::IoFailure, "cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  out.close();
  if (!out) throw Error(ErrorKind::IoFailure, "write failed for " + path.string());
}

RasterFormat format_from_path(const std::filesystem::path& path) {
  auto ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(), [](unsigned char c) { return std::tolower(c); });
  if (ext == ".chmf") return RasterFormat::chmf;
  if (ext == ".tif" || ext == ".tiff") return RasterFormat::geotiff;
  throw Error(ErrorKind::UnsupportedFormat, "unrecognized raster extension on " + path.string());
}

Raster read_raster(const std::filesystem::path& path, RasterFormat format) {
  const auto bytes = read_file_bytes(path);
  try {
    return format == RasterFormat::chmf ? decode_chmf(bytes) : decode_geotiff(bytes);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

Raster read_raster(const std::filesystem::path& path) { return read_raster(path, format_from_path(path)); }

void write_raster(const Raster& raster, const std::filesystem::path& path) {
  write_file_bytes(path, encode_chmf(raster));
}

}  // namespace canopy
