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

// Baseline GeoTIFF ingestion: single band, uncompressed, strips or tiles.
// Anything outside that envelope is rejected as UnsupportedFormat rather than
// half-decoded.

#include <bit>
#include <cstring>
#include <map>
#include <optional>
#include <string>

#include "canopybench/error.hpp"
#include "canopybench/raster.hpp"

namespace canopy {

namespace {

enum Tag : std::uint16_t {
  kImageWidth = 256,
  kImageLength = 257,
  kBitsPerSample = 258,
  kCompression = 259,
  kStripOffsets = 273,
  kSamplesPerPixel = 277,
  kRowsPerStrip = 278,
  kStripByteCounts = 279,
  kPredictor = 317,
  kTileWidth = 322,
  kTileLength = 323,
  kTileOffsets = 324,
  kTileByteCounts = 325,
  kSampleFormat = 339,
  kModelPixelScale = 33550,
  kModelTiepoint = 33922,
  kGdalNodata = 42113,
};

struct Entry {
  std::uint16_t type = 0;
  std::uint32_t count = 0;
  std::size_t data_offset = 0;  // absolute offset of the value bytes
};

std::size_t type_size(std::uint16_t type) {
  switch (type) {
    case 1: case 2: case 6: case 7: return 1;
    case 3: case 8: return 2;
    case 4: case 9: case 11: return 4;
    case 5: case 10: case 12: return 8;
    default: return 0;
  }
}

class TiffReader {
 public:
  explicit TiffReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {
    if (bytes_.size() < 8) throw Error(ErrorKind::CorruptFile, "TIFF header truncated");
    if (bytes_[0] == 'I' && bytes_[1] == 'I') {
      little_ = true;
    } else if (bytes_[0] == 'M' && bytes_[1] == 'M') {
      little_ = false;
    } else {
      throw Error(ErrorKind::UnsupportedFormat, "not a TIFF file");
    }
    const auto magic = u16(2);
    if (magic == 43) throw Error(ErrorKind::UnsupportedFormat, "BigTIFF is not supported");
    if (magic != 42) throw Error(ErrorKind::UnsupportedFormat, "not a TIFF file");
    parse_ifd(u32(4));
  }

  bool has(std::uint16_t tag) const { return entries_.count(tag) != 0; }

  std::uint32_t count(std::uint16_t tag) const { return entries_.at(tag).count; }

  // Integer-valued tag element (SHORT/LONG/BYTE).
  std::uint64_t integer(std::uint16_t tag, std::size_t index = 0) const {
    const auto& e = entry(tag, index);
    const auto at = e.data_offset + index * type_size(e.type);
    switch (e.type) {
      case 1: return bytes_[at];
      case 3: return u16(at);
      case 4: return u32(at);
      default: throw Error(ErrorKind::CorruptFile, "tag " + std::to_string(tag) + " is not integral");
    }
  }

  double real(std::uint16_t tag, std::size_t index) const {
    const auto& e = entry(tag, index);
    if (e.type != 12) throw Error(ErrorKind::CorruptFile, "tag " + std::to_string(tag) + " is not DOUBLE");
    return std::bit_cast<double>(u64(e.data_offset + index * 8));
  }

  std::string ascii(std::uint16_t tag) const {
    const auto& e = entries_.at(tag);
    std::string s(reinterpret_cast<const char*>(bytes_.data() + e.data_offset), e.count);
    while (!s.empty() && (s.back() == '\0' || s.back() == ' ')) s.pop_back();
    return s;
  }

  double sample(std::size_t offset, unsigned bits, unsigned format) const {
    check_range(offset, bits / 8);
    switch (format) {
      case 1:
        switch (bits) {
          case 8: return bytes_[offset];
          case 16: return u16(offset);
          case 32: return u32(offset);
          case 64: return static_cast<double>(u64(offset));
        }
        break;
      case 2:
        switch (bits) {
          case 8: return static_cast<std::int8_t>(bytes_[offset]);
          case 16: return static_cast<std::int16_t>(u16(offset));
          case 32: return static_cast<std::int32_t>(u32(offset));
          case 64: return static_cast<double>(static_cast<std::int64_t>(u64(offset)));
        }
        break;
      case 3:
        if (bits == 32) return std::bit_cast<float>(u32(offset));
        if (bits == 64) return std::bit_cast<double>(u64(offset));
        break;
    }
    throw Error(ErrorKind::UnsupportedFormat, "sample type format=" + std::to_string(format) +
                                                  " bits=" + std::to_string(bits));
  }

 private:
  const Entry& entry(std::uint16_t tag, std::size_t index) const {
    auto it = entries_.find(tag);
    if (it == entries_.end()) throw Error(ErrorKind::CorruptFile, "missing TIFF tag " + std::to_string(tag));
    if (index >= it->second.count) throw Error(ErrorKind::CorruptFile, "TIFF tag index out of range");
    return it->second;
  }

  void check_range(std::size_t offset, std::size_t n) const {
    if (offset > bytes_.size() || n > bytes_.size() - offset) {
      throw Error(ErrorKind::CorruptFile, "TIFF offset beyond end of file");
    }
  }

  std::uint64_t read_uint(std::size_t offset, std::size_t n) const {
    check_range(offset, n);
    std::uint64_t v = 0;
    for (std::size_t i = 0; i < n; ++i) {
      const std::uint64_t byte = bytes_[offset + i];
      v |= little_ ? byte << (8 * i) : byte << (8 * (n - 1 - i));
    }
    return v;
  }

  std::uint16_t u16(std::size_t offset) const { return static_cast<std::uint16_t>(read_uint(offset, 2)); }
  std::uint32_t u32(std::size_t offset) const { return static_cast<std::uint32_t>(read_uint(offset, 4)); }
  std::uint64_t u64(std::size_t offset) const { return read_uint(offset, 8); }

  void parse_ifd(std::size_t offset) {
    const auto n = u16(offset);
    for (std::size_t i = 0; i < n; ++i) {
      const auto at = offset + 2 + i * 12;
      Entry e;
      const auto tag = u16(at);
      e.type = u16(at + 2);
      e.count = u32(at + 4);
      const auto size = type_size(e.type);
      if (size == 0) continue;  // unknown types are skipped per TIFF 6.0
      const auto total = static_cast<std::uint64_t>(size) * e.count;
      e.data_offset = total <= 4 ? at + 8 : u32(at + 8);
      check_range(e.data_offset, total);
      entries_[tag] = e;
    }
  }

  std::span<const std::uint8_t> bytes_;
  bool little_ = true;
  std::map<std::uint16_t, Entry> entries_;
};

}  // namespace

Raster decode_geotiff(std::span<const std::uint8_t> bytes) {
  TiffReader tiff(bytes);
  if (!tiff.has(kImageWidth) || !tiff.has(kImageLength)) {
    throw Error(ErrorKind::CorruptFile, "TIFF lacks image dimensions");
  }
  const auto spp = tiff.has(kSamplesPerPixel) ? tiff.integer(kSamplesPerPixel) : 1;
  if (spp != 1) {
    throw Error(ErrorKind::UnsupportedFormat, "expected a single-band GeoTIFF, found " +
                                                  std::to_string(spp) + " samples per pixel");
  }
  if (tiff.has(kCompression) && tiff.integer(kCompression) != 1) {
    throw Error(ErrorKind::UnsupportedFormat, "compressed TIFF payloads are not supported");
  }
  if (tiff.has(kPredictor) && tiff.integer(kPredictor) != 1) {
    throw Error(ErrorKind::UnsupportedFormat, "TIFF predictors are not supported");
  }
  const auto bits = static_cast<unsigned>(tiff.has(kBitsPerSample) ? tiff.integer(kBitsPerSample) : 1);
  const auto format = static_cast<unsigned>(tiff.has(kSampleFormat) ? tiff.integer(kSampleFormat) : 1);
  if (format < 1 || format > 3 || (bits != 8 && bits != 16 && bits != 32 && bits != 64)) {
    throw Error(ErrorKind::UnsupportedFormat, "non-numeric or packed TIFF sample type");
  }
  const auto bytes_per_sample = bits / 8;

  Geometry g;
  g.width = static_cast<std::uint32_t>(tiff.integer(kImageWidth));
  g.height = static_cast<std::uint32_t>(tiff.integer(kImageLength));
  if (g.width == 0 || g.height == 0) throw Error(ErrorKind::CorruptFile, "TIFF has zero extent");

  if (tiff.has(kModelPixelScale)) {
    const double sx = tiff.real(kModelPixelScale, 0);
    const double sy = tiff.real(kModelPixelScale, 1);
    if (std::abs(sx - sy) > kGeometryTolerance) {
      throw Error(ErrorKind::UnsupportedFormat, "non-square pixels are not supported");
    }
    g.pixel_size = sx;
  }
  if (tiff.has(kModelTiepoint)) {
    const double i = tiff.real(kModelTiepoint, 0);
    const double j = tiff.real(kModelTiepoint, 1);
    g.origin_x = tiff.real(kModelTiepoint, 3) - i * g.pixel_size;
    g.origin_y = tiff.real(kModelTiepoint, 4) + j * g.pixel_size;
  }

  float nodata = nodata_value();
  if (tiff.has(kGdalNodata)) {
    const auto text = tiff.ascii(kGdalNodata);
    try {
      nodata = static_cast<float>(std::stod(text));
    } catch (const std::exception&) {
      if (text != "nan" && text != "NaN") {
        throw Error(ErrorKind::CorruptFile, "unparseable GDAL_NODATA '" + text + "'");
      }
    }
  }

  std::vector<float> values(static_cast<std::size_t>(g.width) * g.height);
  if (tiff.has(kTileOffsets)) {
    const auto tw = tiff.integer(kTileWidth);
    const auto th = tiff.integer(kTileLength);
    if (tw == 0 || th == 0) throw Error(ErrorKind::CorruptFile, "zero TIFF tile size");
    const auto across = (g.width + tw - 1) / tw;
    const auto down = (g.height + th - 1) / th;
    if (tiff.count(kTileOffsets) < across * down) throw Error(ErrorKind::CorruptFile, "missing TIFF tiles");
    for (std::uint64_t t = 0; t < across * down; ++t) {
      const auto base = tiff.integer(kTileOffsets, t);
      const auto row0 = (t / across) * th;
      const auto col0 = (t % across) * tw;
      for (std::uint64_t r = 0; r < th && row0 + r < g.height; ++r) {
        for (std::uint64_t c = 0; c < tw && col0 + c < g.width; ++c) {
          const auto at = base + (r * tw + c) * bytes_per_sample;
          values[(row0 + r) * g.width + col0 + c] = static_cast<float>(tiff.sample(at, bits, format));
        }
      }
    }
  } else if (tiff.has(kStripOffsets)) {
    const auto rows_per_strip = tiff.has(kRowsPerStrip) ? tiff.integer(kRowsPerStrip) : g.height;
    if (rows_per_strip == 0) throw Error(ErrorKind::CorruptFile, "zero RowsPerStrip");
    for (std::uint64_t row = 0; row < g.height; ++row) {
      const auto strip = row / rows_per_strip;
      const auto base = tiff.integer(kStripOffsets, strip);
      const auto row_in_strip = row % rows_per_strip;
      for (std::uint64_t col = 0; col < g.width; ++col) {
        const auto at = base + (row_in_strip * g.width + col) * bytes_per_sample;
        values[row * g.width + col] = static_cast<float>(tiff.sample(at, bits, format));
      }
    }
  } else {
    throw Error(ErrorKind::CorruptFile, "TIFF has neither strips nor tiles");
  }
  return Raster(g, std::move(values), Units::meters, nodata);
}

}  // namespace canopy
