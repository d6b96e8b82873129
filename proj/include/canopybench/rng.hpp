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

namespace canopy {

// SplitMix64 (Steele, Lea & Flood 2014). The finalizer constants are part of
// the file-level reproducibility contract: tile offsets, subsamples and
// synthetic scenes depend on them bit for bit.
inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Counter-based access: draw(seed, k) is the (k+1)-th output of a SplitMix64
// stream started at `seed`.
constexpr std::uint64_t counter_draw(std::uint64_t seed, std::uint64_t counter) noexcept {
  return mix64(seed + (counter + 1) * kGoldenGamma);
}

__extension__ using uint128 = unsigned __int128;

// Maps a 64-bit draw onto [0, n) with a 128-bit multiply-shift.
constexpr std::uint64_t bounded(std::uint64_t draw, std::uint64_t n) noexcept {
  return static_cast<std::uint64_t>((static_cast<uint128>(draw) * n) >> 64);
}

// 53-bit mantissa fill, result in [0, 1).
constexpr double unit_double(std::uint64_t draw) noexcept {
  return static_cast<double>(draw >> 11) * 0x1.0p-53;
}

class SplitMix64 {
 public:
  explicit constexpr SplitMix64(std::uint64_t seed) noexcept : state_(seed) {}

  constexpr std::uint64_t next() noexcept {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  constexpr std::uint64_t next_below(std::uint64_t n) noexcept { return bounded(next(), n); }
  constexpr double next_unit() noexcept { return unit_double(next()); }

 private:
  std::uint64_t state_;
};

}  // namespace canopy
