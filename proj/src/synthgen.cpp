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

#include "canopybench/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "canopybench/error.hpp"
#include "canopybench/rng.hpp"
#include "json.hpp"

namespace canopy {

namespace {

using nlohmann::json;

constexpr float kSynthNodata = -9999.0f;
constexpr std::uint64_t kNoiseStream = 0x6E6F697365ULL;  // "noise"
constexpr std::uint64_t kDeskStream = 0x6465736B7631ULL;  // "deskv1"

double quantize(double v) { return std::round(v / kHeightQuantum) * kHeightQuantum; }

// Positive canopy never rounds down to bare ground.
double quantize_canopy(double v) {
  if (v <= 0.0) return 0.0;
  return std::max(std::round(v / kHeightQuantum), 1.0) * kHeightQuantum;
}

double smoothstep(double t) { return t * t * (3.0 - 2.0 * t); }

double lattice(std::uint64_t octave_seed, std::int64_t ix, std::int64_t iy) {
  const auto key = (static_cast<std::uint64_t>(iy) << 32) ^ static_cast<std::uint32_t>(ix);
  return 2.0 * unit_double(counter_draw(octave_seed, key)) - 1.0;
}

}  // namespace

std::string_view to_string(CrownShape shape) { return shape == CrownShape::paraboloid ? "paraboloid" : "cone"; }

CrownShape crown_shape_from_string(std::string_view name) {
  if (name == "paraboloid") return CrownShape::paraboloid;
  if (name == "cone") return CrownShape::cone;
  throw Error(ErrorKind::InvalidArgument, "unknown crown shape '" + std::string(name) + "'");
}

std::string_view to_string(Perturbation model) {
  switch (model) {
    case Perturbation::scale: return "scale";
    case Perturbation::blur: return "blur";
    case Perturbation::dropout_small_trees: return "dropout_small_trees";
  }
  return "unknown";
}

Perturbation perturbation_from_string(std::string_view name) {
  if (name == "scale") return Perturbation::scale;
  if (name == "blur") return Perturbation::blur;
  if (name == "dropout_small_trees") return Perturbation::dropout_small_trees;
  throw Error(ErrorKind::InvalidArgument, "unknown perturbation '" + std::string(name) + "'");
}

double terrain_noise(std::uint64_t seed, double row, double col) {
  double total = 0.0;
  double norm = 0.0;
  double period = kTerrainBasePeriod;
  double amplitude = 1.0;
  for (int octave = 0; octave < kTerrainOctaves; ++octave) {
    const auto octave_seed = counter_draw(seed, static_cast<std::uint64_t>(octave));
    const double gx = col / period;
    const double gy = row / period;
    const auto ix = static_cast<std::int64_t>(std::floor(gx));
    const auto iy = static_cast<std::int64_t>(std::floor(gy));
    const double sx = smoothstep(gx - static_cast<double>(ix));
    const double sy = smoothstep(gy - static_cast<double>(iy));
    const double top = std::lerp(lattice(octave_seed, ix, iy), lattice(octave_seed, ix + 1, iy), sx);
    const double bottom = std::lerp(lattice(octave_seed, ix, iy + 1), lattice(octave_seed, ix + 1, iy + 1), sx);
    total += amplitude * std::lerp(top, bottom, sy);
    norm += amplitude;
    period *= 0.5;
    amplitude *= 0.5;
  }
  return total / norm;
}

double crown_profile(const Crown& crown, double distance) {
  if (distance >= crown.radius) return 0.0;
  const double t = distance / crown.radius;
  return crown.shape == CrownShape::paraboloid ? crown.height * (1.0 - t * t) : crown.height * (1.0 - t);
}

void validate_scene_spec(const SceneSpec& spec) {
  if (spec.size == 0) throw Error(ErrorKind::InvalidArgument, "scene size must be positive");
  if (!(spec.pixel_size > 0.0)) throw Error(ErrorKind::InvalidArgument, "pixel_size must be positive");
  if (!(spec.noise_sigma >= 0.0)) throw Error(ErrorKind::InvalidArgument, "noise_sigma must be >= 0");
  for (const auto& c : spec.crowns) {
    if (!(c.radius >= 1.0)) throw Error(ErrorKind::InvalidArgument, "crown radius must be >= 1 pixel");
    if (!(c.height > 0.0 && c.height <= 120.0)) {
      throw Error(ErrorKind::InvalidArgument, "crown height must lie in (0, 120] m");
    }
    if (!(c.center_x >= 0.0 && c.center_x < spec.size && c.center_y >= 0.0 && c.center_y < spec.size)) {
      throw Error(ErrorKind::CrownOutOfBounds, "crown center (" + std::to_string(c.center_x) + ", " +
                                                   std::to_string(c.center_y) + ") outside the scene");
    }
  }
}

Scene generate_scene(const SceneSpec& spec) {
  validate_scene_spec(spec);
  const std::size_t n = spec.size;
  std::vector<float> dtm(n * n);
  std::vector<float> canopy(n * n, 0.0f);
  std::vector<float> dsm(n * n);

  for (std::size_t r = 0; r < n; ++r) {
    for (std::size_t c = 0; c < n; ++c) {
      const double noise = terrain_noise(spec.terrain.seed, static_cast<double>(r), static_cast<double>(c));
      dtm[r * n + c] = static_cast<float>(quantize(spec.terrain.base_elevation + spec.terrain.relief_amplitude * noise));
    }
  }
  for (const auto& crown : spec.crowns) {
    const auto r0 = static_cast<std::size_t>(std::max(0.0, std::floor(crown.center_y - crown.radius)));
    const auto r1 = static_cast<std::size_t>(std::min<double>(n - 1, std::ceil(crown.center_y + crown.radius)));
    const auto c0 = static_cast<std::size_t>(std::max(0.0, std::floor(crown.center_x - crown.radius)));
    const auto c1 = static_cast<std::size_t>(std::min<double>(n - 1, std::ceil(crown.center_x + crown.radius)));
    for (std::size_t r = r0; r <= r1; ++r) {
      for (std::size_t c = c0; c <= c1; ++c) {
        const double d = std::hypot(static_cast<double>(c) - crown.center_x, static_cast<double>(r) - crown.center_y);
        const auto h = static_cast<float>(quantize_canopy(crown_profile(crown, d)));
        canopy[r * n + c] = std::max(canopy[r * n + c], h);
      }
    }
  }
  const auto noise_seed = counter_draw(spec.terrain.seed, kNoiseStream);
  for (std::size_t i = 0; i < n * n; ++i) {
    const float surface = dtm[i] + canopy[i];
    if (spec.noise_sigma > 0.0 && canopy[i] > 0.0f) {
      const double u1 = unit_double(counter_draw(noise_seed, 2 * i));
      const double u2 = unit_double(counter_draw(noise_seed, 2 * i + 1));
      const double z = std::sqrt(-2.0 * std::log1p(-u1)) * std::cos(2.0 * std::numbers::pi * u2);
      dsm[i] = static_cast<float>(static_cast<double>(surface) + spec.noise_sigma * z);
    } else {
      dsm[i] = surface;
    }
  }

  Geometry g;
  g.width = g.height = spec.size;
  g.pixel_size = spec.pixel_size;
  g.origin_x = 0.0;
  g.origin_y = spec.size * spec.pixel_size;
  return {Raster(g, std::move(dsm), Units::meters, kSynthNodata), Raster(g, std::move(dtm), Units::meters, kSynthNodata),
          Raster(g, std::move(canopy), Units::meters, kSynthNodata)};
}

Raster perturb_prediction(const Raster& chm, Perturbation model, double magnitude, std::uint64_t /*seed*/) {
  if (!(magnitude >= 0.0)) throw Error(ErrorKind::InvalidArgument, "perturbation magnitude must be >= 0");
  const auto src = chm.values();
  std::vector<float> out(src.begin(), src.end());
  switch (model) {
    case Perturbation::scale:
      for (auto& v : out) {
        if (is_valid(v)) v = static_cast<float>(static_cast<double>(v) * magnitude);
      }
      break;
    case Perturbation::dropout_small_trees:
      for (auto& v : out) {
        if (is_valid(v) && v < magnitude) v = 0.0f;
      }
      break;
    case Perturbation::blur: {
      const auto radius = static_cast<std::int64_t>(std::llround(magnitude));
      if (radius == 0) break;
      const std::int64_t w = chm.width();
      const std::int64_t h = chm.height();
      // Integral images of values and valid counts, (h+1) x (w+1).
      std::vector<double> sum(static_cast<std::size_t>((w + 1) * (h + 1)), 0.0);
      std::vector<std::int64_t> cnt(sum.size(), 0);
      auto at = [&](std::int64_t r, std::int64_t c) { return static_cast<std::size_t>(r * (w + 1) + c); };
      for (std::int64_t r = 0; r < h; ++r) {
        double row_sum = 0.0;
        std::int64_t row_cnt = 0;
        for (std::int64_t c = 0; c < w; ++c) {
          const float v = src[static_cast<std::size_t>(r * w + c)];
          if (is_valid(v)) {
            row_sum += v;
            ++row_cnt;
          }
          sum[at(r + 1, c + 1)] = sum[at(r, c + 1)] + row_sum;
          cnt[at(r + 1, c + 1)] = cnt[at(r, c + 1)] + row_cnt;
        }
      }
      for (std::int64_t r = 0; r < h; ++r) {
        for (std::int64_t c = 0; c < w; ++c) {
          auto& v = out[static_cast<std::size_t>(r * w + c)];
          if (!is_valid(v)) continue;
          const auto r0 = std::max<std::int64_t>(0, r - radius);
          const auto r1 = std::min<std::int64_t>(h, r + radius + 1);
          const auto c0 = std::max<std::int64_t>(0, c - radius);
          const auto c1 = std::min<std::int64_t>(w, c + radius + 1);
          const double s = sum[at(r1, c1)] - sum[at(r0, c1)] - sum[at(r1, c0)] + sum[at(r0, c0)];
          const auto k = cnt[at(r1, c1)] - cnt[at(r0, c1)] - cnt[at(r1, c0)] + cnt[at(r0, c0)];
          v = static_cast<float>(s / static_cast<double>(k));
        }
      }
      break;
    }
  }
  return chm.with_values(std::move(out), chm.units());
}

SceneSpec desk_v1_spec(std::uint32_t index) {
  if (index < 1 || index > kDeskV1Scenes) {
    throw Error(ErrorKind::InvalidArgument, "desk-v1 scenes are numbered 1-12");
  }
  SceneSpec spec;
  char name[16];
  std::snprintf(name, sizeof name, "scene_%02u", index);
  spec.name = name;
  spec.size = 256;
  spec.pixel_size = 1.0;
  spec.terrain = {100.0 + 25.0 * index, 12.0, index};
  spec.noise_sigma = 0.0;

  SplitMix64 rng(counter_draw(kDeskStream, index));
  const auto crowns = 24 + rng.next_below(24);
  for (std::uint64_t k = 0; k < crowns; ++k) {
    Crown c;
    c.center_x = static_cast<double>(rng.next_below(spec.size));
    c.center_y = static_cast<double>(rng.next_below(spec.size));
    c.radius = 3.0 + static_cast<double>(rng.next_below(13));
    // Mixed heights, 2-40 m in 0.25 m steps, so small-tree dropout has something to remove.
    c.height = 2.0 + 0.25 * static_cast<double>(rng.next_below(153));
    c.shape = rng.next_below(2) == 0 ? CrownShape::paraboloid : CrownShape::cone;
    spec.crowns.push_back(c);
  }
  return spec;
}

std::string scene_spec_to_json(const SceneSpec& spec) {
  json crowns = json::array();
  for (const auto& c : spec.crowns) {
    crowns.push_back({{"center", {c.center_x, c.center_y}},
                      {"radius", c.radius},
                      {"height", c.height},
                      {"shape", std::string(to_string(c.shape))}});
  }
  json doc = {
      {"name", spec.name},
      {"size", spec.size},
      {"pixel_size", spec.pixel_size},
      {"terrain",
       {{"base_elevation", spec.terrain.base_elevation},
        {"relief_amplitude", spec.terrain.relief_amplitude},
        {"seed", spec.terrain.seed}}},
      {"crowns", crowns},
      {"noise_sigma", spec.noise_sigma},
  };
  return doc.dump(2) + "\n";
}

SceneSpec scene_spec_from_json(std::string_view text) {
  SceneSpec spec;
  try {
    const auto doc = json::parse(text);
    spec.name = doc.value("name", std::string("scene"));
    spec.size = doc.at("size").get<std::uint32_t>();
    spec.pixel_size = doc.value("pixel_size", 1.0);
    if (doc.contains("terrain")) {
      const auto& t = doc.at("terrain");
      spec.terrain.base_elevation = t.value("base_elevation", 100.0);
      spec.terrain.relief_amplitude = t.value("relief_amplitude", 10.0);
      spec.terrain.seed = t.value("seed", std::uint64_t{0});
    }
    for (const auto& c : doc.value("crowns", json::array())) {
      Crown crown;
      const auto& center = c.at("center");
      crown.center_x = center.at(0).get<double>();
      crown.center_y = center.at(1).get<double>();
      crown.radius = c.at("radius").get<double>();
      crown.height = c.at("height").get<double>();
      crown.shape = crown_shape_from_string(c.value("shape", std::string("paraboloid")));
      spec.crowns.push_back(crown);
    }
    spec.noise_sigma = doc.value("noise_sigma", 0.0);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::InvalidArgument, std::string("bad scene spec: ") + e.what());
  }
  validate_scene_spec(spec);
  return spec;
}

}  // namespace canopy
