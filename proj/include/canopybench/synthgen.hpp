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
#include <string_view>
#include <vector>

#include "canopybench/raster.hpp"

namespace canopy {

enum class CrownShape { paraboloid, cone };

std::string_view to_string(CrownShape shape);
CrownShape crown_shape_from_string(std::string_view name);

struct Crown {
  double center_x = 0.0;  // column, pixels
  double center_y = 0.0;  // row, pixels
  double radius = 1.0;    // pixels, >= 1
  double height = 10.0;   // meters, (0, 120]
  CrownShape shape = CrownShape::paraboloid;
};

struct TerrainSpec {
  double base_elevation = 100.0;
  double relief_amplitude = 10.0;
  std::uint64_t seed = 0;
};

struct SceneSpec {
  std::string name = "scene";
  std::uint32_t size = 256;
  double pixel_size = 1.0;
  TerrainSpec terrain;
  std::vector<Crown> crowns;
  double noise_sigma = 0.0;
};

struct Scene {
  Raster dsm;
  Raster dtm;
  Raster chm_true;
};

// Heights are quantized to 1/256 m so terrain + canopy is exact in f32 and
// dsm - dtm reproduces chm_true bit for bit when noise_sigma is 0.
inline constexpr double kHeightQuantum = 1.0 / 256.0;

// Value-noise terrain octaves: base period 64 px, 4 octaves, lacunarity 2,
// gain 0.5, smoothstep interpolation, lattice values from counter_draw().
inline constexpr double kTerrainBasePeriod = 64.0;
inline constexpr int kTerrainOctaves = 4;

void validate_scene_spec(const SceneSpec& spec);

// Smooth terrain, canopy = max over crown profiles, dsm = dtm + canopy plus
// N(0, noise_sigma) on canopy pixels. Deterministic in the spec.
Scene generate_scene(const SceneSpec& spec);

// Value noise in [-1, 1] at pixel (row, col).
double terrain_noise(std::uint64_t seed, double row, double col);

// Analytic crown profile at distance d (pixels) from the center; 0 for d >= r.
double crown_profile(const Crown& crown, double distance);

enum class Perturbation { scale, blur, dropout_small_trees };

std::string_view to_string(Perturbation model);
Perturbation perturbation_from_string(std::string_view name);

// scale: v * magnitude. blur: mean over the (2r+1)^2 window with
// r = round(magnitude), clipped at edges, nodata ignored. dropout_small_trees:
// pixels below magnitude become 0. None of the models draw random numbers;
// the seed is accepted so every model shares one call signature.
Raster perturb_prediction(const Raster& chm, Perturbation model, double magnitude, std::uint64_t seed = 0);

// Fixture scene `index` (1-12) of the desk-v1 corpus: 256 x 256, seed = index.
SceneSpec desk_v1_spec(std::uint32_t index);
inline constexpr std::uint32_t kDeskV1Scenes = 12;

std::string scene_spec_to_json(const SceneSpec& spec);
SceneSpec scene_spec_from_json(std::string_view text);

}  // namespace canopy
