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

#include <boost/math/distributions/chi_squared.hpp>
#include <random>
#include <functional>
#include <map>
#include <set>

#include "canopybench/chm.hpp"
#include "canopybench/error.hpp"
#include "canopybench/synthgen.hpp"
#include "canopybench/tiling.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace canopy;
using canopy::testing::random_chm;
using canopy::testing::square;

namespace {

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("no error thrown");
  return ErrorKind::InvalidArgument;
}

}  // namespace

TEST_CASE("random_tiles is deterministic in the seed") {
  const auto r = Raster::filled(square(300), 1.0f);
  const auto a = random_tiles(r, 64, 50, 11, "p");
  CHECK(a == random_tiles(r, 64, 50, 11, "p"));
  CHECK(a != random_tiles(r, 64, 50, 12, "p"));
  for (const auto& t : a) {
    CHECK(t.row_off + 64 <= 300);
    CHECK(t.col_off + 64 <= 300);
    CHECK_FALSE(t.partial);
    CHECK(t.parent_id == "p");
  }
}

TEST_CASE("random_tiles offsets are uniform (chi-square, alpha 0.01)") {
  // 20 admissible offsets per axis, 4000 draws: 200 expected per bin.
  const auto r = Raster::filled(Geometry{40, 40, 1.0, 0.0, 40.0}, 1.0f);
  const auto tiles = random_tiles(r, 21, 4000, 2026);
  std::vector<double> rows(20, 0.0), cols(20, 0.0);
  for (const auto& t : tiles) {
    rows.at(t.row_off) += 1;
    cols.at(t.col_off) += 1;
  }
  const boost::math::chi_squared dist(19);
  const double critical = boost::math::quantile(boost::math::complement(dist, 0.01));
  for (const auto* counts : {&rows, &cols}) {
    double stat = 0;
    for (double c : *counts) stat += (c - 200.0) * (c - 200.0) / 200.0;
    CHECK(stat < critical);
  }
}

TEST_CASE("random_tiles argument errors") {
  const auto r = Raster::filled(Geometry{50, 30, 1.0, 0.0, 30.0}, 1.0f);
  CHECK(kind_of([&] { random_tiles(r, 31, 1, 0); }) == ErrorKind::TileTooLarge);
  CHECK(kind_of([&] { random_tiles(r, 0, 1, 0); }) == ErrorKind::TileTooLarge);
  CHECK(kind_of([&] { random_tiles(r, 8, 0, 0); }) == ErrorKind::InvalidArgument);
  CHECK(random_tiles(r, 30, 3, 0).size() == 3);
}

TEST_CASE("grid_tiles covers every pixel exactly once") {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::uint32_t> dim(1, 70), tsz(1, 40);
  for (int trial = 0; trial < 200; ++trial) {
    const Geometry g{dim(rng), dim(rng), 1.0, 0.0, 0.0};
    const auto r = Raster::filled(g, 0.0f);
    const auto size = tsz(rng);
    const auto tiles = grid_tiles(r, size);
    std::vector<int> hits(static_cast<std::size_t>(g.width) * g.height, 0);
    std::uint32_t last_row = 0, last_col = 0;
    for (std::size_t k = 0; k < tiles.size(); ++k) {
      const auto& t = tiles[k];
      if (k > 0) CHECK((t.row_off > last_row || (t.row_off == last_row && t.col_off > last_col)));
      last_row = t.row_off;
      last_col = t.col_off;
      CHECK(t.partial == (t.rows < size || t.cols < size));
      for (std::uint32_t i = 0; i < t.rows; ++i)
        for (std::uint32_t j = 0; j < t.cols; ++j) ++hits[(t.row_off + i) * g.width + t.col_off + j];
    }
    CHECK(std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }));
  }
}

TEST_CASE("crop copies values and shifts the origin") {
  std::vector<float> v(20);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = static_cast<float>(i);
  const Raster r(Geometry{5, 4, 2.0, 100.0, 50.0}, v);
  const Tile t{"x", 1, 2, 2, 2, 3, false};
  const auto c = crop(r, t);
  CHECK(c.width() == 3);
  CHECK(c.height() == 2);
  CHECK(c.origin_x() == 104.0);
  CHECK(c.origin_y() == 48.0);
  CHECK(c.at(0, 0) == 7.0f);
  CHECK(c.at(1, 2) == 14.0f);
}

TEST_CASE("derive_chm matches an elementwise oracle") {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-5.0, 60.0);
  for (int trial = 0; trial < 50; ++trial) {
    const auto g = square(17);
    auto dtm = random_chm(rng, g, 0.0, 0.1, 300.0);
    std::vector<float> dsm_v(dtm.size());
    for (std::size_t i = 0; i < dsm_v.size(); ++i) {
      dsm_v[i] = (i % 11 == 0) ? nodata_value() : static_cast<float>(dtm.values()[i] + u(rng));
    }
    const Raster dsm(g, dsm_v);
    for (bool clamp : {true, false}) {
      const auto d = derive_chm(ElevationPair(dsm, dtm), clamp);
      std::size_t clamped = 0;
      for (std::size_t i = 0; i < dsm_v.size(); ++i) {
        const float a = dsm.values()[i], b = dtm.values()[i];
        if (std::isnan(a) || std::isnan(b)) {
          REQUIRE_FALSE(d.chm.valid_at(i));
          continue;
        }
        float expect = a - b;
        if (clamp && expect < 0.0f) {
          expect = 0.0f;
          ++clamped;
        }
        REQUIRE(d.chm.values()[i] == expect);
      }
      CHECK(d.clamped == clamped);
    }
  }
}

TEST_CASE("derive_chm anti-symmetry and nodata union on 100 random pairs") {
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 100; ++trial) {
    const auto g = square(16);
    const auto a = random_chm(rng, g, 0.1, 0.1, 200.0);
    const auto b = random_chm(rng, g, 0.1, 0.1, 200.0);
    const auto ab = derive_chm(ElevationPair(a, b), false).chm;
    const auto ba = derive_chm(ElevationPair(b, a), false).chm;
    for (std::size_t i = 0; i < ab.size(); ++i) {
      const bool any_nodata = !a.valid_at(i) || !b.valid_at(i);
      REQUIRE(ab.valid_at(i) == !any_nodata);
      if (!any_nodata) REQUIRE(ab.values()[i] == -ba.values()[i]);
    }
  }
}

TEST_CASE("elevation pair rejects mismatches") {
  const auto a = Raster::filled(square(4), 1.0f);
  CHECK(kind_of([&] { ElevationPair(a, Raster::filled(square(5), 1.0f)); }) == ErrorKind::GeometryMismatch);
  CHECK(kind_of([&] { ElevationPair(a, Raster::filled(Geometry{4, 4, 1.0, 0.5, 4.0}, 1.0f)); }) ==
        ErrorKind::GeometryMismatch);
  CHECK(kind_of([&] { ElevationPair(a, Raster::filled(square(4), 1.0f, Units::relative)); }) ==
        ErrorKind::UnitsMismatch);
  // Within tolerance is fine.
  CHECK_NOTHROW(ElevationPair(a, Raster::filled(Geometry{4, 4, 1.0 + 1e-9, 0.0, 4.0}, 1.0f)));
}

TEST_CASE("validate_chm counts negative and too-tall pixels") {
  const Raster r(Geometry{5, 1, 1.0, 0.0, 1.0}, {-1.0f, 0.0f, 121.0f, 50.0f, nodata_value()});
  const auto anomalies = validate_chm(r);
  std::map<AnomalyKind, std::size_t> by_kind;
  for (const auto& a : anomalies) by_kind[a.kind] = a.count;
  CHECK(by_kind[AnomalyKind::negative] == 1);
  CHECK(by_kind[AnomalyKind::too_tall] == 1);
  CHECK(validate_chm(Raster::filled(square(3), 3.0f)).empty());
  CHECK(kind_of([&] { validate_chm(Raster::filled(square(3), 0.3f, Units::relative)); }) ==
        ErrorKind::UnitsMismatch);
}

TEST_CASE("noise-free synthetic scenes close bitwise") {
  for (std::uint32_t i = 1; i <= 3; ++i) {
    const auto scene = generate_scene(desk_v1_spec(i));
    const auto d = derive_chm(ElevationPair(scene.dsm, scene.dtm));
    CHECK(bitwise_equal(d.chm, scene.chm_true));
    CHECK(d.clamped == 0);
  }
}
