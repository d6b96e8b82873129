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

// Python bindings for the canopybench core.

#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "canopybench/benchmark_table.hpp"
#include "canopybench/chm.hpp"
#include "canopybench/curation.hpp"
#include "canopybench/error.hpp"
#include "canopybench/evaluate.hpp"
#include "canopybench/ks.hpp"
#include "canopybench/metrics.hpp"
#include "canopybench/pipeline.hpp"
#include "canopybench/run_manifest.hpp"
#include "canopybench/synthgen.hpp"
#include "canopybench/tiling.hpp"

namespace py = pybind11;
using namespace canopy;

namespace {

using F32Array = py::array_t<float, py::array::c_style | py::array::forcecast>;

Raster raster_from_numpy(F32Array data, double pixel_size, double origin_x, std::optional<double> origin_y,
                         Units units, std::optional<float> nodata) {
  if (data.ndim() != 2) throw Error(ErrorKind::InvalidArgument, "raster data must be 2-D");
  const auto h = static_cast<std::uint32_t>(data.shape(0));
  const auto w = static_cast<std::uint32_t>(data.shape(1));
  Geometry g{w, h, pixel_size, origin_x, origin_y.value_or(static_cast<double>(h) * pixel_size)};
  std::vector<float> values(data.data(), data.data() + data.size());
  return Raster(g, std::move(values), units, nodata.value_or(nodata_value()));
}

F32Array raster_to_numpy(const Raster& r) {
  F32Array out({static_cast<py::ssize_t>(r.height()), static_cast<py::ssize_t>(r.width())});
  std::copy(r.values().begin(), r.values().end(), out.mutable_data());
  return out;
}

py::dict metric_report_dict(const MetricReport& m) {
  py::dict d;
  d["mae"] = m.mae;
  d["iou"] = m.iou;
  d["pearson"] = m.pearson ? py::cast(*m.pearson) : py::none();
  d["n_valid"] = m.n_valid;
  d["n_tree_gt"] = m.n_tree_gt;
  d["n_tree_pred"] = m.n_tree_pred;
  d["aggregation"] = std::string(to_string(m.aggregation));
  d["n_tiles"] = m.n_tiles;
  d["n_partial_tiles"] = m.n_partial_tiles;
  d["n_pearson_undefined"] = m.n_pearson_undefined;
  d["n_empty_union"] = m.n_empty_union;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Canopy height model curation and evaluation core";

  static py::exception<Error> canopy_error(m, "CanopyError");
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::object exc = canopy_error;
      py::object instance = exc(e.what());
      instance.attr("kind") = std::string(to_string(e.kind()));
      PyErr_SetObject(canopy_error.ptr(), instance.ptr());
    }
  });

  py::enum_<Units>(m, "Units")
      .value("meters", Units::meters)
      .value("relative", Units::relative)
      .value("score", Units::score)
      .value("dimensionless", Units::dimensionless);

  py::class_<Raster>(m, "Raster")
      .def(py::init(&raster_from_numpy), py::arg("data"), py::arg("pixel_size") = 1.0, py::arg("origin_x") = 0.0,
           py::arg("origin_y") = py::none(), py::arg("units") = Units::meters, py::arg("nodata") = py::none(),
           "Build from a 2-D array; NaN (or the nodata value) marks invalid pixels. origin_y defaults to "
           "height * pixel_size.")
      .def_property_readonly("width", &Raster::width)
      .def_property_readonly("height", &Raster::height)
      .def_property_readonly("pixel_size", &Raster::pixel_size)
      .def_property_readonly("origin_x", &Raster::origin_x)
      .def_property_readonly("origin_y", &Raster::origin_y)
      .def_property_readonly("units", &Raster::units)
      .def("count_valid", &Raster::count_valid)
      .def("to_numpy", &raster_to_numpy, "Copy of the values; nodata is NaN")
      .def("__repr__", [](const Raster& r) {
        return "<Raster " + std::to_string(r.width()) + "x" + std::to_string(r.height()) + " " +
               std::string(to_string(r.units())) + ">";
      });

  m.def("read_raster", py::overload_cast<const std::filesystem::path&>(&read_raster), py::arg("path"));
  m.def("write_raster", &write_raster, py::arg("raster"), py::arg("path"));
  m.def("bitwise_equal", &bitwise_equal);

  py::class_<Tile>(m, "Tile")
      .def_readonly("parent_id", &Tile::parent_id)
      .def_readonly("row_off", &Tile::row_off)
      .def_readonly("col_off", &Tile::col_off)
      .def_readonly("size", &Tile::size)
      .def_readonly("rows", &Tile::rows)
      .def_readonly("cols", &Tile::cols)
      .def_readonly("partial", &Tile::partial);
  m.def("random_tiles", &random_tiles, py::arg("raster"), py::arg("size"), py::arg("count"), py::arg("seed"),
        py::arg("parent_id") = "");
  m.def("grid_tiles", &grid_tiles, py::arg("raster"), py::arg("size"), py::arg("parent_id") = "");
  m.def("crop", &crop);

  m.def(
      "derive_chm",
      [](const Raster& dsm, const Raster& dtm, bool clamp) {
        auto d = derive_chm(ElevationPair(dsm, dtm), clamp);
        return py::make_tuple(std::move(d.chm), d.clamped);
      },
      py::arg("dsm"), py::arg("dtm"), py::arg("clamp_negative") = true,
      "Returns (chm, number_of_clamped_pixels)");
  m.def(
      "validate_chm",
      [](const Raster& chm, double max_height) {
        py::dict out;
        for (const auto& a : validate_chm(chm, max_height)) out[py::str(std::string(to_string(a.kind)))] = a.count;
        return out;
      },
      py::arg("chm"), py::arg("max_height") = kDefaultMaxHeight);

  py::class_<KsResult>(m, "KsResult")
      .def_readonly("statistic", &KsResult::statistic)
      .def_readonly("p_value", &KsResult::p_value)
      .def_readonly("n1", &KsResult::n1)
      .def_readonly("n2", &KsResult::n2);
  m.def(
      "ks_two_sample",
      [](const std::vector<double>& a, const std::vector<double>& b) { return ks_two_sample(a, b); },
      py::arg("sample_a"), py::arg("sample_b"));

  py::enum_<Split>(m, "Split")
      .value("train", Split::train)
      .value("val", Split::val)
      .value("test", Split::test)
      .value("excluded", Split::excluded);
  py::enum_<ExclusionReason>(m, "ExclusionReason")
      .value("none", ExclusionReason::none)
      .value("low_quality", ExclusionReason::low_quality)
      .value("empty_canopy", ExclusionReason::empty_canopy);
  py::class_<SampleRecord>(m, "SampleRecord")
      .def(py::init<>())
      .def(py::init([](std::string id, std::string image_path, std::string chm_path,
                       std::optional<double> quality_score, Split split) {
             SampleRecord r{std::move(id), std::move(image_path), std::move(chm_path), quality_score, split,
                            ExclusionReason::none};
             validate_record(r);
             return r;
           }),
           py::arg("id"), py::arg("image_path") = "", py::arg("chm_path") = "", py::arg("quality_score") = py::none(),
           py::arg("split") = Split::train)
      .def_readwrite("id", &SampleRecord::id)
      .def_readwrite("image_path", &SampleRecord::image_path)
      .def_readwrite("chm_path", &SampleRecord::chm_path)
      .def_readwrite("quality_score", &SampleRecord::quality_score)
      .def_readwrite("split", &SampleRecord::split)
      .def_readwrite("exclusion_reason", &SampleRecord::exclusion_reason)
      .def_property_readonly("excluded", &SampleRecord::excluded);
  m.def("filter_by_quality", &filter_by_quality, py::arg("records"), py::arg("threshold") = kDefaultQualityThreshold);
  m.def("filter_empty_canopy", &filter_empty_canopy, py::arg("records"), py::arg("base_dir") = std::filesystem::path(),
        py::arg("workers") = 1u, py::call_guard<py::gil_scoped_release>());
  m.def("read_manifest", &read_manifest);
  m.def("write_manifest", &write_manifest);
  m.def(
      "split_distribution_report",
      [](const std::vector<SampleRecord>& records, const std::string& height_source, std::size_t pixels_per_split,
         std::uint64_t seed, const std::filesystem::path& base_dir) {
        HeightSampling s{height_source_from_string(height_source), pixels_per_split, seed};
        std::vector<std::pair<std::string, KsResult>> out;
        for (auto& c : split_distribution_report(records, s, base_dir)) out.emplace_back(c.pair, c.result);
        return out;
      },
      py::arg("records"), py::arg("height_source") = "per_pixel_subsample", py::arg("pixels_per_split") = 100000,
      py::arg("seed") = 0, py::arg("base_dir") = std::filesystem::path());

  m.attr("TREE_THRESHOLD") = kTreeThreshold;
  m.def(
      "tree_mask",
      [](const Raster& r, double t) {
        const auto mask = tree_mask(r, t);
        py::array_t<std::uint8_t> out({static_cast<py::ssize_t>(mask.height), static_cast<py::ssize_t>(mask.width)});
        std::copy(mask.cells.begin(), mask.cells.end(), out.mutable_data());
        return out;
      },
      py::arg("raster"), py::arg("threshold") = kTreeThreshold, "0 background, 1 tree, 2 nodata");
  m.def(
      "mae", [](const Raster& pred, const Raster& gt) { return mae(EvalPair(pred, gt)); }, py::arg("pred"),
      py::arg("gt"));
  m.def(
      "iou",
      [](const Raster& pred, const Raster& gt, double t) {
        const EvalPair pair(pred, gt);
        return iou(restrict_to(tree_mask(pred, t), pair), restrict_to(tree_mask(gt, t), pair)).value;
      },
      py::arg("pred"), py::arg("gt"), py::arg("threshold") = kTreeThreshold,
      "IoU of tree masks over pixels valid in both rasters");
  m.def(
      "pearson_tree",
      [](const Raster& pred, const Raster& gt, const std::string& region, double t) {
        return pearson_tree(EvalPair(pred, gt), pc_region_from_string(region), t).value;
      },
      py::arg("pred"), py::arg("gt"), py::arg("region") = "gt", py::arg("threshold") = kTreeThreshold,
      "None when undefined");
  m.def(
      "minmax_normalize", [](const Raster& r) { return minmax_normalize(r).raster; }, py::arg("raster"));

  m.def(
      "evaluate",
      [](const std::vector<std::pair<std::string, std::pair<Raster, Raster>>>& pairs, const std::string& agg,
         bool normalize, const std::string& scope, const std::string& pc_region, double threshold,
         std::uint32_t tile_size, unsigned workers) {
        EvalConfig c;
        c.aggregation = aggregation_from_string(agg);
        c.normalize_pred = c.normalize_gt = normalize;
        c.normalize_scope = normalize_scope_from_string(scope);
        c.pc_region = pc_region_from_string(pc_region);
        c.threshold = threshold;
        c.tile_size = tile_size;
        c.workers = workers;
        std::vector<NamedPair> named;
        for (const auto& [id, pr] : pairs) named.push_back({id, EvalPair(pr.first, pr.second)});
        EvalReport report;
        {
          py::gil_scoped_release release;
          report = evaluate(named, c);
        }
        return py::make_tuple(metric_report_dict(report.aggregate), report_to_json(report));
      },
      py::arg("pairs"), py::arg("agg") = "micro", py::arg("normalize") = true, py::arg("normalize_scope") = "per_tile",
      py::arg("pc_region") = "gt", py::arg("threshold") = kTreeThreshold, py::arg("tile_size") = 0,
      py::arg("workers") = 1,
      "pairs: list of (id, (pred, gt)). Returns (aggregate dict, report json text).");

  py::enum_<Perturbation>(m, "Perturbation")
      .value("scale", Perturbation::scale)
      .value("blur", Perturbation::blur)
      .value("dropout_small_trees", Perturbation::dropout_small_trees);
  m.def(
      "generate_scene",
      [](const std::string& spec_json) {
        auto s = generate_scene(scene_spec_from_json(spec_json));
        return py::make_tuple(std::move(s.dsm), std::move(s.dtm), std::move(s.chm_true));
      },
      py::arg("spec_json"), "Returns (dsm, dtm, chm_true)");
  m.def(
      "desk_v1_spec", [](std::uint32_t i) { return scene_spec_to_json(desk_v1_spec(i)); }, py::arg("index"));
  m.def("perturb_prediction", &perturb_prediction, py::arg("chm"), py::arg("model"), py::arg("magnitude"),
        py::arg("seed") = 0);

  m.def(
      "estimate_cost",
      [](const std::string& manifest_json) {
        const auto c = estimate_cost(run_manifest_from_json(manifest_json));
        py::dict d;
        d["dollars"] = c.dollars;
        d["kg_co2"] = c.kg_co2;
        d["kwh"] = c.kwh;
        return d;
      },
      py::arg("run_manifest_json"));

  m.def(
      "run_pipeline",
      [](const std::filesystem::path& config) {
        py::gil_scoped_release release;
        return run_pipeline(config).log;
      },
      py::arg("config_path"), "Returns the stage log lines");
}
