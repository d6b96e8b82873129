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

#include "canopybench/benchmark_table.hpp"

#include <algorithm>
#include <cstdio>

#include "canopybench/error.hpp"

namespace canopy {

namespace {

std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

std::string pad(const std::string& s, std::size_t width) {
  return s.size() >= width ? s : s + std::string(width - s.size(), ' ');
}

std::string decorate(const std::string& text, Mark mark) {
  switch (mark) {
    case Mark::best: return "**" + text + "**";
    case Mark::second: return "_" + text + "_";
    case Mark::none: break;
  }
  return text;
}

}  // namespace

std::vector<Mark> rank_column(const std::vector<std::optional<double>>& values, bool lower_is_better) {
  std::vector<double> distinct;
  for (const auto& v : values) {
    if (v) distinct.push_back(*v);
  }
  std::sort(distinct.begin(), distinct.end());
  distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());
  if (!lower_is_better) std::reverse(distinct.begin(), distinct.end());

  std::vector<Mark> marks(values.size(), Mark::none);
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!values[i]) continue;
    if (*values[i] == distinct[0]) {
      marks[i] = Mark::best;
    } else if (distinct.size() > 1 && *values[i] == distinct[1]) {
      marks[i] = Mark::second;
    }
  }
  return marks;
}

std::string render_benchmark_table(const std::vector<BenchmarkRow>& rows) {
  if (rows.empty()) throw Error(ErrorKind::InvalidArgument, "benchmark table needs at least one row");

  std::vector<std::string> datasets;
  for (const auto& row : rows) {
    for (const auto& [name, report] : row.datasets) {
      if (std::find(datasets.begin(), datasets.end(), name) == datasets.end()) datasets.push_back(name);
    }
  }

  struct Column {
    std::string header;
    std::vector<std::string> cells;
  };
  std::vector<Column> columns(4);
  columns[0].header = "Model";
  columns[1].header = "FT";
  columns[2].header = "#Params";
  columns[3].header = "GFLOPs";
  for (const auto& row : rows) {
    columns[0].cells.push_back(row.manifest.model_id);
    columns[1].cells.push_back(row.manifest.finetuned ? "yes" : "no");
    columns[2].cells.push_back(fixed(row.manifest.n_params_millions, 1) + "M");
    columns[3].cells.push_back(fixed(row.manifest.gflops, 0));
  }

  enum class Metric { mae, iou, pc };
  for (const auto& dataset : datasets) {
    for (auto metric : {Metric::mae, Metric::iou, Metric::pc}) {
      std::vector<std::optional<double>> values;
      for (const auto& row : rows) {
        auto it = std::find_if(row.datasets.begin(), row.datasets.end(),
                               [&](const auto& d) { return d.first == dataset; });
        if (it == row.datasets.end()) {
          values.emplace_back();
          continue;
        }
        const auto& r = it->second;
        values.push_back(metric == Metric::mae ? std::optional<double>(r.mae)
                         : metric == Metric::iou ? std::optional<double>(r.iou)
                                                 : r.pearson);
      }
      const auto marks = rank_column(values, metric == Metric::mae);
      Column col;
      col.header = dataset + (metric == Metric::mae ? " MAE(lower)" : metric == Metric::iou ? " IoU(higher)" : " PC(higher)");
      for (std::size_t i = 0; i < rows.size(); ++i) {
        col.cells.push_back(values[i] ? decorate(fixed(*values[i], 4), marks[i]) : std::string("-"));
      }
      columns.push_back(std::move(col));
    }
  }

  std::vector<std::size_t> widths;
  for (const auto& c : columns) {
    std::size_t w = c.header.size();
    for (const auto& cell : c.cells) w = std::max(w, cell.size());
    widths.push_back(w);
  }
  auto line = [&](auto cell_of) {
    std::string out;
    for (std::size_t c = 0; c < columns.size(); ++c) {
      out += (c == 0 ? "" : " | ") + pad(cell_of(c), widths[c]);
    }
    while (!out.empty() && out.back() == ' ') out.pop_back();
    return out + "\n";
  };
  std::string table = line([&](std::size_t c) { return columns[c].header; });
  std::string rule;
  for (std::size_t c = 0; c < columns.size(); ++c) rule += (c == 0 ? "" : "-+-") + std::string(widths[c], '-');
  table += rule + "\n";
  for (std::size_t r = 0; r < rows.size(); ++r) {
    table += line([&](std::size_t c) { return columns[c].cells[r]; });
  }
  table += "best = **x**, second best = _x_\n";
  return table;
}

}  // namespace canopy
