# Copyright 2026 The canopybench Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Canopy height model curation and evaluation toolkit."""

from ._core import (
    CanopyError,
    ExclusionReason,
    KsResult,
    Perturbation,
    Raster,
    SampleRecord,
    Split,
    Tile,
    TREE_THRESHOLD,
    Units,
    bitwise_equal,
    crop,
    derive_chm,
    desk_v1_spec,
    estimate_cost,
    evaluate,
    filter_by_quality,
    filter_empty_canopy,
    generate_scene,
    grid_tiles,
    iou,
    ks_two_sample,
    mae,
    minmax_normalize,
    pearson_tree,
    perturb_prediction,
    random_tiles,
    read_manifest,
    read_raster,
    run_pipeline,
    split_distribution_report,
    tree_mask,
    validate_chm,
    write_manifest,
    write_raster,
)

__all__ = [name for name in dir() if not name.startswith("_")]
