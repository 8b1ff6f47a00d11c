# Copyright 2021 The HMUA Authors. All rights reserved.
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
"""
Abundance and segmentation maps: raw little-endian row-major payloads with a
JSON sidecar at ``<path>.json``.

Abundances are float64 P x N with sidecar
    {"endmembers": P, "pixels": N, "dtype": "float64"}
Segmentations are int32 rows x cols with sidecar
    {"rows", "cols", "superpixels", "scale", "homogeneous"}
"""

from typing import Optional, Sequence

import numpy as np

from hmua.core import AbundanceMap, ParseError, SegmentationMap

from .files import (
    check_size, positive_int, read_json, sidecar, storage_errors, write_json
)


def write_abundance(
    abundances: AbundanceMap,
    path: str,
    names: Optional[Sequence[str]] = None,
) -> None:
    with storage_errors(path, "write"):
        abundances.data.astype("<f8").tofile(path)
    description = {
        "endmembers": abundances.endmembers,
        "pixels": abundances.pixels,
        "dtype": "float64",
    }
    if names is not None:
        description["names"] = list(names)
    write_json(sidecar(path), description)


def read_abundance(path: str) -> AbundanceMap:
    description = read_json(sidecar(path))
    endmembers = positive_int(description, "endmembers", sidecar(path))
    pixels = positive_int(description, "pixels", sidecar(path))
    if description.get("dtype", "float64") != "float64":
        raise ParseError("{}: abundances must be float64".format(path))
    check_size(path, endmembers * pixels * 8)
    with storage_errors(path, "read"):
        data = np.fromfile(path, dtype="<f8")
    return AbundanceMap.create(
        data.astype(np.float64).reshape(endmembers, pixels)
    )


def write_segmentation(seg: SegmentationMap, path: str) -> None:
    with storage_errors(path, "write"):
        seg.labels.astype("<i4").tofile(path)
    write_json(
        sidecar(path), {
            "rows": seg.rows,
            "cols": seg.cols,
            "superpixels": seg.superpixels,
            "scale": seg.scale,
            "homogeneous": None if seg.homogeneous is None else
            [bool(flag) for flag in seg.homogeneous],
        }
    )


def read_segmentation(path: str) -> SegmentationMap:
    description = read_json(sidecar(path))
    rows = positive_int(description, "rows", sidecar(path))
    cols = positive_int(description, "cols", sidecar(path))
    check_size(path, rows * cols * 4)
    with storage_errors(path, "read"):
        labels = np.fromfile(path, dtype="<i4").astype(np.int64)
    labels = labels.reshape(rows, cols)
    mask = None
    if np.any(labels < 0):
        mask = labels >= 0
    return SegmentationMap.create(
        labels,
        scale=int(description.get("scale", 0)),
        homogeneous=description.get("homogeneous"),
        mask=mask,
    )
