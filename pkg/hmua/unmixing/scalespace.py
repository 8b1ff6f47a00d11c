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
Superpixel averaging and replication.

W maps an N-column matrix to K superpixel means; W* copies each superpixel
column back onto its pixels. Neither is ever stored as a matrix: both run off
the label array.
"""

import warnings
from typing import Any

import numpy as np

from hmua.core import DimensionMismatch, ScaleOperator, SegmentationMap
from hmua.core.types import frozen


def build_operator(seg: SegmentationMap) -> ScaleOperator:
    """
    Index a segmentation for coarsening. The segmentation must be complete
    (no masked-out pixels).
    """
    if not seg.is_complete:
        raise DimensionMismatch("a partial segmentation cannot be coarsened")
    flat = seg.labels.ravel()
    order = np.argsort(flat, kind="stable")
    sizes = np.bincount(flat, minlength=seg.superpixels)
    offsets = np.concatenate(([0], np.cumsum(sizes)[:-1]))
    if sizes.size >= flat.size:
        warnings.warn(
            "{} superpixels for {} pixels: the coarse scale is not "
            "coarser".format(sizes.size, flat.size),
            RuntimeWarning,
            stacklevel=2,
        )
    return ScaleOperator(
        seg, frozen(sizes, np.int64), frozen(order, np.int64),
        frozen(offsets, np.int64)
    )


def _as_matrix(matrix: Any, columns: int, what: str) -> np.ndarray:
    matrix = np.asarray(matrix, dtype=np.float64)
    if matrix.ndim != 2 or matrix.shape[1] != columns:
        raise DimensionMismatch(
            "{} has shape {}, expected {} columns".format(
                what, matrix.shape, columns
            )
        )
    return matrix


def coarsen(matrix: Any, op: ScaleOperator) -> np.ndarray:
    """Column k of the result is the mean of the columns in superpixel k."""
    matrix = _as_matrix(matrix, op.pixels, "matrix to coarsen")
    grouped = matrix[:, op.order]
    sums = np.add.reduceat(grouped, op.offsets, axis=1)
    return sums / op.sizes


def uncoarsen(coarse: Any, op: ScaleOperator) -> np.ndarray:
    """Column n of the result is the column of n's superpixel."""
    coarse = _as_matrix(coarse, op.superpixels, "coarse matrix")
    return coarse[:, op.segmentation.labels.ravel()]
