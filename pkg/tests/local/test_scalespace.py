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
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hmua.core import DimensionMismatch, SegmentationMap
from hmua.unmixing import build_operator, coarsen, uncoarsen


def stripes(rows, cols, width):
    """Vertical stripes of the given width, each a superpixel."""
    return SegmentationMap.create(
        np.tile(np.arange(cols) // width, (rows, 1))
    )


def singletons(rows, cols):
    return SegmentationMap.create(np.arange(rows * cols).reshape(rows, cols))


def test_build_operator_sizes():
    op = build_operator(SegmentationMap.create(np.zeros((2, 2), int)))
    assert op.superpixels == 1
    assert list(op.sizes) == [4]
    with pytest.warns(RuntimeWarning):
        op = build_operator(singletons(2, 2))
    assert list(op.sizes) == [1, 1, 1, 1]


def test_coarsen_means():
    op = build_operator(SegmentationMap.create(np.zeros((1, 2), int)))
    assert coarsen([[1, 3], [2, 4]], op).tolist() == [[2.0], [3.0]]


def test_singletons_are_identity():
    with pytest.warns(RuntimeWarning):
        op = build_operator(singletons(2, 3))
    M = np.arange(12, dtype=float).reshape(2, 6)
    assert np.array_equal(coarsen(M, op), M)
    assert np.array_equal(uncoarsen(M, op), M)


def test_uncoarsen_replicates():
    op = build_operator(SegmentationMap.create(np.zeros((1, 3), int)))
    assert uncoarsen([[0.5]], op).tolist() == [[0.5, 0.5, 0.5]]


def test_shape_errors():
    op = build_operator(stripes(2, 4, 2))
    with pytest.raises(DimensionMismatch):
        coarsen(np.ones((3, 7)), op)
    with pytest.raises(DimensionMismatch):
        uncoarsen(np.ones((3, 3)), op)


def test_partial_segmentation_rejected():
    seg = SegmentationMap.create([[-1, 0]], mask=[[False, True]])
    with pytest.raises(DimensionMismatch):
        build_operator(seg)


@settings(max_examples=30, deadline=None)
@given(
    st.integers(1, 6),
    st.integers(2, 6),
    st.integers(1, 3),
    st.integers(0, 2**31 - 1),
)
def test_operator_algebra(rows, width, bands, seed):
    cols = 12
    seg = stripes(rows, cols, width)
    op = build_operator(seg)
    rng = np.random.default_rng(seed)
    M1 = rng.standard_normal((bands, rows * cols))
    M2 = rng.standard_normal((bands, rows * cols))
    C = coarsen(M1, op)
    # Projection.
    np.testing.assert_allclose(coarsen(uncoarsen(C, op), op), C, atol=1e-12)
    # Mass preservation.
    np.testing.assert_allclose(
        (C * op.sizes).sum(axis=1), M1.sum(axis=1), atol=1e-10
    )
    # Linearity.
    np.testing.assert_allclose(
        coarsen(2.5 * M1 - 0.5 * M2, op),
        2.5 * C - 0.5 * coarsen(M2, op),
        atol=1e-12
    )
