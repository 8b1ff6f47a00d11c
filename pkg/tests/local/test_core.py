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
Domain types and their validation.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from hmua.core import (
    AbundanceMap, DegenerateLibrary, DimensionMismatch, HmuaError,
    HomogeneityParams, HyperCube, IndexOutOfRange, InvalidLabel,
    InvalidParameter, InvalidSegmentation, NegativeAbundance, NonConvergence,
    NonFinite, ParseError, SegmentationMap, SolverParams, SpectralLibrary,
    StorageError, canonical_labels, validate
)


def test_validate_matching_bands():
    cube = HyperCube.create(2, 2, np.ones((224, 4)))
    lib = SpectralLibrary.create(np.ones((224, 240)))
    validate(cube, lib)


def test_validate_band_mismatch():
    cube = HyperCube.create(1, 2, np.ones((3, 2)))
    lib = SpectralLibrary.create(np.ones((4, 2)))
    with pytest.raises(DimensionMismatch):
        validate(cube, lib)


def test_validate_rejects_nan():
    data = np.ones((3, 1))
    data[1, 0] = np.nan
    with pytest.raises(NonFinite):
        HyperCube.create(1, 1, data)
    unchecked = HyperCube(1, 1, data)
    with pytest.raises(NonFinite):
        validate(unchecked, SpectralLibrary.create(np.ones((3, 1))))


def test_cube_layout():
    image = np.arange(2 * 3 * 4, dtype=float).reshape(2, 3, 4)
    cube = HyperCube.from_image(image)
    assert (cube.rows, cube.cols, cube.bands, cube.pixels) == (2, 3, 4, 6)
    # Column n is pixel n in row-major order.
    assert np.array_equal(cube.data[:, 4], image[1, 1])
    assert np.array_equal(cube.image(), image)
    assert not cube.data.flags.writeable


def test_cube_shape_checked():
    with pytest.raises(DimensionMismatch):
        HyperCube.create(2, 2, np.ones((3, 5)))
    with pytest.raises(InvalidParameter):
        HyperCube.create(0, 2, np.ones((3, 0)))


def test_library_names_and_zero_columns():
    lib = SpectralLibrary.create(np.eye(3))
    assert lib.names == ("em0", "em1", "em2")
    assert lib.select([2, 0]).names == ("em2", "em0")
    with pytest.raises(IndexOutOfRange):
        lib.select([3])
    with pytest.raises(DegenerateLibrary):
        SpectralLibrary.create([[1.0, 0.0], [2.0, 0.0]])
    with pytest.raises(DimensionMismatch):
        SpectralLibrary.create(np.eye(2), names=["a"])


def test_abundance_negatives():
    with pytest.raises(NegativeAbundance):
        AbundanceMap.create([[0.5, -1e-13]])
    clamped = AbundanceMap.clamped([[0.5, -1e-13]])
    assert clamped.data[0, 1] == 0.0
    with pytest.raises(NegativeAbundance):
        AbundanceMap.clamped([[0.5, -1e-11]])


@given(
    hnp.arrays(
        np.int64, hnp.array_shapes(min_dims=2, max_dims=2, max_side=8),
        elements=st.integers(-1, 6)
    )
)
def test_canonical_labels_idempotent(labels):
    once, old_ids = canonical_labels(labels)
    twice, _ = canonical_labels(once)
    assert np.array_equal(once, twice)
    assert np.array_equal(once < 0, labels < 0)
    # First occurrences appear in increasing order.
    flat = once.ravel()
    seen = [value for index, value in enumerate(flat)
            if value >= 0 and value not in flat[:index]]
    assert seen == list(range(len(old_ids)))


def test_segmentation_invariants():
    with pytest.raises(InvalidSegmentation):
        SegmentationMap.create([[0, 1, 0]])
    with pytest.raises(InvalidSegmentation):
        SegmentationMap.create([[0, 2]])
    with pytest.raises(InvalidSegmentation):
        SegmentationMap.create([[-1, 0]])
    partial = SegmentationMap.create([[-1, 0]], mask=[[False, True]])
    assert not partial.is_complete
    assert partial.superpixels == 1
    with pytest.raises(DimensionMismatch):
        SegmentationMap.create([[0, 1]], homogeneous=[True])


def test_segmentation_members_and_groups():
    seg = SegmentationMap.create([[1, 1, 0], [1, 0, 0]])
    assert seg.superpixels == 2
    assert list(seg.sizes()) == [3, 3]
    assert list(seg.members(1)) == [0, 1, 3]
    assert [list(group) for group in seg.groups()] == [[2, 4, 5], [0, 1, 3]]
    with pytest.raises(InvalidLabel):
        seg.members(2)


def test_canonical_carries_flags():
    seg = SegmentationMap.create([[1, 0]], homogeneous=[True, False])
    canonical = seg.canonical()
    assert canonical.labels.tolist() == [[0, 1]]
    assert canonical.homogeneous.tolist() == [False, True]
    assert canonical.canonical().labels.tolist() == [[0, 1]]


def test_parameter_ranges():
    with pytest.raises(InvalidParameter):
        SolverParams.create(lam=-1.0)
    with pytest.raises(InvalidParameter):
        SolverParams.create(mu=0.0)
    with pytest.raises(InvalidParameter):
        SolverParams.create(max_iters=0)
    with pytest.raises(InvalidParameter):
        HomogeneityParams.create(tau_outliers=1.0)
    assert SolverParams.create().tol == 1e-6


def test_exit_codes():
    assert DimensionMismatch.exit_code == 2
    assert issubclass(DimensionMismatch, ValueError)
    assert issubclass(ParseError, StorageError)
    assert ParseError.exit_code == 3
    assert NonConvergence.exit_code == 4
    assert issubclass(StorageError, HmuaError)
