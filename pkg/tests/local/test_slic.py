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
Multichannel SLIC oversegmentation.
"""

import numpy as np
import pytest

from hmua.core import DegenerateImage, EmptyMask, HyperCube, InvalidParameter
from hmua.segmentation import SlicParams, enforce_connectivity, slic_segment

from .scenes import constant_cube, two_halves


def test_one_seed_covers_everything():
    seg = slic_segment(constant_cube(10, 10), SlicParams.create(10))
    assert seg.superpixels == 1
    assert seg.is_complete


def test_constant_cube_regular_grid():
    seg = slic_segment(constant_cube(40, 40), SlicParams.create(8))
    assert seg.superpixels == 25
    assert list(seg.sizes()) == [64] * 25


def test_halves_not_straddled():
    seg = slic_segment(two_halves(), SlicParams.create(5, gamma=0.01))
    assert seg.superpixels in (2, 4)
    for k in range(seg.superpixels):
        columns = seg.members(k) % 10
        assert columns.max() < 5 or columns.min() >= 5


def test_spectral_fidelity_with_zero_gamma():
    cube = two_halves()

    def spread(gamma):
        seg = slic_segment(cube, SlicParams.create(5, gamma, iters=20))
        return sum(
            float(np.sum(np.var(cube.data[:, members], axis=1)))
            for members in seg.groups()
        )

    assert spread(0.0) <= spread(1.0)


def test_mean_size_near_sigma_squared():
    rng = np.random.default_rng(0)
    cube = HyperCube.from_image(0.1 * rng.random((32, 32, 4)))
    seg = slic_segment(cube, SlicParams.create(8, gamma=1.0))
    mean = cube.pixels / seg.superpixels
    assert 0.5 * 64 <= mean <= 2 * 64


def test_deterministic():
    rng = np.random.default_rng(1)
    cube = HyperCube.from_image(rng.random((24, 20, 3)))
    params = SlicParams.create(6, gamma=0.5)
    first = slic_segment(cube, params)
    second = slic_segment(cube, params)
    assert np.array_equal(first.labels, second.labels)


def test_masked_run_stays_inside():
    cube = two_halves()
    mask = np.zeros((10, 10), dtype=bool)
    mask[:, :5] = True
    seg = slic_segment(cube, SlicParams.create(3), mask=mask)
    assert not seg.is_complete
    assert np.all(seg.labels[:, 5:] == -1)
    assert np.all(seg.labels[:, :5] >= 0)
    by_index = slic_segment(
        cube, SlicParams.create(3), mask=np.flatnonzero(mask.ravel())
    )
    assert np.array_equal(seg.labels, by_index.labels)


def test_masked_islands_each_get_a_superpixel():
    cube = constant_cube(12, 12)
    mask = np.zeros((12, 12), dtype=bool)
    mask[0, 0] = True
    mask[6:12, 6:12] = True
    seg = slic_segment(cube, SlicParams.create(6), mask=mask)
    assert seg.labels[0, 0] >= 0
    assert seg.labels[0, 0] not in set(seg.labels[6:, 6:].ravel())


def test_errors():
    with pytest.raises(EmptyMask):
        slic_segment(
            constant_cube(4, 4), SlicParams.create(2),
            mask=np.zeros(16, dtype=bool)
        )
    with pytest.raises(DegenerateImage):
        slic_segment(constant_cube(4, 4), SlicParams.create(5))
    with pytest.raises(InvalidParameter):
        SlicParams.create(0.5)
    with pytest.raises(InvalidParameter):
        SlicParams.create(4, min_size_fraction=0.0)


def test_enforce_connectivity_merges_fragments():
    labels = np.array([[0, 0, 1, 1], [0, 0, 1, 1], [0, 0, 1, 0]])
    region = np.ones(labels.shape, dtype=bool)
    merged = enforce_connectivity(labels, region, 2)
    assert merged.tolist() == [[0, 0, 1, 1], [0, 0, 1, 1], [0, 0, 1, 1]]
