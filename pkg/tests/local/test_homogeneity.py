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
Homogeneity test and hierarchical refinement.
"""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hmua.core import (
    DimensionMismatch, EmptyVector, HomogeneityParams, HyperCube,
    InvalidLabel, NonDecreasingSigmas, SegmentationMap
)
from hmua.segmentation import (
    SlicParams, assess, distance_vector, homogeneity_deviation, refine,
    refine_rounds, slic_segment, superpixel_median
)

from .scenes import constant_cube, mixed_scene

STRICT = HomogeneityParams.create(tau_outliers=0.1, tau_homog=0.01)


def row_cube(spectra):
    """One row of pixels with the given spectra."""
    spectra = np.asarray(spectra, dtype=float)
    if spectra.ndim == 1:
        spectra = spectra[:, np.newaxis]
    return HyperCube.create(1, spectra.shape[0], spectra.T)


def whole(cube):
    return SegmentationMap.create(np.zeros((cube.rows, cube.cols), int))


@pytest.mark.parametrize(
    "values,median", [
        ([1.0, 2.0, 100.0], [2.0]),
        ([1.0, 3.0], [2.0]),
        ([[0.0, 5.0]] * 3, [0.0, 5.0]),
    ]
)
def test_median(values, median):
    cube = row_cube(values)
    assert superpixel_median(cube, whole(cube), 0).tolist() == median


def test_median_bad_label():
    cube = row_cube([1.0, 2.0])
    with pytest.raises(InvalidLabel):
        superpixel_median(cube, whole(cube), 1)


def test_distance_vectors():
    cube = row_cube([[0.0, 3.0], [0.0, -3.0]])
    assert distance_vector(cube, whole(cube), 0).tolist() == [3.0, 3.0]
    cube = row_cube([[1.0, 0.0], [0.0, 0.0], [-1.0, 0.0]])
    assert distance_vector(cube, whole(cube), 0).tolist() == [1.0, 0.0, 1.0]
    cube = row_cube([[0.5, 0.5]] * 4)
    assert distance_vector(cube, whole(cube), 0).tolist() == [0.0] * 4


def test_outlier_is_trimmed():
    params = HomogeneityParams.create(tau_outliers=0.2, tau_homog=0.0)
    assert homogeneity_deviation([1, 1, 1, 1, 10], params) == (0.0, True)
    untrimmed = HomogeneityParams.create(tau_outliers=0.0, tau_homog=0.0)
    delta, flag = homogeneity_deviation([1, 1, 1, 1, 10], untrimmed)
    assert delta > 0.0 and not flag


def test_deviation_value():
    params = HomogeneityParams.create(tau_outliers=0.0, tau_homog=0.3)
    delta, flag = homogeneity_deviation([1, 1, 2], params)
    assert delta == pytest.approx(0.5)
    assert not flag
    assert homogeneity_deviation([0, 0, 0], params) == (0.0, True)


def test_deviation_needs_distances():
    with pytest.raises(EmptyVector):
        homogeneity_deviation([], HomogeneityParams())


def test_heavy_trimming_keeps_one_distance():
    params = HomogeneityParams.create(tau_outliers=0.9, tau_homog=0.0)
    assert homogeneity_deviation([5.0, 3.0], params) == (0.0, True)


@given(
    st.lists(st.integers(0, 1000), min_size=1, max_size=40),
    st.floats(0.1, 10.0),
    st.floats(0.0, 0.5),
)
def test_deviation_scale_invariant(values, scale, tau):
    params = HomogeneityParams.create(tau_outliers=tau)
    d = np.array(values, dtype=float) / 10.0
    base, _ = homogeneity_deviation(d, params)
    scaled, _ = homogeneity_deviation(scale * d, params)
    assert scaled == pytest.approx(base, rel=1e-9, abs=1e-12)


def test_assess_counts_homogeneous():
    # 100 superpixels of three pixels; 16 of them hold one odd pixel.
    values = np.zeros(300)
    for k in range(16):
        values[3 * k + 2] = 1.0
    cube = row_cube(values)
    seg = SegmentationMap.create((np.arange(300) // 3).reshape(1, 300))
    params = HomogeneityParams.create(tau_outliers=0.0, tau_homog=0.2)
    report = assess(cube, seg, params)
    assert report.eta == pytest.approx(84.0)
    assert report.homogeneous == 84
    assert report.superpixels == 100
    assert np.array_equal(report.flags, report.deltas <= 0.2)
    parallel = assess(cube, seg, params, n_jobs=2)
    assert np.array_equal(parallel.deltas, report.deltas)


def test_constant_cube_fully_homogeneous():
    cube = constant_cube(12, 12)
    seg = slic_segment(cube, SlicParams.create(4))
    assert assess(cube, seg, STRICT).eta == 100.0


def test_two_cluster_superpixel_flagged():
    cube = row_cube([[0.0, 0.0]] * 6 + [[5.0, 5.0]] * 4)
    report = assess(cube, whole(cube), HomogeneityParams())
    assert report.deltas[0] == pytest.approx(2.0)
    assert not report.flags[0]


def test_singletons_homogeneous():
    cube = row_cube([0.0, 7.0, 1.0])
    seg = SegmentationMap.create([[0, 1, 2]])
    report = assess(cube, seg, STRICT)
    assert report.deltas.tolist() == [0.0, 0.0, 0.0]
    assert report.eta == 100.0


def test_assess_checks_cover():
    cube = constant_cube(4, 4)
    with pytest.raises(DimensionMismatch):
        assess(cube, SegmentationMap.create(np.zeros((4, 3), int)), STRICT)


def test_refine_homogeneous_is_noop():
    cube = constant_cube(16, 16)
    seg0 = slic_segment(cube, SlicParams.create(8))
    final, etas = refine(cube, seg0, [4, 2], 0.01, STRICT)
    assert np.array_equal(final.labels, seg0.canonical().labels)
    assert etas == [100.0]


def test_refine_rejects_increasing_sigmas():
    cube = constant_cube(16, 16)
    seg0 = slic_segment(cube, SlicParams.create(8))
    with pytest.raises(NonDecreasingSigmas):
        refine(cube, seg0, [5, 7], 0.01, STRICT)


def test_refine_splits_textured_half_only():
    cube = mixed_scene(size=32)
    seg0 = slic_segment(cube, SlicParams.create(16, gamma=5.0))
    report0 = assess(cube, seg0, STRICT)
    final, etas = refine(cube, seg0, [8], 5.0, STRICT)

    assert final.superpixels > seg0.superpixels
    assert etas[-1] > etas[0]
    assert final.homogeneous is not None
    # Superpixels found homogeneous at the start survive intact.
    for k in np.flatnonzero(report0.flags):
        members = seg0.members(k)
        assert len(set(final.labels.ravel()[members])) == 1


def test_refine_rounds_yield_per_round():
    cube = mixed_scene(size=32)
    seg0 = slic_segment(cube, SlicParams.create(16, gamma=5.0))
    rounds = list(refine_rounds(cube, seg0, [8, 4], 5.0, STRICT))
    assert 1 <= len(rounds) <= 2
    for seg, report in rounds:
        assert seg.superpixels == report.superpixels
        assert np.array_equal(seg.homogeneous, report.flags)
    assert rounds[0][0].scale == 1
