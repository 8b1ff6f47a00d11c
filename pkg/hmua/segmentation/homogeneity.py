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
Robust homogeneity test for superpixels and the hierarchical refinement that
re-segments the superpixels failing it.

A superpixel is homogeneous when its pixels sit at a near-constant distance
from their per-band median: after dropping the largest tau_outliers fraction
of distances, the relative gap between the largest remaining distance and
their mean must not exceed tau_homog.
"""

import math
from typing import Any, Iterator, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from hmua.core import (
    DimensionMismatch, EmptyVector, HomogeneityParams, HyperCube,
    NonDecreasingSigmas, SegmentationMap
)

from .slic import SlicParams, slic_segment

# Superpixels smaller than this are never subdivided again.
MIN_SPLIT_SIZE = 4


class HomogeneityReport(NamedTuple):
    deltas: np.ndarray
    flags: np.ndarray
    eta: float

    @property
    def superpixels(self) -> int:
        return int(self.flags.size)

    @property
    def homogeneous(self) -> int:
        return int(np.count_nonzero(self.flags))


def _check_cover(cube: HyperCube, seg: SegmentationMap) -> None:
    if (seg.rows, seg.cols) != (cube.rows, cube.cols):
        raise DimensionMismatch(
            "segmentation is {}x{} but cube is {}x{}".format(
                seg.rows, seg.cols, cube.rows, cube.cols
            )
        )


def superpixel_median(
    cube: HyperCube, seg: SegmentationMap, k: int
) -> np.ndarray:
    """Per-band median of superpixel k (mean of the middle pair if even)."""
    _check_cover(cube, seg)
    return np.median(cube.data[:, seg.members(k)], axis=1)


def _distances(spectra: np.ndarray) -> np.ndarray:
    median = np.median(spectra, axis=1)
    return np.linalg.norm(spectra - median[:, np.newaxis], axis=0)


def distance_vector(
    cube: HyperCube, seg: SegmentationMap, k: int
) -> np.ndarray:
    """Distance of each member of k to the median, in row-major order."""
    _check_cover(cube, seg)
    return _distances(cube.data[:, seg.members(k)])


def homogeneity_deviation(
    d: Any, params: HomogeneityParams
) -> Tuple[float, bool]:
    """
    Trimmed max-to-mean deviation of a distance vector.

    :return: (delta, delta <= tau_homog)
    """
    d = np.asarray(d, dtype=np.float64).ravel()
    if d.size == 0:
        raise EmptyVector("no distances to test")
    ordered = d[np.argsort(-d, kind="stable")]
    retained = (1.0 - params.tau_outliers) * d.size
    keep = max(1, int(math.floor(retained + 1e-9)))
    kept = ordered[d.size - keep:]
    mean = float(kept.mean())
    if mean == 0:
        return 0.0, True
    delta = (float(kept[0]) - mean) / mean
    return delta, delta <= params.tau_homog


def _group_deviation(
    spectra: np.ndarray, params: HomogeneityParams
) -> Tuple[float, bool]:
    if spectra.shape[1] == 1:
        return 0.0, True
    return homogeneity_deviation(_distances(spectra), params)


def assess(
    cube: HyperCube,
    seg: SegmentationMap,
    params: HomogeneityParams,
    n_jobs: int = 1,
) -> HomogeneityReport:
    """Test every superpixel; singletons are homogeneous with delta 0."""
    _check_cover(cube, seg)
    groups = seg.groups()
    if n_jobs > 1 and len(groups) > 1:
        results = Parallel(n_jobs=n_jobs)(
            delayed(_group_deviation)(cube.data[:, members], params)
            for members in groups
        )
    else:
        results = [
            _group_deviation(cube.data[:, members], params)
            for members in groups
        ]
    deltas = np.array([delta for delta, _ in results], dtype=np.float64)
    flags = np.array([flag for _, flag in results], dtype=bool)
    eta = 100.0 * np.count_nonzero(flags) / flags.size if flags.size else 0.0
    return HomogeneityReport(deltas, flags, float(eta))


def check_sigmas(sigmas: Sequence[float]) -> None:
    for previous, current in zip(sigmas, sigmas[1:]):
        if not current < previous:
            raise NonDecreasingSigmas(
                "refinement sizes must strictly decrease: {}".format(
                    list(sigmas)
                )
            )


def _splice(
    seg: SegmentationMap, targets: np.ndarray, partial: SegmentationMap
) -> np.ndarray:
    """
    Keep untargeted superpixels (renumbered in order), append the new ones.
    """
    kept = np.flatnonzero(~targets)
    lookup = np.full(targets.size, -1, dtype=np.int64)
    lookup[kept] = np.arange(kept.size)
    labels = lookup[seg.labels]
    inside = partial.labels >= 0
    labels[inside] = partial.labels[inside] + kept.size
    return labels


def refine_rounds(
    cube: HyperCube,
    seg0: SegmentationMap,
    sigmas: Sequence[float],
    gamma: float,
    hp: HomogeneityParams,
    report: Optional[HomogeneityReport] = None,
    iters: int = 10,
    min_size_fraction: float = 0.25,
    n_jobs: int = 1,
) -> Iterator[Tuple[SegmentationMap, HomogeneityReport]]:
    """
    Yield the segmentation and its report after each executed round.

    Rounds stop once every superpixel is homogeneous, when no non-homogeneous
    superpixel is large enough to split, or when a round leaves the
    partition unchanged. In a yielded map the surviving superpixels come
    first, followed by the new ones.
    """
    sigmas = [float(sigma) for sigma in sigmas]
    check_sigmas(sigmas)
    if report is None:
        report = assess(cube, seg0, hp, n_jobs)
    seg = seg0.with_flags(report.flags)
    for sigma in sigmas:
        if report.eta >= 100.0:
            return
        targets = ~report.flags & (seg.sizes() >= MIN_SPLIT_SIZE)
        if not targets.any():
            return
        params = SlicParams.create(sigma, gamma, iters, min_size_fraction)
        partial = slic_segment(cube, params, mask=targets[seg.labels])
        labels = _splice(seg, targets, partial)
        candidate = SegmentationMap.create(labels, scale=seg.scale + 1)
        if np.array_equal(
            candidate.canonical().labels,
            seg.canonical().labels
        ):
            return
        report = assess(cube, candidate, hp, n_jobs)
        seg = candidate.with_flags(report.flags)
        yield seg, report


def refine(
    cube: HyperCube,
    seg0: SegmentationMap,
    sigmas: Sequence[float],
    gamma: float,
    hp: HomogeneityParams,
    **options: Any
) -> Tuple[SegmentationMap, List[float]]:
    """
    Refine seg0 over the decreasing sizes sigmas.

    :return: the final map in canonical order and eta for every round run,
        starting with seg0's
    """
    check_sigmas(list(sigmas))
    report = assess(cube, seg0, hp, options.get("n_jobs", 1))
    final = seg0.with_flags(report.flags)
    etas = [report.eta]
    for final, report in refine_rounds(
        cube, final, sigmas, gamma, hp, report=report, **options
    ):
        etas.append(report.eta)
    return final.canonical(), etas
