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

Seeds sit on a regular grid of spacing sigma and are refined by windowed
k-means over the joint distance

    D = sqrt(d_spec^2 + (gamma / sigma)^2 d_xy^2)

where d_spec is the Euclidean distance over all bands of the raw reflectance
and d_xy the spatial distance. A final pass merges small 4-connected fragments
into their largest neighbor so every superpixel is connected.

When a mask is given, seeds are placed and pixels assigned only inside it;
pixels outside carry label -1 in the returned map.
"""

import math
from typing import Any, Dict, List, NamedTuple, Optional, Set, Tuple

import numpy as np
from scipy import ndimage, sparse

from hmua.core import (
    DegenerateImage, DimensionMismatch, EmptyMask, HyperCube,
    IndexOutOfRange, InvalidParameter, SegmentationMap, canonical_labels
)

Pixel = Tuple[int, int]


class SlicParams(NamedTuple):
    sigma: float
    gamma: float = 0.01
    iters: int = 10
    min_size_fraction: float = 0.25

    @classmethod
    def create(
        cls,
        sigma: float,
        gamma: float = 0.01,
        iters: int = 10,
        min_size_fraction: float = 0.25,
    ) -> "SlicParams":
        sigma = float(sigma)
        gamma = float(gamma)
        if not (math.isfinite(sigma) and sigma >= 1):
            raise InvalidParameter("sigma must be >= 1, got {}".format(sigma))
        if not (math.isfinite(gamma) and gamma >= 0):
            raise InvalidParameter("gamma must be >= 0, got {}".format(gamma))
        if int(iters) != iters or iters < 1:
            raise InvalidParameter("iters must be an integer >= 1")
        if not 0 < min_size_fraction <= 1:
            raise InvalidParameter("min_size_fraction must lie in (0, 1]")
        return cls(sigma, gamma, int(iters), float(min_size_fraction))


def _region(mask: Any, rows: int, cols: int) -> np.ndarray:
    """Turn a boolean image, boolean vector or index list into a bool grid."""
    if mask is None:
        return np.ones((rows, cols), dtype=bool)
    array = np.asarray(mask)
    if array.dtype == bool:
        if array.size != rows * cols:
            raise DimensionMismatch(
                "mask has {} entries for {} pixels".format(
                    array.size, rows * cols
                )
            )
        return array.reshape(rows, cols).copy()
    indices = array.astype(np.int64).ravel()
    if indices.size and (indices.min() < 0 or indices.max() >= rows * cols):
        raise IndexOutOfRange("mask pixel index outside the image")
    region = np.zeros(rows * cols, dtype=bool)
    region[indices] = True
    return region.reshape(rows, cols)


def _grid(length: int, sigma: float) -> np.ndarray:
    count = max(1, int(math.floor(length / sigma + 0.5)))
    return np.floor((np.arange(count) + 0.5) * length / count).astype(int)


def _gradient(image: np.ndarray) -> np.ndarray:
    """Squared spectral gradient magnitude with edge replication."""
    padded = np.pad(image, ((1, 1), (1, 1), (0, 0)), mode="edge")
    vertical = padded[2:, 1:-1] - padded[:-2, 1:-1]
    horizontal = padded[1:-1, 2:] - padded[1:-1, :-2]
    return np.sum(vertical**2, axis=2) + np.sum(horizontal**2, axis=2)


def _place_seeds(
    image: np.ndarray, region: np.ndarray, sigma: float
) -> List[Pixel]:
    rows, cols = region.shape
    components, count = ndimage.label(region)
    seeds = [(int(r), int(c)) for r in _grid(rows, sigma)
             for c in _grid(cols, sigma) if region[r, c]]

    # Every mask component gets at least one seed.
    seeded = {components[r, c] for r, c in seeds}
    windows = ndimage.find_objects(components)
    for index in range(1, count + 1):
        if index in seeded:
            continue
        window = windows[index - 1]
        local = np.argwhere(components[window] == index)
        centroid = local.mean(axis=0)
        r, c = local[np.argmin(np.sum((local - centroid)**2, axis=1))]
        seeds.append((int(r) + window[0].start, int(c) + window[1].start))

    gradient = _gradient(image)
    moved = []  # type: List[Pixel]
    seen = set()  # type: Set[Pixel]
    for r, c in seeds:
        best = None  # type: Optional[Pixel]
        for dr in (-1, 0, 1):
            for dc in (-1, 0, 1):
                rr, cc = r + dr, c + dc
                if not (0 <= rr < rows and 0 <= cc < cols):
                    continue
                if components[rr, cc] != components[r, c]:
                    continue
                if best is None or gradient[rr, cc] < gradient[best]:
                    best = (rr, cc)
        assert best is not None
        if best not in seen:
            seen.add(best)
            moved.append(best)
    return moved


def _assign(
    image: np.ndarray,
    region: np.ndarray,
    spectra: np.ndarray,
    positions: np.ndarray,
    sigma: float,
    weight: float,
) -> np.ndarray:
    """One k-means assignment pass; ties go to the smaller seed id."""
    rows, cols = region.shape
    best = np.full((rows, cols), np.inf)
    labels = np.full((rows, cols), -1, dtype=np.int64)
    for k in range(len(spectra)):
        row, col = positions[k]
        r0 = max(0, int(math.ceil(row - sigma)))
        r1 = min(rows, int(math.floor(row + sigma)) + 1)
        c0 = max(0, int(math.ceil(col - sigma)))
        c1 = min(cols, int(math.floor(col + sigma)) + 1)
        if r0 >= r1 or c0 >= c1:
            continue
        patch = image[r0:r1, c0:c1]
        distance = np.sum((patch - spectra[k])**2, axis=2)
        rr, cc = np.ogrid[r0:r1, c0:c1]
        distance += weight * ((rr - row)**2 + (cc - col)**2)
        distance[~region[r0:r1, c0:c1]] = np.inf
        better = distance < best[r0:r1, c0:c1]
        best[r0:r1, c0:c1][better] = distance[better]
        labels[r0:r1, c0:c1][better] = k
    return labels


def _update_centers(
    pixels: np.ndarray,
    labels: np.ndarray,
    spectra: np.ndarray,
    positions: np.ndarray,
) -> None:
    """Move centers to their cluster means; empty clusters stay put."""
    rows, cols = labels.shape
    flat = labels.ravel()
    assigned = np.flatnonzero(flat >= 0)
    count = len(spectra)
    members = sparse.csr_matrix(
        (np.ones(assigned.size), (flat[assigned], assigned)),
        shape=(count, flat.size),
    )
    sizes = np.asarray(members.sum(axis=1)).ravel()
    filled = sizes > 0
    sums = members @ pixels
    spectra[filled] = sums[filled] / sizes[filled, np.newaxis]
    row_index, col_index = np.divmod(np.arange(flat.size), cols)
    positions[filled, 0] = (members @ row_index)[filled] / sizes[filled]
    positions[filled, 1] = (members @ col_index)[filled] / sizes[filled]


def _fragments(labels: np.ndarray, region: np.ndarray) -> np.ndarray:
    """
    Split every label (and the unassigned in-mask pixels) into 4-connected
    pieces, numbered in first-occurrence order; -1 outside the mask.
    """
    shifted = np.where(region, labels + 2, 0)
    pieces = np.full(labels.shape, -1, dtype=np.int64)
    next_id = 0
    for value, window in enumerate(ndimage.find_objects(shifted), start=1):
        if window is None:
            continue
        local, count = ndimage.label(shifted[window] == value)
        inside = local > 0
        pieces[window][inside] = local[inside] - 1 + next_id
        next_id += count
    pieces, _ = canonical_labels(pieces)
    return pieces


def _merge_small(
    pieces: np.ndarray, unassigned: np.ndarray, min_size: float
) -> np.ndarray:
    """
    Merge fragments below min_size (and unassigned ones) into the largest
    adjacent group; ties go to the group seen first in scan order.
    """
    count = int(pieces.max()) + 1
    sizes = np.bincount(pieces[pieces >= 0], minlength=count)

    neighbors = [set() for _ in range(count)]  # type: List[Set[int]]
    for a, b in ((pieces[:, :-1], pieces[:, 1:]),
                 (pieces[:-1, :], pieces[1:, :])):
        touching = (a >= 0) & (b >= 0) & (a != b)
        pairs = np.unique(
            np.stack([a[touching], b[touching]], axis=1), axis=0
        ) if np.any(touching) else np.empty((0, 2), dtype=np.int64)
        for p, q in pairs:
            neighbors[p].add(int(q))
            neighbors[q].add(int(p))

    parent = list(range(count))
    group_size = sizes.astype(np.int64)
    loose = unassigned.copy()
    reach = {}  # type: Dict[int, Set[int]]

    def find(node: int) -> int:
        while parent[node] != node:
            parent[node] = parent[parent[node]]
            node = parent[node]
        return node

    for piece in sorted(range(count), key=lambda f: (sizes[f], f)):
        root = find(piece)
        if group_size[root] >= min_size and not loose[root]:
            continue
        around = reach.get(root, neighbors[root])
        candidates = {find(n) for n in around} - {root}
        if not candidates:
            continue
        target = min(
            candidates, key=lambda g: (bool(loose[g]), -group_size[g], g)
        )
        parent[root] = target
        group_size[target] += group_size[root]
        reach[target] = reach.get(target, neighbors[target]) | around

    merged = np.full(pieces.shape, -1, dtype=np.int64)
    inside = pieces >= 0
    roots = np.array([find(f) for f in range(count)], dtype=np.int64)
    merged[inside] = roots[pieces[inside]]
    return merged


def enforce_connectivity(
    labels: np.ndarray, region: np.ndarray, min_size: float
) -> np.ndarray:
    """
    Relabel so that every label is one 4-connected region covering the mask.
    """
    pieces = _fragments(labels, region)
    count = int(pieces.max()) + 1 if np.any(pieces >= 0) else 0
    unassigned = np.zeros(count, dtype=bool)
    if count:
        hit = pieces[(labels < 0) & region]
        unassigned[np.unique(hit)] = True
        pieces = _merge_small(pieces, unassigned, min_size)
    result, _ = canonical_labels(pieces)
    return result


def slic_segment(
    cube: HyperCube,
    params: SlicParams,
    mask: Any = None,
) -> SegmentationMap:
    """
    Oversegment a cube, or only the pixels in mask.

    :param mask: boolean rows x cols image, boolean N-vector or pixel indices
    """
    rows, cols = cube.rows, cube.cols
    region = _region(mask, rows, cols)
    if not region.any():
        raise EmptyMask("mask selects no pixels")
    sigma = float(params.sigma)
    if sigma > max(rows, cols):
        raise DegenerateImage(
            "sigma {} exceeds the {}x{} image".format(sigma, rows, cols)
        )

    image = np.ascontiguousarray(cube.image())
    pixels = image.reshape(rows * cols, cube.bands)
    seeds = _place_seeds(image, region, sigma)
    positions = np.array(seeds, dtype=np.float64)
    spectra = np.array([image[r, c] for r, c in seeds], dtype=np.float64)
    weight = (params.gamma / sigma)**2

    labels = np.full((rows, cols), -1, dtype=np.int64)
    for _ in range(params.iters):
        labels = _assign(image, region, spectra, positions, sigma, weight)
        _update_centers(pixels, labels, spectra, positions)

    final = enforce_connectivity(
        labels, region, params.min_size_fraction * sigma * sigma
    )
    return SegmentationMap.create(
        final, mask=None if mask is None else region
    )
