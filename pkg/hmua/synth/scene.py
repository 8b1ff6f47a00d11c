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
Synthetic scenes: spatially correlated abundance fields mixed through a
library and corrupted with noise at an exact signal-to-noise ratio.

Three patterns are available:

uniform-blocks
    Voronoi cells of pure pixels, borders blurred by a box filter of width
    ``smoothness``.
irregular-blobs
    Box-filtered white noise fields projected pixel by pixel onto the
    probability simplex, giving regions of irregular size and contour.
quadrant-composite
    Four quadrants drawn independently: large blocks, blobs, small blocks and
    fine blobs.
"""

import math
from typing import Any, Dict, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from hmua.core import (
    AbundanceMap, ConfigError, DimensionMismatch, HyperCube, IndexOutOfRange,
    InvalidParameter, SpectralLibrary, ZeroSignal
)
from hmua.core.types import frozen

PATTERNS = ("uniform-blocks", "irregular-blobs", "quadrant-composite")

# Mean Voronoi cell side, in pixels, of the uniform-blocks pattern.
BLOCK_SIDE = 20
# Gain applied to standardized random fields before simplex projection.
BLOB_CONTRAST = 2.0


def make_rng(seed: Any) -> np.random.Generator:
    """Counter-based generator; equal seeds give equal streams everywhere."""
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.Philox(seed))
    return np.random.Generator(np.random.Philox(int(seed)))


def noise_seed(seed: int) -> np.random.SeedSequence:
    """Seed of the noise stream, independent of the abundance stream."""
    return np.random.SeedSequence(seed).spawn(1)[0]


class SceneSpec(NamedTuple):
    rows: int
    cols: int
    endmember_count: int
    pattern: str = "uniform-blocks"
    smoothness: int = 3
    seed: int = 0

    @classmethod
    def create(
        cls,
        rows: int,
        cols: int,
        endmember_count: int,
        pattern: str = "uniform-blocks",
        smoothness: int = 3,
        seed: int = 0,
    ) -> "SceneSpec":
        if rows < 1 or cols < 1:
            raise InvalidParameter("scene must be at least 1x1")
        if endmember_count < 2:
            raise InvalidParameter(
                "a scene needs at least 2 endmembers, got {}".format(
                    endmember_count
                )
            )
        if pattern not in PATTERNS:
            raise InvalidParameter(
                "pattern {!r} is not one of {}".format(
                    pattern, ", ".join(PATTERNS)
                )
            )
        if smoothness < 0:
            raise InvalidParameter("smoothness must be >= 0")
        if seed < 0:
            raise InvalidParameter("seed must be >= 0")
        return cls(
            int(rows), int(cols), int(endmember_count), pattern,
            int(smoothness), int(seed)
        )

    @classmethod
    def from_dict(cls, document: Dict[str, Any]) -> "SceneSpec":
        """Build from the scene JSON document (keys are the field names)."""
        unknown = sorted(set(document) - set(cls._fields))
        if unknown:
            raise ConfigError(
                "unknown scene keys: {}".format(", ".join(unknown))
            )
        missing = [
            key for key in ("rows", "cols", "endmember_count")
            if key not in document
        ]
        if missing:
            raise ConfigError(
                "scene is missing: {}".format(", ".join(missing))
            )
        try:
            return cls.create(**document)
        except (TypeError, InvalidParameter) as exc:
            raise ConfigError("invalid scene: {}".format(exc))

    def as_dict(self) -> Dict[str, Any]:
        return dict(self._asdict())


def _smooth(field: np.ndarray, width: int, passes: int = 1) -> np.ndarray:
    """Separable box filter over the two trailing (spatial) axes."""
    if width < 2:
        return field
    for _ in range(passes):
        field = ndimage.uniform_filter1d(field, width, axis=-2, mode="nearest")
        field = ndimage.uniform_filter1d(field, width, axis=-1, mode="nearest")
    return field


def project_simplex(values: np.ndarray) -> np.ndarray:
    """Euclidean projection of every column onto the probability simplex."""
    count, columns = values.shape
    ordered = -np.sort(-values, axis=0)
    partial = np.cumsum(ordered, axis=0) - 1.0
    steps = np.arange(1, count + 1)[:, np.newaxis]
    positive = ordered - partial / steps > 0
    last = count - 1 - np.argmax(positive[::-1], axis=0)
    theta = partial[last, np.arange(columns)] / (last + 1)
    return np.maximum(values - theta, 0.0)


def _blocks(
    rng: np.random.Generator,
    count: int,
    rows: int,
    cols: int,
    side: int,
    smoothness: int,
) -> np.ndarray:
    sites = max(count, int(round(rows * cols / float(side * side))))
    centers = rng.uniform((0, 0), (rows, cols), size=(sites, 2))
    owners = np.concatenate(
        (rng.permutation(count), rng.integers(0, count, sites - count))
    )
    rr, cc = np.mgrid[0:rows, 0:cols]
    grid = np.stack([rr.ravel(), cc.ravel()], axis=1).astype(np.float64)
    nearest = np.empty(rows * cols, dtype=np.int64)
    # Chunked to bound the pixel x site distance matrix.
    for start in range(0, grid.shape[0], 4096):
        chunk = grid[start:start + 4096]
        gaps = np.sum((chunk[:, np.newaxis, :] - centers)**2, axis=2)
        nearest[start:start + 4096] = np.argmin(gaps, axis=1)
    field = np.zeros((count, rows * cols))
    field[owners[nearest], np.arange(rows * cols)] = 1.0
    return _smooth(field.reshape(count, rows, cols), smoothness)


def _blobs(
    rng: np.random.Generator,
    count: int,
    rows: int,
    cols: int,
    smoothness: int,
) -> np.ndarray:
    field = _smooth(rng.standard_normal((count, rows, cols)), smoothness, 2)
    spread = field.std(axis=(1, 2), keepdims=True)
    spread[spread == 0] = 1.0
    field = BLOB_CONTRAST * (field - field.mean(axis=(1, 2), keepdims=True))
    field /= spread
    projected = project_simplex(field.reshape(count, rows * cols))
    return projected.reshape(count, rows, cols)


def _quadrants(
    seed: Any,
    count: int,
    rows: int,
    cols: int,
    smoothness: int,
) -> np.ndarray:
    field = np.zeros((count, rows, cols))
    children = np.random.SeedSequence(seed).spawn(4)
    half_rows, half_cols = rows // 2, cols // 2
    windows = (
        (slice(0, half_rows), slice(0, half_cols)),
        (slice(0, half_rows), slice(half_cols, cols)),
        (slice(half_rows, rows), slice(0, half_cols)),
        (slice(half_rows, rows), slice(half_cols, cols)),
    )
    fine = max(smoothness // 2, 0)
    for index, (window, child) in enumerate(zip(windows, children)):
        height = window[0].stop - window[0].start
        width = window[1].stop - window[1].start
        if height == 0 or width == 0:
            continue
        rng = make_rng(child)
        if index == 0:
            part = _blocks(rng, count, height, width, BLOCK_SIDE, smoothness)
        elif index == 1:
            part = _blobs(rng, count, height, width, smoothness)
        elif index == 2:
            part = _blocks(rng, count, height, width, BLOCK_SIDE // 2, fine)
        else:
            part = _blobs(rng, count, height, width, fine)
        field[:, window[0], window[1]] = part
    return field


def generate_abundances(spec: SceneSpec) -> AbundanceMap:
    """
    Draw a P_true x N abundance map; every column is on the simplex.
    """
    count, rows, cols = spec.endmember_count, spec.rows, spec.cols
    if spec.pattern == "uniform-blocks":
        field = _blocks(
            make_rng(spec.seed), count, rows, cols, BLOCK_SIDE, spec.smoothness
        )
    elif spec.pattern == "irregular-blobs":
        field = _blobs(make_rng(spec.seed), count, rows, cols, spec.smoothness)
    elif spec.pattern == "quadrant-composite":
        field = _quadrants(spec.seed, count, rows, cols, spec.smoothness)
    else:
        raise InvalidParameter("unknown pattern {!r}".format(spec.pattern))
    matrix = np.maximum(field.reshape(count, rows * cols), 0.0)
    matrix /= matrix.sum(axis=0, keepdims=True)
    return AbundanceMap.create(matrix)


def _default_shape(pixels: int) -> Tuple[int, int]:
    side = int(math.isqrt(pixels))
    if side * side == pixels:
        return side, side
    return 1, pixels


def mix_and_corrupt(
    X: AbundanceMap,
    A: SpectralLibrary,
    endmember_ids: Sequence[int],
    snr_db: float,
    seed: Any,
    shape: Optional[Tuple[int, int]] = None,
) -> HyperCube:
    """
    Mix abundances through the selected library columns and add white
    Gaussian noise scaled so the realized SNR equals snr_db exactly.

    :param snr_db: target SNR; +inf gives a noiseless cube
    :param shape: (rows, cols); defaults to square when N is a square
    """
    ids = [int(i) for i in endmember_ids]
    bad = [i for i in ids if i < 0 or i >= A.count]
    if bad:
        raise IndexOutOfRange(
            "endmember ids {} outside 0..{}".format(bad, A.count - 1)
        )
    if len(ids) != X.endmembers:
        raise DimensionMismatch(
            "{} endmember ids for {} abundance rows".format(
                len(ids), X.endmembers
            )
        )
    rows, cols = shape if shape is not None else _default_shape(X.pixels)
    if rows * cols != X.pixels:
        raise DimensionMismatch(
            "shape {}x{} does not hold {} pixels".format(rows, cols, X.pixels)
        )
    signal = A.data[:, ids] @ X.data
    if math.isinf(snr_db) and snr_db > 0:
        return HyperCube.create(rows, cols, signal, np.zeros_like(signal))
    if not math.isfinite(snr_db):
        raise InvalidParameter("snr must be finite or +inf")
    energy = float(np.sum(signal**2))
    if energy == 0:
        raise ZeroSignal("mixed signal has zero energy")
    noise = make_rng(seed).standard_normal(signal.shape)
    target = energy / 10.0**(snr_db / 10.0)
    noise *= math.sqrt(target / float(np.sum(noise**2)))
    return HyperCube.create(rows, cols, signal + noise, noise)


def noiseless(cube: HyperCube) -> np.ndarray:
    """The clean signal of a synthetic cube."""
    if cube.noise is None:
        raise InvalidParameter("cube carries no noise realization")
    return frozen(cube.data - cube.noise)


def embed(
    X: AbundanceMap, endmember_ids: Sequence[int], count: int
) -> AbundanceMap:
    """Place a P_true x N map into the rows of a count-signature library."""
    ids = [int(i) for i in endmember_ids]
    if len(ids) != X.endmembers:
        raise DimensionMismatch(
            "{} endmember ids for {} abundance rows".format(
                len(ids), X.endmembers
            )
        )
    if any(i < 0 or i >= count for i in ids) or len(set(ids)) != len(ids):
        raise IndexOutOfRange(
            "endmember ids must be distinct in 0..{}".format(count - 1)
        )
    full = np.zeros((count, X.pixels))
    full[ids] = X.data
    return AbundanceMap.create(full)
