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
Domain types shared by every module.

All types are immutable tuples holding read-only numpy arrays. Build them with
their ``create`` class methods, which validate the invariants; the raw tuple
constructors skip validation and are reserved for code that already knows
its inputs are valid.
"""

import math
from typing import Any, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy import ndimage

from .errors import (
    DegenerateLibrary, DimensionMismatch, IndexOutOfRange, InvalidLabel,
    InvalidParameter, InvalidSegmentation, NegativeAbundance, NonFinite
)

# Negative abundances closer to zero than this are rounding noise.
CLAMP_TOLERANCE = 1e-12


def frozen(array: Any, dtype: Any = np.float64) -> np.ndarray:
    """Return a C-contiguous read-only copy of array."""
    result = np.array(array, dtype=dtype, copy=True, order="C")
    result.setflags(write=False)
    return result


def check_finite(array: np.ndarray, what: str) -> None:
    if not np.all(np.isfinite(array)):
        count = int(np.size(array) - np.count_nonzero(np.isfinite(array)))
        raise NonFinite("{} contains {} NaN/Inf entries".format(what, count))


def _check_matrix(array: np.ndarray, what: str) -> None:
    if array.ndim != 2:
        raise DimensionMismatch(
            "{} must be a matrix, got shape {}".format(what, array.shape)
        )


class HyperCube(NamedTuple):
    """
    An L-band image of rows x cols pixels.

    ``data`` is band-major: an L x N matrix whose column n is the spectrum of
    pixel n in row-major order. ``noise``, when present, is the additive noise
    realization that went into ``data`` (synthetic scenes only).
    """
    rows: int
    cols: int
    data: np.ndarray
    noise: Optional[np.ndarray] = None

    @classmethod
    def create(
        cls,
        rows: int,
        cols: int,
        data: Any,
        noise: Any = None,
    ) -> "HyperCube":
        if rows < 1 or cols < 1:
            raise InvalidParameter(
                "Cube dimensions must be positive, got {}x{}".format(
                    rows, cols
                )
            )
        matrix = np.asarray(data, dtype=np.float64)
        _check_matrix(matrix, "cube data")
        if matrix.shape[0] < 1 or matrix.shape[1] != rows * cols:
            raise DimensionMismatch(
                "cube data has shape {}, expected (L>=1, {})".format(
                    matrix.shape, rows * cols
                )
            )
        check_finite(matrix, "cube data")
        stored_noise = None
        if noise is not None:
            stored_noise = np.asarray(noise, dtype=np.float64)
            if stored_noise.shape != matrix.shape:
                raise DimensionMismatch(
                    "noise shape {} differs from data shape {}".format(
                        stored_noise.shape, matrix.shape
                    )
                )
            check_finite(stored_noise, "cube noise")
            stored_noise = frozen(stored_noise)
        return cls(int(rows), int(cols), frozen(matrix), stored_noise)

    @classmethod
    def from_image(cls, image: Any) -> "HyperCube":
        """Build a cube from a rows x cols x L array."""
        image = np.asarray(image, dtype=np.float64)
        if image.ndim != 3:
            raise DimensionMismatch(
                "image must be rows x cols x bands, got {}".format(image.shape)
            )
        rows, cols, bands = image.shape
        return cls.create(rows, cols, image.reshape(rows * cols, bands).T)

    @property
    def bands(self) -> int:
        return int(self.data.shape[0])

    @property
    def pixels(self) -> int:
        return self.rows * self.cols

    def image(self) -> np.ndarray:
        """Return a rows x cols x L view of the data."""
        return self.data.T.reshape(self.rows, self.cols, self.bands)


class SpectralLibrary(NamedTuple):
    """L x P matrix of endmember signatures, one named column each."""
    data: np.ndarray
    names: Tuple[str, ...]

    @classmethod
    def create(
        cls, data: Any, names: Optional[Sequence[str]] = None
    ) -> "SpectralLibrary":
        matrix = np.asarray(data, dtype=np.float64)
        _check_matrix(matrix, "library")
        if matrix.shape[0] < 1 or matrix.shape[1] < 1:
            raise DimensionMismatch(
                "library must have at least one band and one signature"
            )
        check_finite(matrix, "library")
        zero = np.flatnonzero(~np.any(matrix != 0, axis=0))
        if zero.size:
            raise DegenerateLibrary(
                "library column(s) {} are all zero".format(zero.tolist())
            )
        if names is None:
            names = ["em{}".format(p) for p in range(matrix.shape[1])]
        names = tuple(str(name) for name in names)
        if len(names) != matrix.shape[1]:
            raise DimensionMismatch(
                "{} names given for {} signatures".format(
                    len(names), matrix.shape[1]
                )
            )
        return cls(frozen(matrix), names)

    @property
    def bands(self) -> int:
        return int(self.data.shape[0])

    @property
    def count(self) -> int:
        return int(self.data.shape[1])

    def select(self, ids: Sequence[int]) -> "SpectralLibrary":
        """Return the sub-library made of the given columns."""
        ids = [int(i) for i in ids]
        bad = [i for i in ids if i < 0 or i >= self.count]
        if bad:
            raise IndexOutOfRange(
                "endmember ids {} outside 0..{}".format(bad, self.count - 1)
            )
        return SpectralLibrary(
            frozen(self.data[:, ids]), tuple(self.names[i] for i in ids)
        )


class AbundanceMap(NamedTuple):
    """P x N nonnegative abundance matrix (N may be a superpixel count)."""
    data: np.ndarray

    @classmethod
    def create(cls, data: Any) -> "AbundanceMap":
        matrix = np.asarray(data, dtype=np.float64)
        _check_matrix(matrix, "abundances")
        check_finite(matrix, "abundances")
        if np.any(matrix < 0):
            raise NegativeAbundance(
                "abundances have negative entries (min {!r})".format(
                    float(matrix.min())
                )
            )
        return cls(frozen(matrix))

    @classmethod
    def clamped(cls, data: Any) -> "AbundanceMap":
        """
        Like create, but map rounding-level negatives (>= -1e-12) to zero.
        """
        matrix = np.array(data, dtype=np.float64)
        _check_matrix(matrix, "abundances")
        check_finite(matrix, "abundances")
        if np.any(matrix < -CLAMP_TOLERANCE):
            raise NegativeAbundance(
                "abundances below -{} (min {!r})".format(
                    CLAMP_TOLERANCE, float(matrix.min())
                )
            )
        matrix[matrix < 0] = 0.0
        return cls(frozen(matrix))

    @property
    def endmembers(self) -> int:
        return int(self.data.shape[0])

    @property
    def pixels(self) -> int:
        return int(self.data.shape[1])


def canonical_labels(labels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Renumber labels in order of first appearance in a row-major scan.

    Negative labels (unassigned pixels) are kept as -1.

    :return: (new labels, old label of each new label)
    """
    flat = np.asarray(labels).ravel()
    valid = flat >= 0
    values, first = np.unique(flat[valid], return_index=True)
    old_ids = values[np.argsort(first, kind="stable")]
    result = np.full(flat.shape, -1, dtype=np.int64)
    if old_ids.size:
        lookup = np.full(int(values.max()) + 1, -1, dtype=np.int64)
        lookup[old_ids] = np.arange(old_ids.size)
        result[valid] = lookup[flat[valid]]
    return result.reshape(np.shape(labels)), old_ids


def _check_connected(labels: np.ndarray) -> None:
    """Every label must form a single 4-connected region."""
    for index, window in enumerate(ndimage.find_objects(labels + 1)):
        if window is None:
            continue
        _, count = ndimage.label(labels[window] == index)
        if count != 1:
            raise InvalidSegmentation(
                "superpixel {} has {} disconnected parts".format(index, count)
            )


class SegmentationMap(NamedTuple):
    """
    Superpixel labels over a rows x cols grid.

    ``mask`` is only set for partial maps produced by masked oversegmentation;
    pixels outside it are labeled -1.
    """
    labels: np.ndarray
    scale: int = 0
    homogeneous: Optional[np.ndarray] = None
    mask: Optional[np.ndarray] = None

    @classmethod
    def create(
        cls,
        labels: Any,
        scale: int = 0,
        homogeneous: Any = None,
        mask: Any = None,
        check_connectivity: bool = True,
    ) -> "SegmentationMap":
        grid = np.asarray(labels)
        if grid.ndim != 2 or grid.size == 0:
            raise DimensionMismatch(
                "labels must be a nonempty rows x cols array"
            )
        if not np.issubdtype(grid.dtype, np.integer):
            raise InvalidSegmentation("labels must be integers")
        grid = grid.astype(np.int64)
        stored_mask = None
        if mask is None:
            if np.any(grid < 0):
                raise InvalidSegmentation("unlabeled pixels in a full map")
        else:
            stored_mask = np.asarray(mask, dtype=bool)
            if stored_mask.shape != grid.shape:
                raise DimensionMismatch(
                    "mask shape {} differs from labels shape {}".format(
                        stored_mask.shape, grid.shape
                    )
                )
            if np.any(grid[stored_mask] < 0):
                raise InvalidSegmentation("unlabeled pixels inside the mask")
            if np.any(grid[~stored_mask] != -1):
                raise InvalidSegmentation("labeled pixels outside the mask")
            stored_mask = frozen(stored_mask, bool)
        valid = grid[grid >= 0]
        count = int(valid.max()) + 1 if valid.size else 0
        sizes = np.bincount(valid, minlength=count)
        unused = np.flatnonzero(sizes == 0)
        if unused.size:
            raise InvalidSegmentation(
                "labels {} do not occur".format(unused[:10].tolist())
            )
        if check_connectivity:
            _check_connected(grid)
        flags = None
        if homogeneous is not None:
            flags = np.asarray(homogeneous, dtype=bool)
            if flags.shape != (count, ):
                raise DimensionMismatch(
                    "{} homogeneity flags for {} superpixels".format(
                        flags.size, count
                    )
                )
            flags = frozen(flags, bool)
        return cls(frozen(grid, np.int64), int(scale), flags, stored_mask)

    @property
    def rows(self) -> int:
        return int(self.labels.shape[0])

    @property
    def cols(self) -> int:
        return int(self.labels.shape[1])

    @property
    def pixels(self) -> int:
        return int(self.labels.size)

    @property
    def superpixels(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def is_complete(self) -> bool:
        return self.mask is None

    def sizes(self) -> np.ndarray:
        flat = self.labels.ravel()
        return np.bincount(flat[flat >= 0], minlength=self.superpixels)

    def members(self, k: int) -> np.ndarray:
        """Row-major pixel indices of superpixel k."""
        if not 0 <= k < self.superpixels:
            raise InvalidLabel(
                "superpixel {} outside 0..{}".format(k, self.superpixels - 1)
            )
        return np.flatnonzero(self.labels.ravel() == k)

    def groups(self) -> List[np.ndarray]:
        """Row-major pixel indices of every superpixel, in label order."""
        flat = self.labels.ravel()
        order = np.argsort(flat, kind="stable")
        order = order[flat[order] >= 0]
        bounds = np.cumsum(self.sizes())[:-1]
        return np.split(order, bounds)

    def canonical(self) -> "SegmentationMap":
        """Relabel in first-occurrence order; idempotent."""
        labels, old_ids = canonical_labels(self.labels)
        flags = None
        if self.homogeneous is not None:
            flags = frozen(self.homogeneous[old_ids], bool)
        return self._replace(
            labels=frozen(labels, np.int64), homogeneous=flags
        )

    def with_flags(self, flags: Any) -> "SegmentationMap":
        flags = np.asarray(flags, dtype=bool)
        if flags.shape != (self.superpixels, ):
            raise DimensionMismatch(
                "{} homogeneity flags for {} superpixels".format(
                    flags.size, self.superpixels
                )
            )
        return self._replace(homogeneous=frozen(flags, bool))


class ScaleOperator(NamedTuple):
    """
    Superpixel averaging (W) and replication (W*) over a segmentation.

    ``order`` lists pixel indices grouped by superpixel (row-major within a
    group) and ``offsets`` marks where each group starts.
    """
    segmentation: SegmentationMap
    sizes: np.ndarray
    order: np.ndarray
    offsets: np.ndarray

    @property
    def superpixels(self) -> int:
        return int(self.sizes.size)

    @property
    def pixels(self) -> int:
        return self.segmentation.pixels


class HomogeneityParams(NamedTuple):
    tau_outliers: float = 0.1
    tau_homog: float = 0.2

    @classmethod
    def create(
        cls, tau_outliers: float = 0.1, tau_homog: float = 0.2
    ) -> "HomogeneityParams":
        tau_outliers = float(tau_outliers)
        tau_homog = float(tau_homog)
        if not 0.0 <= tau_outliers < 1.0:
            raise InvalidParameter(
                "tau_outliers must lie in [0, 1), got {}".format(tau_outliers)
            )
        if not (math.isfinite(tau_homog) and tau_homog >= 0):
            raise InvalidParameter(
                "tau_homog must be finite and >= 0, got {}".format(tau_homog)
            )
        return cls(tau_outliers, tau_homog)


class SolverParams(NamedTuple):
    """
    Unmixing weights and ADMM settings.

    ``lam`` is the fine-scale L1 weight (lambda), ``lambda_c`` the coarse one.
    ``mu`` of None selects 0.1 * mean(|A^T Y|) for each problem.
    """
    lam: float = 0.1
    lambda_c: float = 0.007
    beta: float = 3.0
    mu: Optional[float] = None
    max_iters: int = 1000
    tol: float = 1e-6

    @classmethod
    def create(
        cls,
        lam: float = 0.1,
        lambda_c: float = 0.007,
        beta: float = 3.0,
        mu: Optional[float] = None,
        max_iters: int = 1000,
        tol: float = 1e-6,
    ) -> "SolverParams":
        for name, value in (("lambda", lam), ("lambda_c", lambda_c),
                            ("beta", beta)):
            if not (math.isfinite(value) and value >= 0):
                raise InvalidParameter(
                    "{} must be finite and >= 0, got {}".format(name, value)
                )
        if mu is not None and not (math.isfinite(mu) and mu > 0):
            raise InvalidParameter("mu must be finite and > 0")
        if int(max_iters) != max_iters or max_iters < 1:
            raise InvalidParameter("max_iters must be an integer >= 1")
        if not (math.isfinite(tol) and tol > 0):
            raise InvalidParameter("tol must be finite and > 0")
        return cls(
            float(lam), float(lambda_c), float(beta),
            None if mu is None else float(mu), int(max_iters), float(tol)
        )


def validate(cube: HyperCube, lib: SpectralLibrary) -> None:
    """Check that a cube and a library can be unmixed together."""
    check_finite(cube.data, "cube data")
    check_finite(lib.data, "library")
    if cube.bands != lib.bands:
        raise DimensionMismatch(
            "cube has {} bands but library has {}".format(
                cube.bands, lib.bands
            )
        )
    if not np.all(np.any(lib.data != 0, axis=0)):
        raise DegenerateLibrary("library has an all-zero column")
