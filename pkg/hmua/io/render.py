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
PNG renderings: segmentation overlays, abundance maps and the histogram of
homogeneity deviations.
"""

from typing import Optional, Sequence

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from hmua.core import (  # noqa: E402
    AbundanceMap, DimensionMismatch, HyperCube, SegmentationMap
)

from .files import storage_errors  # noqa: E402

# Fractions of the band range shown as red, green and blue.
FALSE_COLOR = (0.9, 0.5, 0.1)
BOUNDARY = (1.0, 0.0, 0.0)
SHADE = 0.5


def false_color(cube: HyperCube) -> np.ndarray:
    """rows x cols x 3 composite, each channel min-max stretched to [0, 1]."""
    image = cube.image()
    channels = []
    for fraction in FALSE_COLOR:
        band = image[:, :, int(round(fraction * (cube.bands - 1)))]
        low, high = float(band.min()), float(band.max())
        if high > low:
            channels.append((band - low) / (high - low))
        else:
            channels.append(np.zeros_like(band))
    return np.stack(channels, axis=2)


def boundary_mask(labels: np.ndarray) -> np.ndarray:
    """Pixels whose right or lower neighbor has another label."""
    edges = np.zeros(labels.shape, dtype=bool)
    edges[:, :-1] |= labels[:, :-1] != labels[:, 1:]
    edges[:-1, :] |= labels[:-1, :] != labels[1:, :]
    return edges


def compose_segmentation(seg: SegmentationMap, cube: HyperCube) -> np.ndarray:
    if (seg.rows, seg.cols) != (cube.rows, cube.cols):
        raise DimensionMismatch(
            "segmentation is {}x{} but cube is {}x{}".format(
                seg.rows, seg.cols, cube.rows, cube.cols
            )
        )
    rgb = false_color(cube)
    if seg.homogeneous is not None:
        flagged = np.zeros(seg.labels.shape, dtype=bool)
        inside = seg.labels >= 0
        flagged[inside] = ~seg.homogeneous[seg.labels[inside]]
        rgb[flagged] = SHADE * rgb[flagged] + (1 - SHADE) * 0.5
    rgb[boundary_mask(seg.labels)] = BOUNDARY
    return rgb


def render_segmentation(
    seg: SegmentationMap, cube: HyperCube, path: str
) -> None:
    """
    False-color image with superpixel boundaries in red and non-homogeneous
    superpixels shaded gray.
    """
    rgb = compose_segmentation(seg, cube)
    with storage_errors(path, "write"):
        plt.imsave(path, rgb, format="png")


def render_abundances(
    abundances: AbundanceMap,
    rows: int,
    cols: int,
    path: str,
    names: Optional[Sequence[str]] = None,
    limit: int = 9,
) -> None:
    """Grid of the `limit` endmembers with the largest total abundance."""
    if abundances.pixels != rows * cols:
        raise DimensionMismatch(
            "{} abundance columns for a {}x{} image".format(
                abundances.pixels, rows, cols
            )
        )
    names = list(names) if names is not None else [
        "em{}".format(p) for p in range(abundances.endmembers)
    ]
    totals = abundances.data.sum(axis=1)
    shown = np.argsort(-totals, kind="stable")[:max(1, limit)]
    across = int(np.ceil(np.sqrt(len(shown))))
    down = int(np.ceil(len(shown) / across))
    fig, axes = plt.subplots(
        down, across, figsize=(2.5 * across, 2.5 * down), squeeze=False
    )
    try:
        for ax in axes.ravel():
            ax.axis("off")
        for ax, p in zip(axes.ravel(), shown):
            ax.imshow(
                abundances.data[p].reshape(rows, cols),
                vmin=0.0,
                vmax=1.0,
                cmap="viridis"
            )
            ax.set_title(names[p], fontsize=8)
        fig.tight_layout()
        with storage_errors(path, "write"):
            fig.savefig(path, format="png", dpi=100)
    finally:
        plt.close(fig)


def render_delta_histogram(
    initial: Sequence[float],
    final: Sequence[float],
    tau_homog: float,
    path: str,
) -> None:
    """Deviation histograms before and after refinement, threshold marked."""
    fig, axes = plt.subplots(1, 2, figsize=(8, 3), sharey=True)
    try:
        for ax, deltas, title in ((axes[0], initial, "initial"),
                                  (axes[1], final, "final")):
            ax.hist(np.asarray(deltas, dtype=np.float64), bins=30)
            ax.axvline(tau_homog, color="red", linestyle="--")
            ax.set_title(
                "{} ({} superpixels)".format(title, len(deltas)), fontsize=9
            )
            ax.set_xlabel("deviation")
        axes[0].set_ylabel("superpixels")
        fig.tight_layout()
        with storage_errors(path, "write"):
            fig.savefig(path, format="png", dpi=100)
    finally:
        plt.close(fig)
