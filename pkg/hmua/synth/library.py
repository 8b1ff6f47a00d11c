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
Synthetic spectral libraries and endmember selection.
"""

import math
from typing import List

import numpy as np

from hmua.core import InvalidParameter, SpectralLibrary

from .scene import make_rng

# Reflectance range of generated signatures.
FLOOR, CEILING = 0.01, 1.0


def random_library(bands: int, count: int, seed: int = 0) -> SpectralLibrary:
    """
    Smooth reflectance-like signatures: a sloped baseline plus a few
    Gaussian absorption or reflectance features, clipped to [0.01, 1].
    """
    if bands < 1 or count < 1:
        raise InvalidParameter("library needs bands >= 1 and count >= 1")
    rng = make_rng(seed)
    grid = np.linspace(0.0, 1.0, bands)
    data = np.empty((bands, count))
    for p in range(count):
        signature = rng.uniform(0.2, 0.6) + rng.uniform(-0.3, 0.3) * grid
        for _ in range(int(rng.integers(1, 5))):
            amplitude = rng.uniform(-0.35, 0.35)
            center = rng.uniform(0.0, 1.0)
            width = rng.uniform(0.02, 0.15)
            bump = np.exp(-0.5 * ((grid - center) / width)**2)
            signature += amplitude * bump
        data[:, p] = np.clip(signature, FLOOR, CEILING)
    names = ["syn{:03d}".format(p) for p in range(count)]
    return SpectralLibrary.create(data, names)


def spectral_angle(a: np.ndarray, b: np.ndarray) -> float:
    """Angle between two signatures, in degrees."""
    cosine = float(a @ b) / (float(np.linalg.norm(a) * np.linalg.norm(b)))
    return math.degrees(math.acos(min(1.0, max(-1.0, cosine))))


def select_endmembers(
    lib: SpectralLibrary,
    count: int,
    seed: int = 0,
    min_angle_deg: float = 4.44,
) -> List[int]:
    """
    Draw count distinct columns, skipping candidates closer than
    min_angle_deg to one already drawn. If the library cannot provide enough
    such columns the rest are drawn without the angle constraint.
    """
    if not 1 <= count <= lib.count:
        raise InvalidParameter(
            "cannot draw {} endmembers from {} signatures".format(
                count, lib.count
            )
        )
    order = [int(i) for i in make_rng(seed).permutation(lib.count)]
    chosen = []  # type: List[int]
    for candidate in order:
        if len(chosen) == count:
            break
        if all(
            spectral_angle(lib.data[:, candidate], lib.data[:, other]) >=
            min_angle_deg for other in chosen
        ):
            chosen.append(candidate)
    for candidate in order:
        if len(chosen) == count:
            break
        if candidate not in chosen:
            chosen.append(candidate)
    return chosen
