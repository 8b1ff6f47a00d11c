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
Small constructed cubes shared by the test suites.
"""

import math

import numpy as np

from hmua.core import HyperCube
from hmua.synth import (
    SceneSpec, embed, generate_abundances, mix_and_corrupt, noise_seed,
    random_library, select_endmembers
)


def constant_cube(rows, cols, spectrum=(0.2, 0.4, 0.6)):
    spectrum = np.asarray(spectrum, dtype=float)
    image = np.broadcast_to(spectrum, (rows, cols, spectrum.size))
    return HyperCube.from_image(image)


def two_halves(rows=10, cols=10, left=(0.0, 0.0, 0.0), right=(1.0, 1.0, 1.0)):
    """Left half one spectrum, right half another."""
    image = np.empty((rows, cols, len(left)))
    image[:, :cols // 2] = left
    image[:, cols // 2:] = right
    return HyperCube.from_image(image)


def mixed_scene(size=64, block=8, seed=0):
    """
    Left half a single bright spectrum; right half a mosaic of
    block x block squares, each with its own dim random spectrum.
    """
    rng = np.random.default_rng(seed)
    image = np.empty((size, size, 3))
    image[:, :size // 2] = 50.0
    for r in range(0, size, block):
        for c in range(size // 2, size, block):
            image[r:r + block, c:c + block] = rng.uniform(0.0, 1.0, 3)
    return HyperCube.from_image(image)

def make_scene(lib, pattern, count, size, snr, seed):
    """
    Draw a scene the way `hmua synth` does.

    :return: cube and the true abundances over the whole library
    """
    spec = SceneSpec.create(size, size, count, pattern, seed=seed)
    ids = select_endmembers(lib, count, seed)
    X = generate_abundances(spec)
    cube = mix_and_corrupt(
        X, lib, ids, snr, seed=noise_seed(seed), shape=(size, size)
    )
    return cube, embed(X, ids, lib.count)


def small_scene(snr=math.inf, size=16, seed=1):
    """
    Three of six library signatures mixed over a size x size block scene.

    :return: cube, library and the true abundances over the whole library
    """
    lib = random_library(20, 6, seed=seed)
    ids = [0, 2, 4]
    X = generate_abundances(SceneSpec.create(size, size, 3, seed=seed))
    cube = mix_and_corrupt(
        X, lib, ids, snr, seed=noise_seed(seed), shape=(size, size)
    )
    return cube, lib, embed(X, ids, lib.count)
