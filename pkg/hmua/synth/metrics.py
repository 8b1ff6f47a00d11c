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
Evaluation metrics in decibels.
"""

import math
from typing import Any

import numpy as np

from hmua.core import (
    AbundanceMap, DimensionMismatch, HyperCube, InvalidParameter, ZeroSignal
)


def _values(value: Any) -> np.ndarray:
    if isinstance(value, AbundanceMap):
        return value.data
    return np.asarray(value, dtype=np.float64)


def sre(X_true: Any, X_est: Any) -> float:
    """
    Signal-to-reconstruction error, 10 log10(|X|^2 / |X - X_est|^2).

    A perfect estimate gives +inf.
    """
    truth, estimate = _values(X_true), _values(X_est)
    if truth.shape != estimate.shape:
        raise DimensionMismatch(
            "true abundances {} vs estimate {}".format(
                truth.shape, estimate.shape
            )
        )
    signal = float(np.sum(truth**2))
    if signal == 0:
        raise ZeroSignal("true abundances are all zero")
    error = float(np.sum((truth - estimate)**2))
    if error == 0:
        return math.inf
    return 10.0 * math.log10(signal / error)


def snr_db(signal: Any, noise: Any) -> float:
    """10 log10(|signal|^2 / |noise|^2); +inf without noise."""
    signal, noise = np.asarray(signal), np.asarray(noise)
    if signal.shape != noise.shape:
        raise DimensionMismatch("signal and noise shapes differ")
    energy = float(np.sum(signal**2))
    if energy == 0:
        raise ZeroSignal("signal has zero energy")
    noise_energy = float(np.sum(noise**2))
    if noise_energy == 0:
        return math.inf
    return 10.0 * math.log10(energy / noise_energy)


def measured_snr(cube: HyperCube) -> float:
    """Re-measure the SNR of a synthetic cube from its stored noise."""
    if cube.noise is None:
        raise InvalidParameter("cube carries no noise realization")
    return snr_db(cube.data - cube.noise, cube.noise)
