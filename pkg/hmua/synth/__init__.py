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
Synthetic scenes, libraries and evaluation metrics.
"""

from .library import random_library, select_endmembers, spectral_angle
from .metrics import measured_snr, snr_db, sre
from .scene import (
    PATTERNS, SceneSpec, embed, generate_abundances, make_rng,
    mix_and_corrupt, noise_seed, noiseless, project_simplex
)

__all__ = (
    "PATTERNS", "SceneSpec", "embed", "generate_abundances", "make_rng",
    "measured_snr", "mix_and_corrupt", "noise_seed", "noiseless",
    "project_simplex", "random_library", "select_endmembers", "snr_db",
    "spectral_angle", "sre"
)
