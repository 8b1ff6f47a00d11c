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
HMUA: homogeneity-driven multiscale sparse unmixing of hyperspectral images.
"""

import os

__version__ = "0.3.0"


def _default_threads() -> int:
    try:
        return max(1, int(os.environ.get("HMUA_THREADS", "1")))
    except ValueError:
        return 1


# Default size of worker pools (sweeps, grid searches); --threads overrides.
DEFAULT_THREADS = _default_threads()
