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
File formats and renderings.
"""

from .cube import CubeHeader, read_cube, read_header, write_cube
from .files import read_json, sidecar, write_json
from .library import read_library, write_library
from .maps import (
    read_abundance, read_segmentation, write_abundance, write_segmentation
)
from .render import (
    boundary_mask, compose_segmentation, false_color, render_abundances,
    render_delta_histogram, render_segmentation
)

__all__ = (
    "CubeHeader", "boundary_mask", "compose_segmentation", "false_color",
    "read_abundance", "read_cube", "read_header", "read_json",
    "read_library", "read_segmentation", "render_abundances",
    "render_delta_histogram", "render_segmentation", "sidecar",
    "write_abundance", "write_cube", "write_json", "write_library",
    "write_segmentation"
)
