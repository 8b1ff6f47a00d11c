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
Superpixel oversegmentation and homogeneity-driven refinement.
"""

from .homogeneity import (
    HomogeneityReport, assess, distance_vector, homogeneity_deviation, refine,
    refine_rounds, superpixel_median
)
from .slic import SlicParams, enforce_connectivity, slic_segment

__all__ = (
    "HomogeneityReport", "SlicParams", "assess", "distance_vector",
    "enforce_connectivity", "homogeneity_deviation", "refine",
    "refine_rounds", "slic_segment", "superpixel_median"
)
