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
Scale operators, ADMM solvers and the MUA/HMUA pipelines.
"""

from .pipeline import (
    Diagnostics, GridRow, HmuaResult, HmuaSegmentation, PipelineConfig,
    evaluate, expand_grid, grid_search, hmua_segment, hmua_unmix, mua_unmix,
    point_document, published_grid, unmix
)
from .scalespace import build_operator, coarsen, uncoarsen
from .solver import (
    SolveResult, default_mu, objective, solve_coarse, solve_regularized
)

__all__ = (
    "Diagnostics", "GridRow", "HmuaResult", "HmuaSegmentation",
    "PipelineConfig", "SolveResult", "build_operator", "coarsen",
    "default_mu", "evaluate", "expand_grid", "grid_search", "hmua_segment",
    "hmua_unmix", "mua_unmix", "objective", "point_document",
    "published_grid", "solve_coarse", "solve_regularized", "uncoarsen",
    "unmix"
)
