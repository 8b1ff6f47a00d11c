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
Domain types and the error hierarchy.
"""

from .errors import (
    EXIT_NONCONVERGENCE, EXIT_STORAGE, EXIT_USAGE, ConfigError,
    DegenerateImage, DegenerateLibrary, DimensionMismatch, EmptyMask,
    EmptyVector, HmuaError, IndexOutOfRange, InvalidLabel, InvalidParameter,
    InvalidSegmentation, IoError, NegativeAbundance, NonConvergence,
    NonDecreasingSigmas, NonFinite, ParseError, RaggedRows, SizeMismatch,
    StorageError, ZeroSignal
)
from .types import (
    AbundanceMap, HomogeneityParams, HyperCube, ScaleOperator,
    SegmentationMap, SolverParams, SpectralLibrary, canonical_labels, validate
)

__all__ = (
    "AbundanceMap", "ConfigError", "DegenerateImage", "DegenerateLibrary",
    "DimensionMismatch", "EXIT_NONCONVERGENCE", "EXIT_STORAGE", "EXIT_USAGE",
    "EmptyMask", "EmptyVector", "HmuaError", "HomogeneityParams", "HyperCube",
    "IndexOutOfRange", "InvalidLabel", "InvalidParameter",
    "InvalidSegmentation", "IoError", "NegativeAbundance", "NonConvergence",
    "NonDecreasingSigmas", "NonFinite", "ParseError", "RaggedRows",
    "ScaleOperator", "SegmentationMap", "SizeMismatch", "SolverParams",
    "SpectralLibrary", "StorageError", "ZeroSignal", "canonical_labels",
    "validate"
)
