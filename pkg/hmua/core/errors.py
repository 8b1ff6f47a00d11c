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
Exception hierarchy. Every error knows the process exit code the command
line front end should use when it escapes a command.
"""

EXIT_USAGE = 2
EXIT_STORAGE = 3
EXIT_NONCONVERGENCE = 4


class HmuaError(Exception):
    """Base class for all expected failures."""
    exit_code = EXIT_USAGE


# Domain and argument errors


class DimensionMismatch(HmuaError, ValueError):
    pass


class NonFinite(HmuaError, ValueError):
    pass


class NegativeAbundance(HmuaError, ValueError):
    pass


class DegenerateLibrary(HmuaError, ValueError):
    """A library column is identically zero."""


class InvalidLabel(HmuaError, ValueError):
    pass


class InvalidSegmentation(HmuaError, ValueError):
    pass


class InvalidParameter(HmuaError, ValueError):
    pass


class ConfigError(HmuaError):
    """Malformed or inconsistent configuration file."""


class EmptyMask(HmuaError, ValueError):
    pass


class DegenerateImage(HmuaError, ValueError):
    """The image is too small for a single superpixel seed."""


class EmptyVector(HmuaError, ValueError):
    pass


class NonDecreasingSigmas(HmuaError, ValueError):
    pass


class IndexOutOfRange(HmuaError, IndexError):
    pass


class ZeroSignal(HmuaError, ValueError):
    pass


class NonConvergence(HmuaError):
    exit_code = EXIT_NONCONVERGENCE


# Storage errors


class StorageError(HmuaError):
    """Reading or writing a file failed."""
    exit_code = EXIT_STORAGE


IoError = StorageError


class SizeMismatch(StorageError):
    pass


class ParseError(StorageError):
    pass


class RaggedRows(StorageError):
    pass
