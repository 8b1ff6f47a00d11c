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
Shared file helpers: every OSError leaving this package is a StorageError.
"""

import json
import os
from contextlib import contextmanager
from typing import Any, Iterator

from hmua.core import ParseError, SizeMismatch, StorageError


@contextmanager
def storage_errors(path: str, action: str) -> Iterator[None]:
    try:
        yield
    except OSError as exc:
        raise StorageError(
            "Failed to {} {}: {}".format(action, path, exc.strerror or exc)
        )


def read_json(path: str) -> Any:
    with storage_errors(path, "read"):
        with open(path, "r") as f:
            text = f.read()
    try:
        return json.loads(text)
    except ValueError as exc:
        raise ParseError("{} is not valid JSON: {}".format(path, exc))


def write_json(path: str, document: Any) -> None:
    with storage_errors(path, "write"):
        with open(path, "w") as f:
            json.dump(document, f, indent=2, sort_keys=True)
            f.write("\n")


def sidecar(path: str) -> str:
    """Path of the JSON description stored next to a binary payload."""
    return path + ".json"


def check_size(path: str, expected: int) -> None:
    with storage_errors(path, "read"):
        actual = os.path.getsize(path)
    if actual != expected:
        raise SizeMismatch(
            "{} holds {} bytes, expected {}".format(path, actual, expected)
        )


def positive_int(document: Any, key: str, path: str) -> int:
    value = document.get(key) if isinstance(document, dict) else None
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ParseError(
            "{}: {!r} must be a positive integer, got {!r}".format(
                path, key, value
            )
        )
    return value
