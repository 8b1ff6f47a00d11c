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

import json
import os
from typing import Any

from hmua.core.errors import StorageError


class Cache(object):
    """
    Cache JSON-compatible values with string key lookup.

    Sweeps use it to remember finished trials so that an interrupted run can
    resume. Usage:

    >>> cache = Cache.load("sweep-cache.json")
    >>> trials = cache.child("3f2a9c")  # fingerprint of the sweep inputs
    >>> trials["0"] = {"sre": 12.5}
    >>> "0" in trials
    True
    >>> trials["0"]
    {'sre': 12.5}
    >>> cache.save("sweep-cache.json")
    """
    @classmethod
    def load(cls, filename: str) -> "Cache":
        """Return a cache loaded from a file; missing or corrupt is empty"""
        try:
            with open(filename, "r") as f:
                cache = json.load(f)
        except (FileNotFoundError, ValueError):
            cache = {}
        if not isinstance(cache, dict):
            cache = {}
        return Cache(cache)

    def __init__(self, values: Any) -> None:
        self.values = values

    def save(self, filename: str) -> None:
        """Replace the file with current cache contents"""
        temp = filename + ".tmp"
        try:
            with open(temp, "w") as f:
                json.dump(self.values, f)
            os.replace(temp, filename)
        except OSError as exc:
            raise StorageError(
                "Failed to save cache {}: {}".format(filename, exc)
            )

    def __contains__(self, key: str) -> bool:
        return key in self.values

    def __getitem__(self, key: str) -> Any:
        return self.values[key]

    def __setitem__(self, key: str, value: Any) -> None:
        self.values[key] = value

    def __len__(self) -> int:
        return len(self.values)

    def child(self, key: str) -> "Cache":
        """
        Retrieve a child cache that operates over a separate keyspace but is
        loaded and saved with the parent cache.
        """
        if key in self.values:
            child = self.values[key]
        else:
            child = {}
            self.values[key] = child
        return Cache(child)
