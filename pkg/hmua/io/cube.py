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
Cube files: a JSON header plus raw band-sequential little-endian samples.

    {"rows": 100, "cols": 100, "bands": 224, "dtype": "float64",
     "layout": "bsq"}

Band b, pixel n (row-major) is sample b * rows * cols + n.
"""

from typing import NamedTuple

import numpy as np

from hmua.core import HyperCube, ParseError

from .files import (
    check_size, positive_int, read_json, storage_errors, write_json
)

DTYPES = {"float32": "<f4", "float64": "<f8"}


class CubeHeader(NamedTuple):
    rows: int
    cols: int
    bands: int
    dtype: str = "float64"
    layout: str = "bsq"

    @property
    def size(self) -> int:
        """Payload size in bytes."""
        return self.rows * self.cols * self.bands * np.dtype(
            DTYPES[self.dtype]
        ).itemsize

    def as_dict(self) -> dict:
        return dict(self._asdict())


def read_header(header_path: str) -> CubeHeader:
    document = read_json(header_path)
    if not isinstance(document, dict):
        raise ParseError(
            "{}: header must be a JSON object".format(header_path)
        )
    dtype = document.get("dtype", "float64")
    if dtype not in DTYPES:
        raise ParseError(
            "{}: dtype must be float32 or float64, got {!r}".format(
                header_path, dtype
            )
        )
    layout = document.get("layout", "bsq")
    if layout != "bsq":
        raise ParseError(
            "{}: only band-sequential (bsq) layout is supported, got "
            "{!r}".format(header_path, layout)
        )
    return CubeHeader(
        positive_int(document, "rows", header_path),
        positive_int(document, "cols", header_path),
        positive_int(document, "bands", header_path),
        dtype,
        layout,
    )


def read_cube(header_path: str, data_path: str) -> HyperCube:
    """Load a cube; float32 samples are widened to float64."""
    header = read_header(header_path)
    check_size(data_path, header.size)
    with storage_errors(data_path, "read"):
        samples = np.fromfile(data_path, dtype=DTYPES[header.dtype])
    data = samples.astype(np.float64).reshape(
        header.bands, header.rows * header.cols
    )
    return HyperCube.create(header.rows, header.cols, data)


def write_cube(
    cube: HyperCube,
    header_path: str,
    data_path: str,
    dtype: str = "float64",
) -> CubeHeader:
    if dtype not in DTYPES:
        raise ParseError("unsupported cube dtype {!r}".format(dtype))
    header = CubeHeader(cube.rows, cube.cols, cube.bands, dtype)
    with storage_errors(data_path, "write"):
        cube.data.astype(DTYPES[dtype]).tofile(data_path)
    write_json(header_path, header.as_dict())
    return header
