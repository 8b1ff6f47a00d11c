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
Spectral library CSV: a header row of signature names, then one row of
comma-separated band values per band, '.' as decimal separator.
"""

import numpy as np
import pandas as pd
from pandas.api.types import is_bool_dtype, is_numeric_dtype

from hmua.core import ParseError, RaggedRows, SpectralLibrary

from .files import storage_errors


def _load_frame(csv_path: str) -> pd.DataFrame:
    # Only empty fields are missing; literal "nan" stays text.
    with storage_errors(csv_path, "read"):
        try:
            return pd.read_csv(
                csv_path,
                keep_default_na=False,
                na_values=[""],
                float_precision="round_trip",
            )
        except pd.errors.EmptyDataError:
            raise ParseError("{} is empty".format(csv_path))
        except pd.errors.ParserError as exc:
            raise RaggedRows("{}: {}".format(csv_path, exc))
        except UnicodeDecodeError as exc:
            raise ParseError("{}: {}".format(csv_path, exc))


def read_library(csv_path: str) -> SpectralLibrary:
    frame = _load_frame(csv_path)
    if frame.empty:
        raise ParseError("{} has no band rows".format(csv_path))
    if not isinstance(frame.index, pd.RangeIndex):
        raise RaggedRows(
            "{}: band rows have more fields than there are names".format(
                csv_path
            )
        )
    short = frame.isna().any(axis=1).to_numpy()
    if short.any():
        raise RaggedRows(
            "{} line {}: missing values for some of the {} names".format(
                csv_path, int(np.argmax(short)) + 2, frame.shape[1]
            )
        )
    for name, dtype in frame.dtypes.items():
        if not is_numeric_dtype(dtype) or is_bool_dtype(dtype):
            raise ParseError(
                "{}: column {!r} is not numeric".format(csv_path, name)
            )
    return SpectralLibrary.create(
        frame.to_numpy(dtype=np.float64),
        [str(name).strip() for name in frame.columns]
    )


def write_library(lib: SpectralLibrary, csv_path: str) -> None:
    frame = pd.DataFrame(np.asarray(lib.data), columns=list(lib.names))
    with storage_errors(csv_path, "write"):
        frame.to_csv(csv_path, index=False)
