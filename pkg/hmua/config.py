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
Configuration documents.

Pipeline parameters use flat keys. A document may name a preset and
override some of its keys:

    {"preset": "dc3-20db", "beta": 3}

Files ending in .yaml or .yml are parsed as YAML, anything else as JSON.
"""

import json
from typing import Any, Dict

import yaml

from hmua.core import ConfigError, StorageError

DEFAULTS = {
    "gamma": 0.01,
    "sigma0": 8,
    "sigmas": [6, 4, 2],
    "iters": 10,
    "min_size_fraction": 0.25,
    "tau_outliers": 0.1,
    "tau_homog": 0.2,
    "lambda_c": 0.007,
    "lambda": 0.1,
    "beta": 3.0,
    "mu": None,
    "max_iters": 1000,
    "tol": 1e-6,
    "mode": "hmua",
}  # type: Dict[str, Any]


def _preset(
    gamma: float, sigmas: list, tau_homog: float, lambda_c: float,
    lam: float, beta: float
) -> Dict[str, Any]:
    return {
        "gamma": gamma,
        "sigma0": sigmas[0],
        "sigmas": sigmas[1:],
        "tau_outliers": 0.1,
        "tau_homog": tau_homog,
        "lambda_c": lambda_c,
        "lambda": lam,
        "beta": beta,
    }


# Best published settings per synthetic scene and noise level.
PRESETS = {
    "dc1-30db": _preset(0.00425, [8, 7, 3, 2], 0.5, 0.003, 0.03, 3),
    "dc1-20db": _preset(0.00425, [12, 6, 3, 2], 0.2, 0.007, 0.1, 10),
    "dc2-30db": _preset(0.00025, [6, 5, 4, 2], 0.2, 0.003, 0.03, 3),
    "dc2-20db": _preset(0.00025, [7, 6, 4, 2], 0.2, 0.007, 0.1, 3),
    "dc3-30db": _preset(0.00225, [7, 6, 4, 2], 0.3, 0.005, 0.05, 1),
    "dc3-20db": _preset(0.00225, [8, 7, 4, 3], 0.2, 0.01, 0.1, 1),
}  # type: Dict[str, Dict[str, Any]]


def load_document(path: str) -> Any:
    """Parse a JSON or YAML file."""
    try:
        with open(path, "r") as f:
            text = f.read()
    except OSError as exc:
        raise StorageError(
            "Failed to read {}: {}".format(path, exc.strerror or exc)
        )
    try:
        if path.endswith((".yaml", ".yml")):
            return yaml.safe_load(text)
        return json.loads(text)
    except (ValueError, yaml.YAMLError) as exc:
        raise ConfigError("{} is malformed: {}".format(path, exc))


def resolve(document: Any) -> Dict[str, Any]:
    """
    Fill a flat pipeline document with preset values and defaults.

    :raise ConfigError: not a mapping, unknown preset or unknown keys
    """
    if document is None:
        document = {}
    if not isinstance(document, dict):
        raise ConfigError("configuration must be a mapping of keys")
    document = dict(document)
    settings = dict(DEFAULTS)
    preset = document.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(
                "unknown preset {!r}; choose from {}".format(
                    preset, ", ".join(sorted(PRESETS))
                )
            )
        settings.update(PRESETS[preset])
    unknown = sorted(set(document) - set(DEFAULTS))
    if unknown:
        raise ConfigError(
            "unknown configuration keys: {}".format(", ".join(unknown))
        )
    settings.update(document)
    return settings
