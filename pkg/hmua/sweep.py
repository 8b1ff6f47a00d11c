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
Parameter sweeps: sensitivity curves, joint grids, full grid searches and
random statistical trials, each scored by SRE against known abundances.

A sweep document looks like

    mode: sensitivity        # or joint, grid, statistical
    base: {preset: dc1-20db} # configuration every trial starts from
    parameters:              # sensitivity, joint and grid
      lambda: [0.01, 0.03, 0.1]
    trials: 500              # statistical
    seed: 0                  # statistical
    rounds: 3                # statistical: refinement rounds per trial
    ranges: {beta: [1, 50]}  # statistical: overrides of RANGES
"""

import csv
import hashlib
import json
import math
from typing import Any, Dict, List, NamedTuple, Optional, Sequence

import numpy as np
from joblib import Parallel, delayed

from hmua import config
from hmua.core import (
    AbundanceMap, ConfigError, HyperCube, SpectralLibrary
)
from hmua.io.files import storage_errors
from hmua.runner import Cache, Runner
from hmua.synth import make_rng
from hmua.unmixing.pipeline import (
    GridRow, evaluate, expand_grid, point_document
)

SWEEP_MODES = ("sensitivity", "joint", "grid", "statistical")

# Uniform sampling intervals of the statistical mode.
RANGES = {
    "gamma": (0.001, 0.02),
    "sigma0": (5, 20),
    "tau_outliers": (0.1, 0.2),
    "tau_homog": (0.1, 0.5),
    "lambda_c": (0.001, 0.009),
    "lambda": (0.01, 0.9),
    "beta": (1.0, 50.0),
}

SRE_COLUMN = "SRE (dB)"


class SweepSpec(NamedTuple):
    mode: str
    base: Dict[str, Any]
    parameters: Dict[str, List[Any]]
    trials: int = 0
    seed: int = 0
    rounds: int = 3
    ranges: Dict[str, Any] = {}

    @property
    def ranked(self) -> bool:
        """Whether result tables carry each row's gap to the best SRE."""
        return self.mode in ("statistical", "grid")

    @classmethod
    def from_dict(cls, document: Any) -> "SweepSpec":
        if not isinstance(document, dict):
            raise ConfigError("sweep document must be a mapping")
        known = {
            "mode", "base", "parameters", "trials", "seed", "rounds", "ranges"
        }
        unknown = sorted(set(document) - known)
        if unknown:
            raise ConfigError(
                "unknown sweep keys: {}".format(", ".join(unknown))
            )
        mode = document.get("mode")
        if mode not in SWEEP_MODES:
            raise ConfigError(
                "sweep mode must be one of {}, got {!r}".format(
                    ", ".join(SWEEP_MODES), mode
                )
            )
        base = document.get("base") or {}
        config.resolve(base)
        parameters = document.get("parameters") or {}
        if not isinstance(parameters, dict) or not all(
            isinstance(values, list) and values
            for values in parameters.values()
        ):
            raise ConfigError("parameters must map keys to non-empty lists")
        for key in parameters:
            if key != "scales" and key not in config.DEFAULTS:
                raise ConfigError("cannot sweep unknown key {!r}".format(key))
        if mode != "statistical" and not parameters:
            raise ConfigError("{} sweep needs parameters".format(mode))
        if mode == "joint" and len(parameters) != 2:
            raise ConfigError("joint sweep needs exactly two parameters")

        ranges = dict(RANGES)
        extra = document.get("ranges") or {}
        if not isinstance(extra, dict) or set(extra) - set(RANGES):
            raise ConfigError(
                "ranges may only set: {}".format(", ".join(sorted(RANGES)))
            )
        for key, bounds in extra.items():
            if not (isinstance(bounds, list) and len(bounds) == 2
                    and bounds[0] <= bounds[1]):
                raise ConfigError(
                    "range for {} must be [low, high]".format(key)
                )
            ranges[key] = tuple(bounds)

        try:
            trials = int(document.get("trials", 0))
            seed = int(document.get("seed", 0))
            rounds = int(document.get("rounds", 3))
        except (TypeError, ValueError) as exc:
            raise ConfigError("invalid sweep settings: {}".format(exc))
        if mode == "statistical":
            if trials < 1:
                raise ConfigError("statistical sweep needs trials >= 1")
            if rounds < 1:
                raise ConfigError("rounds must be >= 1")
            if ranges["sigma0"][0] < rounds + 2:
                raise ConfigError(
                    "sigma0 must be at least {} for {} rounds".format(
                        rounds + 2, rounds
                    )
                )
        if seed < 0:
            raise ConfigError("seed must be >= 0")
        return cls(mode, base, parameters, trials, seed, rounds, ranges)

    def as_dict(self) -> Dict[str, Any]:
        document = dict(self._asdict())
        document["ranges"] = {
            key: list(bounds)
            for key, bounds in self.ranges.items()
        }
        return document


class SweepRow(NamedTuple):
    trial: int
    params: Dict[str, Any]
    sre: float
    runtime_s: float
    superpixels: int
    error: Optional[str] = None


def random_point(
    rng: np.random.Generator, ranges: Dict[str, Any], rounds: int = 3
) -> Dict[str, Any]:
    """
    Draw one statistical trial. Each sigma_i is an integer in
    [ceil(sigma_{i-1} / 2), sigma_{i-1} - 1], floored so that the last one
    is at least 2 and each earlier one leaves room for the rest.
    """
    low, high = ranges["sigma0"]
    point = {"gamma": float(rng.uniform(*ranges["gamma"]))}
    sigma0 = int(rng.integers(int(low), int(high) + 1))
    sigmas = []  # type: List[int]
    previous = sigma0
    for index in range(1, rounds + 1):
        floor = rounds - index + 2
        lower = max(int(math.ceil(previous / 2.0)), floor)
        previous = int(rng.integers(lower, previous))
        sigmas.append(previous)
    point["sigma0"] = sigma0
    point["sigmas"] = sigmas
    for key in ("tau_outliers", "tau_homog", "lambda_c", "lambda", "beta"):
        point[key] = float(rng.uniform(*ranges[key]))
    return point


def trial_points(spec: SweepSpec) -> List[Dict[str, Any]]:
    """Parameter overrides of every trial, in trial order."""
    if spec.mode == "sensitivity":
        return [{key: value}
                for key in sorted(spec.parameters)
                for value in spec.parameters[key]]
    if spec.mode in ("joint", "grid"):
        return list(expand_grid(spec.parameters))
    rng = make_rng(spec.seed)
    return [
        random_point(rng, spec.ranges, spec.rounds)
        for _ in range(spec.trials)
    ]


def fingerprint(
    cube: HyperCube, lib: SpectralLibrary, X_true: AbundanceMap,
    spec: SweepSpec
) -> str:
    """Digest of everything a trial result depends on."""
    digest = hashlib.sha256()
    for array in (cube.data, lib.data, X_true.data):
        digest.update(str(array.shape).encode("ascii"))
        digest.update(np.ascontiguousarray(array).tobytes())
    digest.update(json.dumps(spec.as_dict(), sort_keys=True).encode("utf-8"))
    return digest.hexdigest()[:16]


def _row(trial: int, result: GridRow) -> SweepRow:
    return SweepRow(
        trial, result.params, result.sre, result.runtime_s,
        result.superpixels, result.error
    )


def run_sweep(
    cube: HyperCube,
    lib: SpectralLibrary,
    X_true: AbundanceMap,
    spec: SweepSpec,
    n_jobs: int = 1,
    runner: Optional[Runner] = None,
    cache: Optional[Cache] = None,
    on_batch: Any = None,
) -> List[SweepRow]:
    """
    Run every trial of the sweep.

    Trials found in cache are not recomputed; new results are stored there
    batch by batch and on_batch() is called after each batch. Rows come back
    in trial order, except for grid sweeps which are ranked by SRE
    descending with ties in trial order.
    """
    runner = runner or Runner.null()
    points = trial_points(spec)
    pending = [
        trial for trial in range(len(points))
        if cache is None or str(trial) not in cache
    ]
    runner.show(
        "Sweep ({}): {} trials, {} to run, {} workers".format(
            spec.mode, len(points), len(pending), n_jobs
        )
    )
    results = {}  # type: Dict[int, SweepRow]
    batch = max(1, n_jobs) * 4
    with runner.span("sweep", False):
        for start in range(0, len(pending), batch):
            trials = pending[start:start + batch]
            rows = Parallel(n_jobs=n_jobs)(
                delayed(evaluate)(
                    cube, lib, X_true,
                    point_document(spec.base, points[trial]), points[trial]
                ) for trial in trials
            )
            for trial, row in zip(trials, rows):
                results[trial] = _row(trial, row)
                if row.error is not None:
                    runner.write(
                        "Trial {} failed: {}".format(trial, row.error)
                    )
                if cache is not None:
                    cache[str(trial)] = {
                        "sre": row.sre,
                        "runtime_s": row.runtime_s,
                        "superpixels": row.superpixels,
                        "error": row.error,
                    }
            if on_batch is not None:
                on_batch()
            runner.progress(
                "Sweep: {} of {} trials done".format(
                    len(points) - len(pending) + start + len(trials),
                    len(points)
                )
            )

    ordered = []
    for trial, point in enumerate(points):
        if trial in results:
            ordered.append(results[trial])
        else:
            assert cache is not None
            stored = cache[str(trial)]
            ordered.append(
                SweepRow(
                    trial, point, float(stored["sre"]),
                    float(stored["runtime_s"]), int(stored["superpixels"]),
                    stored.get("error")
                )
            )
    if spec.mode == "grid":
        ordered.sort(key=lambda row: (-row.sre, row.trial))
    return ordered


def deviations(rows: Sequence[SweepRow]) -> List[Optional[float]]:
    """(SRE - best) / best in percent; None when best is 0 or not finite."""
    finite = [row.sre for row in rows if math.isfinite(row.sre)]
    if not finite:
        return [None] * len(rows)
    best = max(finite)
    if best == 0:
        return [None] * len(rows)
    return [
        (row.sre - best) / best * 100.0 if math.isfinite(row.sre) else None
        for row in rows
    ]


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, (list, tuple)):
        return json.dumps(list(value))
    if isinstance(value, float):
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return str(value)


def write_rows(
    rows: Sequence[SweepRow], path: str, deviation: bool = False
) -> None:
    """CSV with a header row: trial, parameters, SRE, runtime and errors."""
    keys = sorted({key for row in rows for key in row.params})
    header = ["trial"] + keys + [SRE_COLUMN, "runtime_s", "superpixels"]
    if deviation:
        header.append("deviation (%)")
    header.append("error")
    extra = deviations(rows) if deviation else [None] * len(rows)
    with storage_errors(path, "write"):
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(header)
            for row, gap in zip(rows, extra):
                line = [str(row.trial)]
                line += [_cell(row.params.get(key)) for key in keys]
                line += [
                    "{:.3f}".format(row.sre)
                    if math.isfinite(row.sre) else _cell(row.sre),
                    "{:.3f}".format(row.runtime_s),
                    str(row.superpixels),
                ]
                if deviation:
                    line.append("" if gap is None else "{:.3f}".format(gap))
                line.append(row.error or "")
                writer.writerow(line)
