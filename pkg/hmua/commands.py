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
The five commands. Each takes the session runner and the parsed arguments,
reads its inputs, calls into the library and writes its outputs.
"""

import argparse
import csv
import functools
import math
import os
import re
from typing import Any, Dict, Optional

from hmua import config, io
from hmua.core import (
    ConfigError, HyperCube, NonConvergence, SpectralLibrary, StorageError
)
from hmua.runner import Cache, Runner
from hmua.segmentation import slic_segment
from hmua.synth import (
    SceneSpec, embed, generate_abundances, measured_snr, mix_and_corrupt,
    noise_seed, random_library, select_endmembers, sre
)
from hmua.sweep import (
    SRE_COLUMN, SweepSpec, fingerprint, run_sweep, write_rows
)
from hmua.unmixing import PipelineConfig, hmua_segment, unmix
from hmua.utilities import format_db

SYNTHETIC_LIBRARY = re.compile(r"^synthetic:(\d+)x(\d+)$")


def load_library(value: str) -> SpectralLibrary:
    """Read a library CSV, or generate one for synthetic:LxP."""
    match = SYNTHETIC_LIBRARY.match(value)
    if match:
        bands, count = int(match.group(1)), int(match.group(2))
        return random_library(bands, count, seed=0)
    if value.startswith("synthetic:"):
        raise ConfigError(
            "synthetic library must look like synthetic:224x240, "
            "got {!r}".format(value)
        )
    return io.read_library(value)


def cube_paths(args: argparse.Namespace) -> Any:
    if args.data is not None:
        return args.cube, args.data
    stem, suffix = os.path.splitext(args.cube)
    data = stem + ".bsq" if suffix == ".json" else args.cube + ".bsq"
    return args.cube, data


def load_cube(runner: Runner, args: argparse.Namespace) -> HyperCube:
    header, data = cube_paths(args)
    cube = io.read_cube(header, data)
    runner.write(
        "Cube {}: {}x{} pixels, {} bands".format(
            header, cube.rows, cube.cols, cube.bands
        )
    )
    return cube


def load_config(args: argparse.Namespace) -> PipelineConfig:
    document = {}  # type: Dict[str, Any]
    if args.config is not None:
        loaded = config.load_document(args.config)
        if loaded is not None and not isinstance(loaded, dict):
            raise ConfigError("{} must hold a mapping".format(args.config))
        document.update(loaded or {})
    if args.preset is not None:
        document.setdefault("preset", args.preset)
    if args.mode is not None:
        document["mode"] = args.mode
    return PipelineConfig.from_dict(document)


def make_out_dir(path: str) -> str:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise StorageError(
            "Failed to create {}: {}".format(path, exc.strerror or exc)
        )
    return path


def cmd_synth(runner: Runner, args: argparse.Namespace) -> None:
    """Scene spec + library + SNR -> cube, truth and manifest."""
    document = config.load_document(args.spec)
    if not isinstance(document, dict):
        raise ConfigError("{} must hold a mapping".format(args.spec))
    seed = 0 if args.seed is None else args.seed
    document = dict(document)
    document.setdefault("seed", seed)
    spec = SceneSpec.from_dict(document)
    lib = load_library(args.lib)
    out = make_out_dir(args.out)

    with runner.span("synth", False):
        ids = select_endmembers(
            lib, spec.endmember_count, seed, args.min_angle
        )
        X = generate_abundances(spec)
        cube = mix_and_corrupt(
            X, lib, ids, args.snr, noise_seed(seed), (spec.rows, spec.cols)
        )
    realized = measured_snr(cube)
    runner.show(
        "Synthesized {}x{} {} scene, {} endmembers, SNR {} dB".format(
            spec.rows, spec.cols, spec.pattern, len(ids), format_db(realized)
        )
    )

    io.write_cube(
        cube, os.path.join(out, "cube.json"), os.path.join(out, "cube.bsq"),
        args.dtype
    )
    io.write_abundance(
        embed(X, ids, lib.count), os.path.join(out, "truth.abund"), lib.names
    )
    io.write_json(
        os.path.join(out, "manifest.json"), {
            "spec": spec.as_dict(),
            "library": args.lib,
            "endmember_ids": ids,
            "endmember_names": [lib.names[i] for i in ids],
            "snr_db": None if math.isinf(args.snr) else args.snr,
            "measured_snr_db": None if math.isinf(realized) else realized,
            "seed": seed,
            "dtype": args.dtype,
        }
    )


def _check_converged(
    runner: Runner, args: argparse.Namespace, converged: bool
) -> None:
    if converged:
        return
    message = "A solver stopped at max_iters before reaching tol"
    if args.strict:
        raise NonConvergence(message)
    runner.show("WARNING: {}".format(message))


def cmd_unmix(runner: Runner, args: argparse.Namespace) -> None:
    """Cube + library + config -> abundances, segmentation, diagnostics."""
    cfg = load_config(args)
    cube = load_cube(runner, args)
    lib = load_library(args.lib)
    out = make_out_dir(args.out)
    runner.write("Configuration: {}".format(cfg.as_dict()))

    with runner.span("unmix", False):
        result = unmix(cube, lib, cfg, runner)
    diagnostics = result.diagnostics
    runner.show(
        "{}: {} superpixels, {} coarse and {} fine iterations, {:.1f}s".format(
            cfg.mode.upper(), diagnostics.K_final,
            diagnostics.coarse.iterations, diagnostics.fine.iterations,
            diagnostics.runtime_s
        )
    )

    io.write_abundance(
        result.abundances, os.path.join(out, "abundances.abund"), lib.names
    )
    io.write_segmentation(
        result.segmentation, os.path.join(out, "segmentation.labels")
    )
    io.write_json(
        os.path.join(out, "diagnostics.json"), diagnostics.as_dict()
    )
    io.render_segmentation(
        result.segmentation, cube, os.path.join(out, "segmentation.png")
    )
    io.render_abundances(
        result.abundances, cube.rows, cube.cols,
        os.path.join(out, "abundances.png"), lib.names
    )
    if result.eta_trace is not None:
        io.write_json(
            os.path.join(out, "eta_trace.json"), {
                "eta": result.eta_trace,
                "superpixels": diagnostics.superpixels,
            }
        )
        assert diagnostics.deltas_initial is not None
        assert diagnostics.deltas_final is not None
        io.render_delta_histogram(
            diagnostics.deltas_initial, diagnostics.deltas_final,
            cfg.hp.tau_homog, os.path.join(out, "deltas.png")
        )
    _check_converged(runner, args, diagnostics.converged)


def cmd_segment(runner: Runner, args: argparse.Namespace) -> None:
    """Cube + config -> segmentation map and rendering."""
    cfg = load_config(args)
    cube = load_cube(runner, args)
    out = make_out_dir(args.out)
    if cfg.mode == "hmua":
        segmentation = hmua_segment(cube, cfg, runner)
        seg = segmentation.final
        trace = {
            "eta": segmentation.eta_trace,
            "superpixels": segmentation.superpixels,
        }  # type: Dict[str, Any]
    else:
        with runner.span("slic", False):
            seg = slic_segment(cube, cfg.slic)
        trace = {"eta": [], "superpixels": [seg.superpixels]}
    runner.show(
        "Segmentation: {} superpixels at scale {}".format(
            seg.superpixels, seg.scale
        )
    )
    io.write_segmentation(seg, os.path.join(out, "segmentation.labels"))
    io.render_segmentation(seg, cube, os.path.join(out, "segmentation.png"))
    io.write_json(os.path.join(out, "eta_trace.json"), trace)


def append_sre(path: str, label: str, value: float) -> None:
    """Append a row, writing the header first if the file is new or empty."""
    try:
        fresh = not os.path.exists(path) or os.path.getsize(path) == 0
        with open(path, "a", newline="") as f:
            writer = csv.writer(f)
            if fresh:
                writer.writerow(["label", SRE_COLUMN])
            writer.writerow([label, format_db(value)])
    except OSError as exc:
        raise StorageError(
            "Failed to append to {}: {}".format(path, exc.strerror or exc)
        )


def cmd_eval(runner: Runner, args: argparse.Namespace) -> None:
    """Print the SRE of an estimate in dB with three decimals."""
    truth = io.read_abundance(args.truth)
    estimate = io.read_abundance(args.estimate)
    value = sre(truth, estimate)
    runner.write("SRE of {}: {}".format(args.estimate, value))
    print(format_db(value))
    if args.csv is not None:
        append_sre(args.csv, args.label, value)


def cmd_sweep(runner: Runner, args: argparse.Namespace) -> None:
    """Run a sweep document and write the result table."""
    document = config.load_document(args.spec)
    if args.seed is not None:
        if not isinstance(document, dict):
            raise ConfigError("{} must hold a mapping".format(args.spec))
        document = dict(document, seed=args.seed)
    spec = SweepSpec.from_dict(document)
    cube = load_cube(runner, args)
    lib = load_library(args.lib)
    truth = io.read_abundance(args.truth)

    cache = None  # type: Optional[Cache]
    on_batch = None  # type: Any
    if args.cache is not None:
        root = Cache.load(args.cache)
        cache = root.child(fingerprint(cube, lib, truth, spec))
        runner.write(
            "Sweep cache {}: {} finished trials".format(args.cache, len(cache))
        )

        on_batch = functools.partial(root.save, args.cache)
        runner.add_cleanup("Save sweep cache", root.save, args.cache)

    rows = run_sweep(
        cube, lib, truth, spec, args.threads, runner, cache, on_batch
    )
    write_rows(rows, args.out, deviation=spec.ranked)
    failed = sum(1 for row in rows if row.error is not None)
    best = max(rows, key=lambda row: row.sre)
    runner.show(
        "Sweep finished: {} rows, {} failed, best SRE {} dB at {}".format(
            len(rows), failed, format_db(best.sre), best.params
        )
    )


COMMANDS = {
    "synth": cmd_synth,
    "unmix": cmd_unmix,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
    "segment": cmd_segment,
}
