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
Command line parsing and crash reporting.
"""

import argparse
import sys
from contextlib import contextmanager
from traceback import format_exc
from typing import Any, Iterator, List, Optional

import hmua
from hmua import DEFAULT_THREADS
from hmua.config import PRESETS
from hmua.core import HmuaError
from hmua.runner import Runner
from hmua.utilities import dumb_print

# Commands that draw random numbers and so accept --seed.
SEEDED_COMMANDS = ("synth", "sweep")

HELP_EXAMPLES = """\
== Examples ==

Synthesize a 100x100 scene from a generated 224-band, 240-signature library
at 20 dB:

$ hmua synth --spec scene.json --lib synthetic:224x240 --snr 20 \\
      --seed 7 --out scene/

Unmix it with the homogeneity-driven pipeline and score the estimate:

$ hmua unmix --cube scene/cube.json --lib synthetic:224x240 \\
      --config cfg.yaml --out run/
$ hmua eval --truth scene/truth.abund --estimate run/abundances.abund

Sweep lambda around a published preset with four workers:

$ hmua sweep --cube scene/cube.json --lib synthetic:224x240 \\
      --truth scene/truth.abund --spec sweep.yaml --out sweep.csv \\
      --threads 4
"""


def report_crash(error: Any, log_path: str, logs: str) -> None:
    print(
        "\nLooks like there's a bug in our code. Sorry about that!\n\n" +
        error + "\n",
        file=sys.stderr
    )
    if log_path != "-":
        log_ref = " (see {} for the complete logs):".format(log_path)
    else:
        log_ref = ""
    if "\n" in logs:
        print(
            "Here are the last few lines of the logfile" + log_ref + "\n\n" +
            "\n".join(logs.splitlines()[-12:]) + "\n",
            file=sys.stderr
        )


@contextmanager
def crash_reporting(runner: Optional[Runner] = None) -> Iterator[None]:
    """
    Turn expected failures into their exit codes and report anything else
    as a crash.
    """
    try:
        yield
    except KeyboardInterrupt:
        if runner is not None:
            show = runner.show
        else:
            show = dumb_print
        show("Keyboard interrupt (Ctrl-C/Ctrl-Break) pressed")
        raise SystemExit(0)
    except HmuaError as exc:
        if runner is not None:
            runner.fail(str(exc), exc.exit_code)
        dumb_print("hmua: {}".format(exc))
        raise SystemExit(exc.exit_code)
    except Exception as exc:
        error = format_exc()
        logs = "Not available"
        log_path = "-"
        if runner is not None:
            logs = runner.read_logs()
            log_path = runner.logfile_path
            runner.write("CRASH: {}".format(exc))
            runner.write(error)
        report_crash(error, log_path, logs)
        raise SystemExit(1)


def threads(value: str) -> int:
    try:
        count = int(value)
    except ValueError:
        count = 0
    if count < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return count


def snr(value: str) -> float:
    """Parse an SNR in dB; "inf" means noiseless."""
    try:
        parsed = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError("must be a number or inf")
    if parsed != parsed or parsed == float("-inf"):
        raise argparse.ArgumentTypeError("must be a number or inf")
    return parsed


def _global_flags() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument(
        "--threads",
        type=threads,
        default=DEFAULT_THREADS,
        metavar="N",
        help=(
            "Worker processes for homogeneity tests and sweeps. Defaults to "
            "$HMUA_THREADS or 1."
        )
    )
    parent.add_argument(
        "--seed",
        type=int,
        default=None,
        metavar="S",
        help=(
            "Seed for the random draws of synth (default 0) and sweep "
            "(overrides the sweep description). Other commands draw nothing "
            "at random and reject it."
        )
    )
    parent.add_argument(
        "--strict",
        action="store_true",
        help="Exit with status 4 if a solver did not converge."
    )
    parent.add_argument(
        "--logfile",
        default="./hmua.log",
        help=(
            "The path to write logs to. '-' means stdout, "
            "default is './hmua.log'."
        )
    )
    parent.add_argument(
        "--verbose",
        action="store_true",
        help="Show progress messages on stderr as well as in the log."
    )
    return parent


def _cube_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--cube",
        required=True,
        metavar="HEADER",
        help="Cube header JSON (rows, cols, bands, dtype, layout)."
    )
    parser.add_argument(
        "--data",
        default=None,
        metavar="PATH",
        help=(
            "Band-sequential cube payload. Defaults to the header path with "
            "a .bsq suffix."
        )
    )


def _lib_flag(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--lib",
        required=True,
        metavar="CSV",
        help=(
            "Spectral library CSV (one row per band, one column per "
            "signature, header of names), or synthetic:LxP for a generated "
            "library."
        )
    )


def _config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--config",
        default=None,
        metavar="PATH",
        help="Pipeline configuration, JSON or YAML."
    )
    parser.add_argument(
        "--preset",
        default=None,
        choices=sorted(PRESETS),
        help="Published parameter set; --config keys override it."
    )
    parser.add_argument(
        "--mode",
        default=None,
        choices=("mua", "hmua"),
        help="Pipeline to run; overrides the configuration's mode."
    )


def parse_args(in_args: Optional[List[str]] = None) -> argparse.Namespace:
    """Create a new ArgumentParser and parse sys.argv."""
    parent = _global_flags()
    parser = argparse.ArgumentParser(
        prog="hmua",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        allow_abbrev=False,
        description=(
            "HMUA: homogeneity-driven multiscale sparse unmixing of "
            "hyperspectral images.\n\n" + HELP_EXAMPLES
        )
    )
    parser.add_argument(
        "--version", action="version", version=hmua.__version__
    )
    commands = parser.add_subparsers(dest="command", metavar="COMMAND")
    commands.required = True

    synth = commands.add_parser(
        "synth",
        parents=[parent],
        allow_abbrev=False,
        help="Generate a synthetic scene with known abundances."
    )
    synth.add_argument(
        "--spec",
        required=True,
        metavar="PATH",
        help=(
            "Scene description: rows, cols, endmember_count and optionally "
            "pattern, smoothness, seed."
        )
    )
    _lib_flag(synth)
    synth.add_argument(
        "--snr",
        type=snr,
        required=True,
        metavar="DB",
        help="Signal-to-noise ratio in dB; inf for a noiseless cube."
    )
    synth.add_argument(
        "--out", required=True, metavar="DIR", help="Output directory."
    )
    synth.add_argument(
        "--min-angle",
        type=float,
        default=4.44,
        metavar="DEG",
        help="Minimum spectral angle between drawn endmembers."
    )
    synth.add_argument(
        "--dtype",
        default="float64",
        choices=("float32", "float64"),
        help="Sample type of the written cube."
    )
    unmix = commands.add_parser(
        "unmix",
        parents=[parent],
        allow_abbrev=False,
        help="Estimate abundances with MUA or HMUA."
    )
    _cube_flags(unmix)
    _lib_flag(unmix)
    _config_flags(unmix)
    unmix.add_argument(
        "--out", required=True, metavar="DIR", help="Output directory."
    )

    evaluate = commands.add_parser(
        "eval",
        parents=[parent],
        allow_abbrev=False,
        help="Print the SRE of an estimate against the truth."
    )
    evaluate.add_argument("--truth", required=True, metavar="ABUND")
    evaluate.add_argument("--estimate", required=True, metavar="ABUND")
    evaluate.add_argument(
        "--csv",
        default=None,
        metavar="PATH",
        help="Also append a (label, SRE) row to this CSV file."
    )
    evaluate.add_argument(
        "--label",
        default=None,
        help="Row label for --csv; defaults to the estimate path."
    )

    sweep = commands.add_parser(
        "sweep",
        parents=[parent],
        allow_abbrev=False,
        help="Score many parameter settings against known abundances."
    )
    _cube_flags(sweep)
    _lib_flag(sweep)
    sweep.add_argument("--truth", required=True, metavar="ABUND")
    sweep.add_argument(
        "--spec",
        required=True,
        metavar="PATH",
        help="Sweep description, JSON or YAML."
    )
    sweep.add_argument(
        "--out", required=True, metavar="CSV", help="Result table."
    )
    sweep.add_argument(
        "--cache",
        default=None,
        metavar="PATH",
        help="Remember finished trials here and resume from it."
    )

    segment = commands.add_parser(
        "segment",
        parents=[parent],
        allow_abbrev=False,
        help="Run only the (hierarchical) oversegmentation."
    )
    _cube_flags(segment)
    _config_flags(segment)
    segment.add_argument(
        "--out", required=True, metavar="DIR", help="Output directory."
    )

    args = parser.parse_args(in_args)
    if args.seed is not None and args.command not in SEEDED_COMMANDS:
        parser.error(
            "--seed has no effect on {}: it draws nothing at random".format(
                args.command
            )
        )
    if args.command == "eval" and args.label is None:
        args.label = args.estimate
    return args
