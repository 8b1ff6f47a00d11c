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
Two-scale unmixing (MUA) and its homogeneity-driven variant (HMUA).

MUA averages the image over superpixels, unmixes the coarse image, spreads
the coarse abundances back to the pixels and uses them to regularize the
pixel-level problem. HMUA first builds the superpixels by oversegmenting at
sigma0 and re-segmenting the non-homogeneous ones at each smaller size.
"""

import itertools
import math
from time import time
from typing import (
    Any, Dict, Iterator, List, NamedTuple, Optional, Sequence, Tuple
)

import numpy as np
from joblib import Parallel, delayed

from hmua import config
from hmua.core import (
    AbundanceMap, ConfigError, DimensionMismatch, HmuaError,
    HomogeneityParams, HyperCube, InvalidParameter, SegmentationMap,
    SolverParams, SpectralLibrary, canonical_labels, validate
)
from hmua.runner import Runner
from hmua.segmentation import (
    HomogeneityReport, SlicParams, assess, refine_rounds, slic_segment
)
from hmua.segmentation.homogeneity import check_sigmas
from hmua.synth.metrics import sre

from .scalespace import build_operator, coarsen, uncoarsen
from .solver import SolveResult, solve_coarse, solve_regularized

MODES = ("mua", "hmua")


class PipelineConfig(NamedTuple):
    slic: SlicParams
    refine_sigmas: Tuple[float, ...] = ()
    hp: HomogeneityParams = HomogeneityParams()
    solver: SolverParams = SolverParams()
    mode: str = "hmua"

    @classmethod
    def create(
        cls,
        slic: SlicParams,
        refine_sigmas: Sequence[float] = (),
        hp: Optional[HomogeneityParams] = None,
        solver: Optional[SolverParams] = None,
        mode: str = "hmua",
    ) -> "PipelineConfig":
        if mode not in MODES:
            raise ConfigError(
                "mode must be one of {}, got {!r}".format(
                    ", ".join(MODES), mode
                )
            )
        sigmas = tuple(float(sigma) for sigma in refine_sigmas)
        if mode == "hmua":
            if not sigmas:
                raise ConfigError("hmua mode needs at least one refine sigma")
            check_sigmas(sigmas)
            if sigmas[0] >= slic.sigma:
                raise ConfigError(
                    "refine sigmas must be smaller than sigma0 ({})".format(
                        slic.sigma
                    )
                )
            if sigmas[-1] < 1:
                raise ConfigError("refine sigmas must be >= 1")
        return cls(
            slic, sigmas, hp or HomogeneityParams(), solver or SolverParams(),
            mode
        )

    @classmethod
    def from_dict(cls, document: Any) -> "PipelineConfig":
        """Build from a flat configuration document (see hmua.config)."""
        settings = config.resolve(document)
        try:
            sigmas = settings["sigmas"]
            if not isinstance(sigmas, (list, tuple)):
                raise InvalidParameter("sigmas must be a list")
            return cls.create(
                SlicParams.create(
                    settings["sigma0"], settings["gamma"], settings["iters"],
                    settings["min_size_fraction"]
                ),
                sigmas,
                HomogeneityParams.create(
                    settings["tau_outliers"], settings["tau_homog"]
                ),
                SolverParams.create(
                    settings["lambda"], settings["lambda_c"],
                    settings["beta"], settings["mu"], settings["max_iters"],
                    settings["tol"]
                ),
                settings["mode"],
            )
        except (InvalidParameter, TypeError, ValueError) as exc:
            if isinstance(exc, ConfigError):
                raise
            raise ConfigError("invalid configuration: {}".format(exc))

    def as_dict(self) -> Dict[str, Any]:
        """Flat document that from_dict turns back into this config."""
        return {
            "gamma": self.slic.gamma,
            "sigma0": self.slic.sigma,
            "sigmas": list(self.refine_sigmas),
            "iters": self.slic.iters,
            "min_size_fraction": self.slic.min_size_fraction,
            "tau_outliers": self.hp.tau_outliers,
            "tau_homog": self.hp.tau_homog,
            "lambda_c": self.solver.lambda_c,
            "lambda": self.solver.lam,
            "beta": self.solver.beta,
            "mu": self.solver.mu,
            "max_iters": self.solver.max_iters,
            "tol": self.solver.tol,
            "mode": self.mode,
        }

    def with_mode(self, mode: str) -> "PipelineConfig":
        return PipelineConfig.create(
            self.slic, self.refine_sigmas, self.hp, self.solver, mode
        )


class HmuaSegmentation(NamedTuple):
    """Segmentation half of HMUA: initial and final maps with their tests."""
    initial: SegmentationMap
    final: SegmentationMap
    eta_trace: List[float]
    superpixels: List[int]
    initial_report: HomogeneityReport
    final_report: HomogeneityReport


class Diagnostics(NamedTuple):
    mode: str
    eta_trace: Optional[List[float]]
    superpixels: List[int]
    K_initial: int
    K_final: int
    coarse: SolveResult
    fine: SolveResult
    runtime_s: float
    timings: Dict[str, float]
    deltas_initial: Optional[np.ndarray] = None
    deltas_final: Optional[np.ndarray] = None

    @property
    def converged(self) -> bool:
        return self.coarse.converged and self.fine.converged

    def as_dict(self) -> Dict[str, Any]:
        """JSON-ready summary; eta_trace only for hmua runs."""
        result = {
            "mode": self.mode,
            "K_initial": self.K_initial,
            "K_final": self.K_final,
            "superpixels": list(self.superpixels),
            "iters_coarse": self.coarse.iterations,
            "iters_fine": self.fine.iterations,
            "residuals": {
                "coarse_primal": self.coarse.primal_residual,
                "coarse_dual": self.coarse.dual_residual,
                "fine_primal": self.fine.primal_residual,
                "fine_dual": self.fine.dual_residual,
            },
            "objective": {
                "coarse": self.coarse.objective,
                "fine": self.fine.objective,
            },
            "mu": {
                "coarse": self.coarse.mu,
                "fine": self.fine.mu,
            },
            "converged": self.converged,
            "runtime_s": self.runtime_s,
            "timings": dict(self.timings),
        }  # type: Dict[str, Any]
        if self.eta_trace is not None:
            result["eta_trace"] = list(self.eta_trace)
        return result


class HmuaResult(NamedTuple):
    abundances: AbundanceMap
    segmentation: SegmentationMap
    eta_trace: Optional[List[float]]
    diagnostics: Diagnostics


def _check_cover(cube: HyperCube, seg: SegmentationMap) -> None:
    if (seg.rows, seg.cols) != (cube.rows, cube.cols):
        raise DimensionMismatch(
            "segmentation is {}x{} but cube is {}x{}".format(
                seg.rows, seg.cols, cube.rows, cube.cols
            )
        )


def mua_unmix(
    cube: HyperCube,
    lib: SpectralLibrary,
    seg: SegmentationMap,
    cfg: PipelineConfig,
    runner: Optional[Runner] = None,
) -> Tuple[AbundanceMap, Tuple[SolveResult, SolveResult]]:
    """
    Coarsen, solve at the coarse scale, uncoarsen, solve the regularized
    pixel-level problem.

    :return: the estimate and the (coarse, fine) solver results
    """
    runner = runner or Runner.null()
    validate(cube, lib)
    _check_cover(cube, seg)
    solver = cfg.solver

    with runner.span("coarsen", False, verbose=False):
        op = build_operator(seg)
        coarse_data = coarsen(cube.data, op)
    runner.write(
        "Coarse scale: {} superpixels for {} pixels".format(
            op.superpixels, op.pixels
        )
    )
    with runner.span("solve-coarse", False, verbose=False):
        coarse = solve_coarse(coarse_data, lib, solver.lambda_c, solver)
    runner.write("Coarse solve: {}".format(coarse.summary()))

    with runner.span("solve-fine", False, verbose=False):
        spread = uncoarsen(coarse.X.data, op)
        fine = solve_regularized(
            cube.data, lib, spread, solver.lam, solver.beta, solver
        )
    runner.write("Fine solve: {}".format(fine.summary()))
    return fine.X, (coarse, fine)


def hmua_segment(
    cube: HyperCube,
    cfg: PipelineConfig,
    runner: Optional[Runner] = None,
) -> HmuaSegmentation:
    """
    Oversegment at sigma0 and refine the non-homogeneous superpixels over
    cfg.refine_sigmas, stopping early once all are homogeneous.
    """
    runner = runner or Runner.null()
    jobs = runner.threads
    with runner.span("slic", False, verbose=False):
        seg0 = slic_segment(cube, cfg.slic)
    with runner.span("assess", False, verbose=False):
        report0 = assess(cube, seg0, cfg.hp, jobs)
    initial = seg0.with_flags(report0.flags)
    runner.progress(
        "Scale 0 (sigma {:g}): {} superpixels, {:.1f}% homogeneous".format(
            cfg.slic.sigma, initial.superpixels, report0.eta
        )
    )

    seg, report = initial, report0
    etas, counts = [report0.eta], [initial.superpixels]
    with runner.span("refine", False, verbose=False):
        rounds = refine_rounds(
            cube,
            initial,
            cfg.refine_sigmas,
            cfg.slic.gamma,
            cfg.hp,
            report=report0,
            iters=cfg.slic.iters,
            min_size_fraction=cfg.slic.min_size_fraction,
            n_jobs=jobs,
        )
        for (seg, report), sigma in zip(rounds, cfg.refine_sigmas):
            etas.append(report.eta)
            counts.append(seg.superpixels)
            runner.progress(
                "Scale {} (sigma {:g}): {} superpixels, {:.1f}% "
                "homogeneous".format(
                    seg.scale, sigma, seg.superpixels, report.eta
                )
            )

    _, old_ids = canonical_labels(seg.labels)
    final = seg.canonical()
    final_report = HomogeneityReport(
        report.deltas[old_ids], report.flags[old_ids], report.eta
    )
    return HmuaSegmentation(
        initial, final, etas, counts, report0, final_report
    )


def _timing_delta(
    runner: Runner, before: Dict[str, float]
) -> Dict[str, float]:
    return {
        tag: spent - before.get(tag, 0.0)
        for tag, spent in runner.timings.items()
        if spent != before.get(tag, 0.0)
    }


def hmua_unmix(
    cube: HyperCube,
    lib: SpectralLibrary,
    cfg: PipelineConfig,
    runner: Optional[Runner] = None,
) -> HmuaResult:
    """
    Homogeneity-driven segmentation followed by MUA on the final map.
    """
    if cfg.mode != "hmua":
        raise InvalidParameter("hmua_unmix needs a hmua configuration")
    runner = runner or Runner.null()
    validate(cube, lib)
    start, before = time(), dict(runner.timings)
    segmentation = hmua_segment(cube, cfg, runner)
    estimate, (coarse, fine) = mua_unmix(
        cube, lib, segmentation.final, cfg, runner
    )
    diagnostics = Diagnostics(
        "hmua",
        segmentation.eta_trace,
        segmentation.superpixels,
        segmentation.initial.superpixels,
        segmentation.final.superpixels,
        coarse,
        fine,
        time() - start,
        _timing_delta(runner, before),
        segmentation.initial_report.deltas,
        segmentation.final_report.deltas,
    )
    return HmuaResult(
        estimate, segmentation.final, segmentation.eta_trace, diagnostics
    )


def unmix(
    cube: HyperCube,
    lib: SpectralLibrary,
    cfg: PipelineConfig,
    runner: Optional[Runner] = None,
) -> HmuaResult:
    """
    Run the pipeline cfg.mode selects. In mua mode the segmentation is a
    single oversegmentation at sigma0 and no eta trace is produced.
    """
    if cfg.mode == "hmua":
        return hmua_unmix(cube, lib, cfg, runner)
    runner = runner or Runner.null()
    validate(cube, lib)
    start, before = time(), dict(runner.timings)
    with runner.span("slic", False, verbose=False):
        seg = slic_segment(cube, cfg.slic)
    runner.progress(
        "Scale 0 (sigma {:g}): {} superpixels".format(
            cfg.slic.sigma, seg.superpixels
        )
    )
    estimate, (coarse, fine) = mua_unmix(cube, lib, seg, cfg, runner)
    diagnostics = Diagnostics(
        "mua",
        None,
        [seg.superpixels],
        seg.superpixels,
        seg.superpixels,
        coarse,
        fine,
        time() - start,
        _timing_delta(runner, before),
    )
    return HmuaResult(estimate, seg, None, diagnostics)


# Grid search


class GridRow(NamedTuple):
    params: Dict[str, Any]
    sre: float
    runtime_s: float
    superpixels: int
    error: Optional[str] = None


def point_document(
    base: Dict[str, Any],
    point: Dict[str, Any],
    mode: Optional[str] = None,
) -> Dict[str, Any]:
    """
    Overlay a grid or sweep point on a base document. The "scales" key
    expands to sigma0 and sigmas.
    """
    document = dict(base)
    for key, value in point.items():
        if key == "scales":
            document["sigma0"] = value[0]
            document["sigmas"] = list(value[1:])
        else:
            document[key] = value
    if mode is not None:
        document["mode"] = mode
    return document


def evaluate(
    cube: HyperCube,
    lib: SpectralLibrary,
    X_true: AbundanceMap,
    document: Dict[str, Any],
    point: Optional[Dict[str, Any]] = None,
) -> GridRow:
    """
    Run the pipeline for one configuration document and score it.

    Failures are returned as a row with SRE -inf and the error message.
    """
    point = document if point is None else point
    start = time()
    try:
        cfg = PipelineConfig.from_dict(document)
        result = unmix(cube, lib, cfg)
        score = sre(X_true, result.abundances)
        return GridRow(
            point, score, time() - start, result.segmentation.superpixels
        )
    except (HmuaError, ArithmeticError, np.linalg.LinAlgError) as exc:
        return GridRow(point, -math.inf, time() - start, 0, str(exc))


def expand_grid(param_grid: Dict[str, Sequence[Any]]
                ) -> Iterator[Dict[str, Any]]:
    """Cartesian product of the grid, keys in sorted order."""
    keys = sorted(param_grid)
    for values in itertools.product(*(param_grid[key] for key in keys)):
        yield dict(zip(keys, values))


def _sortable(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return tuple(_sortable(item) for item in value)
    if value is None:
        return -math.inf
    return value


def grid_search(
    cube: HyperCube,
    lib: SpectralLibrary,
    X_true: AbundanceMap,
    param_grid: Dict[str, Sequence[Any]],
    base: Optional[Dict[str, Any]] = None,
    mode: Optional[str] = None,
    n_jobs: int = 1,
    runner: Optional[Runner] = None,
) -> List[GridRow]:
    """
    Evaluate every grid point and rank by SRE, best first.

    Grid keys are configuration keys, plus "scales" for a full
    [sigma0, sigma1, ...] list. Ties are broken by the parameter values in
    key order. Failed points are kept, ranked last, with their error.
    """
    runner = runner or Runner.null()
    points = list(expand_grid(param_grid))
    if not points:
        raise InvalidParameter("parameter grid is empty")
    base = dict(base or {})
    runner.write(
        "Grid search over {} points with {} workers".format(
            len(points), n_jobs
        )
    )
    with runner.span("grid-search", False):
        rows = Parallel(n_jobs=n_jobs)(
            delayed(evaluate)(
                cube, lib, X_true, point_document(base, point, mode), point
            ) for point in points
        )
    failures = [row for row in rows if row.error is not None]
    for row in failures:
        runner.write("Grid point {} failed: {}".format(row.params, row.error))
    keys = sorted(param_grid)
    return sorted(
        rows,
        key=lambda row: (
            -row.sre, tuple(_sortable(row.params[key]) for key in keys)
        )
    )


def published_grid() -> Dict[str, List[Any]]:
    """
    The published grid-search ranges, three refinement rounds.

    Far too large to run whole; subset it.
    """
    decades = (1e-3, 1e-2, 1e-1, 1.0)
    weights = sorted(
        round(m * d, 6) for d in decades for m in (1, 3, 5, 7, 9)
    )
    scales = [
        list(combo)
        for combo in itertools.combinations(range(14, 4, -1), 4)
    ]
    return {
        "gamma": [round(0.00025 + 0.001 * k, 5) for k in range(100)] + [0.1],
        "scales": scales,
        "tau_outliers": [0.1, 0.2, 0.3],
        "tau_homog": [0.1, 0.2, 0.3, 0.4, 0.5, 0.6],
        "lambda_c": weights,
        "lambda": weights,
        "beta": sorted(
            round(m * d, 6) for d in (0.1, 1.0, 10.0, 100.0) for m in (1, 3, 5)
        ),
    }
