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
ADMM solvers for nonnegative sparse regression against a spectral library.

Both problems share one splitting: U carries the quadratic terms, V the L1
penalty and the nonnegativity constraint, D is the scaled dual and U = V is
the coupling constraint. The returned abundances are the V iterate, so they
are nonnegative exactly.
"""

import math
from typing import Any, NamedTuple, Optional

import numpy as np
from scipy import linalg

from hmua.core import (
    AbundanceMap, DimensionMismatch, InvalidParameter, SolverParams,
    SpectralLibrary
)

_TINY = 1e-300
# Residual norms are evaluated on this period and on the last iteration.
_CHECK_EVERY = 10


class SolveResult(NamedTuple):
    X: AbundanceMap
    iterations: int
    primal_residual: float
    dual_residual: float
    objective: float
    converged: bool
    mu: float

    def summary(self) -> str:
        return (
            "{} iterations, primal {:.2e}, dual {:.2e}, objective {:.6g}{}"
        ).format(
            self.iterations, self.primal_residual, self.dual_residual,
            self.objective, "" if self.converged else " (not converged)"
        )


def _matrix(value: Any, what: str) -> np.ndarray:
    matrix = np.asarray(value, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[:, np.newaxis]
    if matrix.ndim != 2:
        raise DimensionMismatch(
            "{} must be a matrix, got shape {}".format(what, matrix.shape)
        )
    return matrix


def _library_matrix(lib: Any) -> np.ndarray:
    if isinstance(lib, SpectralLibrary):
        return lib.data
    return _matrix(lib, "library")


def default_mu(AtY: np.ndarray) -> float:
    """0.1 * mean(|A^T Y|), or 1 when that is zero."""
    value = 0.1 * float(np.mean(np.abs(AtY))) if AtY.size else 0.0
    return value if value > 0 else 1.0


def objective(
    kind: str,
    Y: Any,
    A: Any,
    X: Any,
    lam: float,
    beta: float = 0.0,
    Xd: Any = None,
) -> float:
    """
    Exact objective value of an iterate.

    coarse:      1/2 |Y - AX|^2 + lam |X|_1
    regularized: the coarse terms + beta/2 |Xd - X|^2
    """
    Y = _matrix(Y, "Y")
    A = _library_matrix(A)
    X = _matrix(X, "X")
    if A.shape[0] != Y.shape[0] or A.shape[1] != X.shape[0] \
            or X.shape[1] != Y.shape[1]:
        raise DimensionMismatch(
            "inconsistent shapes: Y {}, A {}, X {}".format(
                Y.shape, A.shape, X.shape
            )
        )
    value = 0.5 * float(np.sum((Y - A @ X)**2)) + lam * float(np.abs(X).sum())
    if kind == "coarse":
        return value
    if kind != "regularized":
        raise InvalidParameter("unknown objective kind {!r}".format(kind))
    if Xd is None:
        if beta:
            raise InvalidParameter("regularized objective needs Xd")
        return value
    Xd = _matrix(Xd, "Xd")
    if Xd.shape != X.shape:
        raise DimensionMismatch(
            "Xd shape {} differs from X shape {}".format(Xd.shape, X.shape)
        )
    return value + 0.5 * beta * float(np.sum((Xd - X)**2))


def _admm(
    Y: np.ndarray,
    A: np.ndarray,
    lam: float,
    beta: float,
    Xd: Optional[np.ndarray],
    params: SolverParams,
) -> SolveResult:
    bands, count = A.shape
    if Y.shape[0] != bands:
        raise DimensionMismatch(
            "data has {} bands but library has {}".format(Y.shape[0], bands)
        )
    if not (np.isfinite(lam) and lam >= 0):
        raise InvalidParameter("L1 weight must be finite and >= 0")
    if not (np.isfinite(beta) and beta >= 0):
        raise InvalidParameter("beta must be finite and >= 0")

    AtY = A.T @ Y
    mu = params.mu if params.mu is not None else default_mu(AtY)
    fixed = AtY
    if Xd is not None and beta > 0:
        fixed = AtY + beta * Xd

    # (A^T A + (mu + beta) I) is shared by every column and iteration: it is
    # factored once and inverted once, so each U-update is a single product.
    system = A.T @ A
    system[np.diag_indices(count)] += mu + beta
    factor = linalg.cho_factor(system, lower=True, check_finite=False)
    inverse = linalg.cho_solve(factor, np.eye(count), check_finite=False)
    base = inverse @ fixed
    step = mu * inverse

    shape = (count, Y.shape[1])
    U = np.empty(shape)
    V = np.zeros(shape)
    D = np.zeros(shape)
    previous = np.empty(shape)
    work = np.empty(shape)
    threshold = lam / mu
    # Residuals are measured against sqrt(P N) plus the iterate scale.
    floor = max(math.sqrt(V.size), _TINY)
    dual_scale = float(np.linalg.norm(fixed))
    primal = dual = np.inf
    converged = False
    iteration = 0
    for iteration in range(1, params.max_iters + 1):
        np.subtract(V, D, out=work)
        np.matmul(step, work, out=U)
        U += base
        previous, V = V, previous
        np.add(U, D, out=V)
        V -= threshold
        np.maximum(V, 0.0, out=V)
        np.subtract(U, V, out=work)
        D += work
        if iteration % _CHECK_EVERY and iteration != params.max_iters:
            continue
        primal = float(np.linalg.norm(work)) / (
            floor + max(float(np.linalg.norm(U)), float(np.linalg.norm(V)))
        )
        np.subtract(V, previous, out=work)
        dual = mu * float(np.linalg.norm(work)) / (
            floor + max(mu * float(np.linalg.norm(D)), dual_scale)
        )
        if primal <= params.tol and dual <= params.tol:
            converged = True
            break

    if Xd is not None:
        value = objective("regularized", Y, A, V, lam, beta, Xd)
    else:
        value = objective("coarse", Y, A, V, lam)
    V.setflags(write=False)
    return SolveResult(
        AbundanceMap(V), iteration, primal, dual, value, converged, mu
    )


def solve_coarse(
    Yc: Any,
    A: Any,
    lambda_c: float,
    admm: Optional[SolverParams] = None,
) -> SolveResult:
    """
    Minimize 1/2 |Yc - A Xc|^2 + lambda_c |Xc|_1 subject to Xc >= 0.

    Failure to converge within max_iters is reported through the result's
    residuals and ``converged`` flag, not raised.
    """
    admm = admm or SolverParams()
    return _admm(
        _matrix(Yc, "coarse data"), _library_matrix(A), float(lambda_c), 0.0,
        None, admm
    )


def solve_regularized(
    Y: Any,
    A: Any,
    Xd: Any,
    lam: float,
    beta: float,
    admm: Optional[SolverParams] = None,
) -> SolveResult:
    """
    Minimize 1/2 |Y - AX|^2 + lam |X|_1 + beta/2 |Xd - X|^2 subject to X >= 0.
    """
    admm = admm or SolverParams()
    Y = _matrix(Y, "data")
    A = _library_matrix(A)
    Xd = _matrix(Xd, "cross-scale abundances")
    if Xd.shape != (A.shape[1], Y.shape[1]):
        raise DimensionMismatch(
            "cross-scale abundances have shape {}, expected {}".format(
                Xd.shape, (A.shape[1], Y.shape[1])
            )
        )
    return _admm(Y, A, float(lam), float(beta), Xd, admm)
