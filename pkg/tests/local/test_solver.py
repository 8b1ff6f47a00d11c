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
ADMM solvers for the coarse and the cross-scale regularized problems.
"""

import numpy as np
import pytest

from hmua.core import DimensionMismatch, InvalidParameter, SolverParams
from hmua.unmixing import (
    default_mu, objective, solve_coarse, solve_regularized
)

from .oracles import fista

TIGHT = SolverParams.create(tol=1e-11, max_iters=100000)


def random_instance(seed, bands=8, count=5, pixels=4):
    rng = np.random.default_rng(seed)
    A = np.abs(rng.standard_normal((bands, count))) + 0.1
    X = np.maximum(rng.standard_normal((count, pixels)), 0.0)
    Y = A @ X + 0.05 * rng.standard_normal((bands, pixels))
    return Y, A


def test_single_atom_closed_form():
    a = np.array([[0.6], [0.8]])
    y = 2.0 * a
    result = solve_coarse(y, a, 0.5, TIGHT)
    assert result.converged
    assert abs(result.X.data[0, 0] - 1.5) < 1e-8


def test_single_atom_below_threshold():
    a = np.array([[0.6], [0.8]])
    result = solve_coarse(0.3 * a, a, 0.5, TIGHT)
    assert abs(result.X.data[0, 0]) < 1e-8


def test_identity_library_projects():
    Y = np.array([[1.0, -2.0], [0.5, 3.0], [-0.1, 0.0]])
    result = solve_coarse(Y, np.eye(3), 0.0, TIGHT)
    np.testing.assert_allclose(result.X.data, np.maximum(Y, 0), atol=1e-8)


def test_large_threshold_gives_zero():
    rng = np.random.default_rng(3)
    A = rng.standard_normal((6, 4))
    A /= np.linalg.norm(A, axis=0)
    Y = rng.standard_normal((6, 3))
    lam = float(np.max(A.T @ Y)) + 0.1
    result = solve_coarse(Y, A, lam, TIGHT)
    np.testing.assert_allclose(result.X.data, 0.0, atol=1e-8)


def test_regularized_stationary_point():
    result = solve_regularized([[2.0]], [[1.0]], [[4.0]], 0.5, 1.0, TIGHT)
    assert result.converged
    assert abs(result.X.data[0, 0] - 2.75) < 1e-8


def test_zero_beta_matches_coarse():
    Y, A = random_instance(11)
    Xd = np.ones((A.shape[1], Y.shape[1]))
    coarse = solve_coarse(Y, A, 0.05)
    fine = solve_regularized(Y, A, Xd, 0.05, 0.0)
    assert np.array_equal(coarse.X.data, fine.X.data)
    assert coarse.iterations == fine.iterations


def test_large_beta_approaches_prior():
    Y, A = random_instance(5)
    Xd = np.random.default_rng(6).standard_normal((A.shape[1], Y.shape[1]))
    target = np.maximum(Xd, 0.0)
    gaps = [
        np.linalg.norm(
            solve_regularized(Y, A, Xd, 0.0, beta, TIGHT).X.data - target
        ) for beta in (10.0, 100.0, 1000.0)
    ]
    assert gaps[0] > gaps[1] > gaps[2]


def test_objective_values():
    Y, A = random_instance(2)
    zero = np.zeros((A.shape[1], Y.shape[1]))
    assert objective("coarse", Y, A, zero, 0.3) == pytest.approx(
        0.5 * np.sum(Y**2)
    )
    X = np.abs(np.random.default_rng(1).standard_normal(zero.shape))
    assert objective("coarse", Y, A, X, 0.2) == pytest.approx(
        objective("coarse", Y, A, X, 0.0) + 0.2 * X.sum()
    )
    with pytest.raises(DimensionMismatch):
        objective("coarse", Y, A, np.zeros((2, 2)), 0.1)
    with pytest.raises(InvalidParameter):
        objective("other", Y, A, X, 0.1)


def test_objective_minimum_on_grid():
    best = objective("regularized", [[2.0]], [[1.0]], [[2.75]], 0.5, 1.0,
                     [[4.0]])
    for x in np.arange(0.0, 5.0, 0.01):
        assert best <= objective(
            "regularized", [[2.0]], [[1.0]], [[x]], 0.5, 1.0, [[4.0]]
        ) + 1e-12


def test_nonnegative_and_decreasing_objective():
    Y, A = random_instance(9)
    result = solve_coarse(Y, A, 0.01)
    assert result.X.data.min() >= 0.0
    assert result.objective <= 0.5 * np.sum(Y**2)
    assert not result.X.data.flags.writeable


def test_sparsity_shrinks_with_lambda():
    rng = np.random.default_rng(4)
    A, _ = np.linalg.qr(rng.standard_normal((10, 6)))
    Y = rng.standard_normal((10, 5))
    counts = [
        int(np.sum(solve_coarse(Y, A, lam, TIGHT).X.data > 1e-8))
        for lam in (0.001, 0.01, 0.1, 1.0)
    ]
    assert counts == sorted(counts, reverse=True)


@pytest.mark.parametrize("seed", range(5))
@pytest.mark.parametrize("lam", [0.0, 0.01, 0.1])
def test_matches_reference_solver(seed, lam):
    rng = np.random.default_rng(seed)
    count = int(rng.integers(1, 6))
    bands = int(rng.integers(count + 2, count + 6))
    pixels = int(rng.integers(1, 5))
    A = rng.standard_normal((bands, count))
    Y = rng.standard_normal((bands, pixels))
    Xd = np.abs(rng.standard_normal((count, pixels)))
    params = SolverParams.create(tol=1e-10, max_iters=200000)

    coarse = solve_coarse(Y, A, lam, params)
    reference = objective("coarse", Y, A, fista(Y, A, lam), lam)
    assert coarse.objective <= reference + 1e-5 * max(1.0, abs(reference))

    fine = solve_regularized(Y, A, Xd, lam, 2.0, params)
    reference = objective(
        "regularized", Y, A, fista(Y, A, lam, 2.0, Xd), lam, 2.0, Xd
    )
    assert abs(fine.objective - reference) <= 1e-5 * max(1.0, abs(reference))


def test_nonconvergence_is_reported():
    Y, A = random_instance(8)
    result = solve_coarse(Y, A, 0.01, SolverParams.create(max_iters=1))
    assert result.iterations == 1
    assert not result.converged
    assert "not converged" in result.summary()


def test_shape_and_weight_errors():
    with pytest.raises(DimensionMismatch):
        solve_coarse(np.ones((3, 2)), np.ones((4, 2)), 0.1)
    with pytest.raises(DimensionMismatch):
        solve_regularized(np.ones((3, 2)), np.ones((3, 2)), np.ones((2, 3)),
                          0.1, 1.0)
    with pytest.raises(InvalidParameter):
        solve_coarse(np.ones((3, 2)), np.ones((3, 2)), -0.1)


def test_default_mu():
    assert default_mu(np.array([[1.0, -3.0]])) == pytest.approx(0.2)
    assert default_mu(np.zeros((2, 2))) == 1.0


def test_zero_data_stops_at_first_check():
    A = np.abs(np.random.default_rng(4).standard_normal((6, 3))) + 0.1
    result = solve_coarse(np.zeros((6, 5)), A, 0.1)
    assert result.converged
    assert result.iterations == 10
    assert not result.X.data.any()


def test_residuals_are_measured_on_the_last_iteration():
    Y, A = random_instance(9)
    result = solve_coarse(Y, A, 0.01, SolverParams.create(max_iters=7))
    assert result.iterations == 7
    assert np.isfinite(result.primal_residual)
    assert np.isfinite(result.dual_residual)


def test_columns_are_solved_independently():
    Y, A = random_instance(12, pixels=6)
    together = solve_coarse(Y, A, 0.05, TIGHT).X.data
    for column in range(Y.shape[1]):
        alone = solve_coarse(Y[:, [column]], A, 0.05, TIGHT).X.data
        np.testing.assert_allclose(
            alone[:, 0], together[:, column], atol=1e-7
        )
