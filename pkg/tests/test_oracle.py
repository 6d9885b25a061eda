import json
import math

import numpy as np
import pytest

from conftest import random_fn
from ricsolve import (
    Grid,
    OracleOptions,
    compare_riccati,
    riccati_solve,
    rk_linear2,
    rk_matrix,
    rk_riccati,
)
from ricsolve.errors import RicsolveError
from ricsolve.gridfn import ones, zeros
from ricsolve.matsol import CoeffTriple
from ricsolve.riccati import constant_coeffs

OPTS = OracleOptions(rel_tol=1e-10, abs_tol=1e-13)


def test_tanh(grid):
    run = rk_riccati(constant_coeffs(grid, -1, 0, 1), 0.0, OPTS)
    assert run.valid.all() and not run.stops
    np.testing.assert_allclose(run.y.values, np.tanh(grid.nodes), atol=1e-9)


def test_blowup_near_one():
    g = Grid(0.0, 2.0, 2000)
    run = rk_riccati(constant_coeffs(g, 1, 0, 0), 1.0, OPTS)
    (stop,) = run.blowups
    assert stop.direction == 1 and abs(stop.x - 1) < 1e-3
    assert run.valid[: g.index_of(0.999) + 1].all() and not run.valid[g.index_of(1.0) :].any()


def test_infinite_start_rejected(small_grid):
    with pytest.raises(RicsolveError):
        rk_riccati(constant_coeffs(small_grid, 1, 0, 0), complex(math.inf, 0))


def test_bad_options():
    with pytest.raises(RicsolveError):
        OracleOptions(rel_tol=0)


def test_linear_cosine(grid):
    run = rk_linear2(zeros(grid), ones(grid), 1.0, 0.0, OPTS)
    y, yp = run
    np.testing.assert_allclose(y.values, np.cos(grid.nodes), atol=1e-9)
    np.testing.assert_allclose(yp.values, -np.sin(grid.nodes), atol=1e-9)


def test_matrix_paths(grid):
    z = rk_matrix(constant_coeffs(grid, 0, 0, 0), OPTS).path
    assert np.all(z.a.values == 1) and np.all(z.b.values == 0)
    hyp = rk_matrix(constant_coeffs(grid, -1, 0, 1), OPTS).path
    np.testing.assert_allclose(hyp.a.values, np.cosh(grid.nodes), rtol=1e-9)
    np.testing.assert_allclose(hyp.b.values, np.sinh(grid.nodes), atol=1e-9)


def test_matrix_det(grid, rng):
    opts = OracleOptions(rel_tol=1e-9)
    c = CoeffTriple(*(random_fn(rng, grid, complex_=True) for _ in range(3)))
    assert np.max(rk_matrix(c, opts).path.det_residual()) < 10 * opts.rel_tol


def test_convergence_with_tolerance():
    # few cells, so the step size is set by the tolerance rather than the grid
    g = Grid(-2.0, 2.0, 4)
    c = constant_coeffs(g, -1, 0, 1)
    errs = [
        np.max(np.abs(rk_riccati(c, 0.5, OracleOptions(rel_tol=r, abs_tol=r)).y.values - np.tanh(g.nodes + np.arctanh(0.5))))
        for r in (1e-5, 1e-8)
    ]
    assert errs[1] < errs[0]


def test_dense_output(small_grid):
    run = rk_riccati(constant_coeffs(small_grid, -1, 0, 1), 0.0, OracleOptions(dense_output=True)).run
    assert len(run.dense) == run.n_steps


class TestCompare:
    def test_ok(self, grid, rng):
        c = CoeffTriple(*(random_fn(rng, grid, 0.5, complex_=True) for _ in range(3)))
        rep = compare_riccati(riccati_solve(c, 0.2j, 1e-12), rk_riccati(c, 0.2j, OPTS))
        # the oracle's linear coefficient interpolation costs O(h^2)
        assert rep.status == "ok" and rep.max_chordal_gap < 1e-5
        assert rep.compared_nodes == grid.n_nodes

    def test_expected_pole(self):
        g = Grid(0.0, 2.0, 1000)
        c = constant_coeffs(g, 1, 0, 0)
        rep = compare_riccati(riccati_solve(c, 1.0), rk_riccati(c, 1.0, OPTS))
        assert rep.status == "expected-pole"
        data = json.loads(json.dumps(rep.to_json()))
        assert data["stops"][0]["kind"] == "blowup"

    def test_error_on_mismatch(self, grid):
        c = constant_coeffs(grid, -1, 0, 1)
        rep = compare_riccati(riccati_solve(c, 0.0), rk_riccati(c, 0.1, OPTS))
        assert rep.status == "error" and rep.max_chordal_gap > 1e-3
