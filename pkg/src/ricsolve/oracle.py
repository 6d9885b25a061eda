"""Independent check: adaptive Dormand-Prince 5(4) integration.

Nothing here touches the series machinery. Coefficients are the same grid
samples the series engine sees, linearly interpolated inside each cell.
Integration marches node to node outward from 0 in both directions, with
adaptive substeps that never straddle a node (the interpolant has kinks
there). A Riccati run stops in a direction once ``|y|`` exceeds the escape
radius; continuing through the pole is the series engine's job.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import RicsolveError
from .gridfn import Grid, GridFunction, same_grid
from .matsol import CoeffTriple, MatPath
from .riccati import SphereTrajectory
from .sphere import chordal_array


@dataclass(frozen=True)
class OracleOptions:
    rel_tol: float = 1e-9
    abs_tol: float = 1e-12
    max_step: float = math.inf
    # keep every accepted (x, y) step in the run record
    dense_output: bool = False
    escape_radius: float = 1e8
    min_step: float = 1e-14

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0 and self.max_step > 0):
            raise RicsolveError("oracle tolerances and max_step must be positive")


@dataclass(frozen=True)
class StopReport:
    """Why integration stopped early in one direction."""

    direction: int
    x: float
    kind: str  # "blowup" or "underflow"
    last_node: int
    magnitude: float = math.nan


@dataclass
class OracleRun:
    grid: Grid
    values: np.ndarray  # (nodes, dim); zeros where not reached
    valid: np.ndarray
    stops: list[StopReport] = field(default_factory=list)
    n_steps: int = 0
    n_rejected: int = 0
    dense: list[tuple[float, np.ndarray]] = field(default_factory=list)

    @property
    def blowups(self) -> list[StopReport]:
        return [s for s in self.stops if s.kind == "blowup"]


# Dormand-Prince 5(4) tableau
_C = (0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0)
_A = (
    (),
    (1 / 5,),
    (3 / 40, 9 / 40),
    (44 / 45, -56 / 15, 32 / 9),
    (19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729),
    (9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656),
    (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84),
)
_B5 = (35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0)
_B4 = (5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40)
_E = tuple(b5 - b4 for b5, b4 in zip(_B5, _B4))


def _dopri_step(rhs, x, y, k1, h):
    # states are lists of Python complex: far cheaper than tiny numpy arrays
    ks = [k1]
    n = len(y)
    for s in range(1, 7):
        coef = [(h * a, k) for a, k in zip(_A[s], ks) if a]
        acc = [y[i] + sum(c * k[i] for c, k in coef) for i in range(n)]
        ks.append(rhs(x + _C[s] * h, acc))
    # row 7 of A equals B5, so the last stage input is the new solution (FSAL)
    ecoef = [(h * e, k) for e, k in zip(_E, ks) if e]
    err = [sum(c * k[i] for c, k in ecoef) for i in range(n)]
    return acc, err, ks[6]


def integrate(
    rhs: Callable[[int, float, list], list],
    grid: Grid,
    y0,
    opts: OracleOptions,
    escape: Callable[[list], float] | None = None,
) -> OracleRun:
    """March from the zero node to both ends; ``rhs(cell, x, y)`` on lists of complex."""
    y0 = [complex(v) for v in np.atleast_1d(y0)]
    n = grid.n_nodes
    x_nodes = grid.nodes.tolist()
    out = np.zeros((n, len(y0)), dtype=complex)
    valid = np.zeros(n, bool)
    i0 = grid.zero_index
    out[i0], valid[i0] = y0, True
    run = OracleRun(grid, out, valid)
    h_init = min(opts.max_step, grid.h)
    rtol, atol, dim = opts.rel_tol, opts.abs_tol, len(y0)

    for direction in (1, -1):
        i, y, h = i0, list(y0), h_init
        while 0 <= i + direction < n:
            j = i + direction
            cell = min(i, j)
            f = lambda x, v, cell=cell: rhs(cell, x, v)  # noqa: E731
            x, xt = x_nodes[i], x_nodes[j]
            k1 = f(x, y)
            stopped = None
            while x != xt:
                remaining = abs(xt - x)
                step = min(h, remaining, opts.max_step)
                if step < opts.min_step * max(1.0, abs(x)):
                    stopped = StopReport(direction, float(x), "underflow", i, max(abs(v) for v in y))
                    break
                last = step >= remaining * (1 - 1e-12)
                y_new, err, k_last = _dopri_step(f, x, y, k1, direction * step)
                try:
                    en = math.sqrt(
                        sum(
                            (abs(e) / (atol + rtol * max(abs(a), abs(b)))) ** 2
                            for e, a, b in zip(err, y, y_new)
                        )
                        / dim
                    )
                except OverflowError:
                    en = math.inf
                if not math.isfinite(en):
                    h = step * 0.2
                    run.n_rejected += 1
                    continue
                if en <= 1.0:
                    x = xt if last else x + direction * step
                    y, k1 = y_new, k_last
                    run.n_steps += 1
                    if opts.dense_output:
                        run.dense.append((float(x), np.array(y)))
                    fac = 5.0 if en == 0 else min(5.0, max(0.2, 0.9 * en ** -0.2))
                    h = step * fac if not last else max(h, step * fac)
                    mag = escape(y) if escape else 0.0
                    if mag > opts.escape_radius:
                        stopped = StopReport(direction, float(x), "blowup", i, mag)
                        break
                else:
                    run.n_rejected += 1
                    h = step * max(0.2, 0.9 * en ** -0.2)
            if stopped is not None:
                run.stops.append(stopped)
                break
            out[j], valid[j] = y, True
            i = j
    return run


def _interp(vals: list, x_nodes: np.ndarray, h: float):
    """Linear interpolation of ``vals`` inside cell ``k``."""

    xs = x_nodes.tolist()

    def at(k: int, x: float) -> complex:
        w = (x - xs[k]) / h
        return vals[k] + w * (vals[k + 1] - vals[k])

    return at


# ---------------------------------------------------------------------------
# equation wrappers
# ---------------------------------------------------------------------------


@dataclass
class OracleTrajectory:
    y: GridFunction
    valid: np.ndarray
    run: OracleRun

    @property
    def blowups(self) -> list[StopReport]:
        return self.run.blowups

    @property
    def stops(self) -> list[StopReport]:
        return self.run.stops


def rk_riccati(coeffs: CoeffTriple, y0: complex, opts: OracleOptions = OracleOptions()) -> OracleTrajectory:
    """Integrate ``y' = f y^2 + g y + h`` from ``y(0) = y0``."""
    y0 = complex(y0)
    if not math.isfinite(abs(y0)):
        raise RicsolveError("the oracle needs a finite y0")
    grid = coeffs.grid
    x, h = grid.nodes, grid.h
    F = _interp(coeffs.f.values.tolist(), x, h)
    G = _interp(coeffs.g.values.tolist(), x, h)
    H = _interp(coeffs.h.values.tolist(), x, h)

    def rhs(k, xx, v):
        y = v[0]
        return [(F(k, xx) * y + G(k, xx)) * y + H(k, xx)]

    run = integrate(rhs, grid, [y0], opts, escape=lambda v: abs(v[0]))
    return OracleTrajectory(GridFunction(grid, run.values[:, 0]), run.valid, run)


@dataclass
class OracleLinear:
    y: GridFunction
    y_prime: GridFunction
    valid: np.ndarray
    run: OracleRun

    def __iter__(self):
        return iter((self.y, self.y_prime))


def rk_linear2(
    alpha: GridFunction, beta: GridFunction, y0: complex, yp0: complex, opts: OracleOptions = OracleOptions()
) -> OracleLinear:
    """Integrate ``y'' + alpha y' + beta y = 0`` as a first-order system."""
    grid = same_grid(alpha, beta)
    x, h = grid.nodes, grid.h
    A = _interp(alpha.values.tolist(), x, h)
    B = _interp(beta.values.tolist(), x, h)

    def rhs(k, xx, v):
        return [v[1], -A(k, xx) * v[1] - B(k, xx) * v[0]]

    run = integrate(rhs, grid, [y0, yp0], opts)
    return OracleLinear(GridFunction(grid, run.values[:, 0]), GridFunction(grid, run.values[:, 1]), run.valid, run)


@dataclass
class OracleMatrix:
    path: MatPath
    valid: np.ndarray
    run: OracleRun


def rk_matrix(coeffs: CoeffTriple, opts: OracleOptions = OracleOptions()) -> OracleMatrix:
    """Integrate ``M' = m M``, ``M(0) = I`` entrywise.

    ``a' = g a/2 + h c``, ``b' = g b/2 + h d``, ``c' = -f a - g c/2``, ``d' = -f b - g d/2``.
    """
    grid = coeffs.grid
    x, h = grid.nodes, grid.h
    F = _interp(coeffs.f.values.tolist(), x, h)
    G = _interp(coeffs.g.values.tolist(), x, h)
    H = _interp(coeffs.h.values.tolist(), x, h)

    def rhs(k, xx, v):
        f, g, hh = F(k, xx), G(k, xx), H(k, xx)
        a, b, c, d = v
        return [0.5 * g * a + hh * c, 0.5 * g * b + hh * d, -f * a - 0.5 * g * c, -f * b - 0.5 * g * d]

    run = integrate(rhs, grid, [1, 0, 0, 1], opts)
    arr = run.values.reshape(-1, 2, 2)
    return OracleMatrix(MatPath.from_array(grid, arr), run.valid, run)


# ---------------------------------------------------------------------------
# comparison
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CompareReport:
    """Series-vs-oracle discrepancy for one Riccati solve.

    ``status`` is ``ok``, ``expected-pole`` (the oracle stopped where the
    series trajectory passes through infinity), or ``error``.
    """

    max_chordal_gap: float
    worst_x: float
    compared_nodes: int
    status: str
    stops: tuple[StopReport, ...]
    gap_tol: float

    def to_json(self) -> dict:
        return {
            "max_chordal_gap": self.max_chordal_gap,
            "worst_x": self.worst_x,
            "compared_nodes": self.compared_nodes,
            "status": self.status,
            "gap_tol": self.gap_tol,
            "stops": [
                {"direction": s.direction, "x": s.x, "kind": s.kind, "magnitude": s.magnitude} for s in self.stops
            ],
        }


def _near_pole(traj: SphereTrajectory, x_stop: float, cells: int = 2, chordal_tol: float = 1e-2) -> bool:
    grid = traj.grid
    k = (x_stop - grid.x_lo) / grid.h
    lo, hi = max(0, int(math.floor(k)) - cells), min(grid.n_nodes - 1, int(math.ceil(k)) + cells)
    if any(lo <= i <= hi for i in traj.infinity_nodes):
        return True
    if any(lo <= c <= hi for c in traj.pole_cells):
        return True
    # distance to infinity is 2/sqrt(1+|y|^2) = 2|den|
    return bool(np.min(2 * np.abs(traj.den[lo: hi + 1])) < chordal_tol)


def compare_riccati(
    series: SphereTrajectory, oracle: OracleTrajectory, gap_tol: float = 1e-5
) -> CompareReport:
    grid = series.grid
    if oracle.y.grid != grid:
        raise RicsolveError("series and oracle grids differ")
    mask = oracle.valid
    vals = series.values
    gap = chordal_array(
        np.where(series.is_inf, 0, vals)[mask],
        series.is_inf[mask],
        oracle.y.values[mask],
        np.zeros(mask.sum(), bool),
    )
    k = int(np.argmax(gap)) if gap.size else 0
    worst = float(gap[k]) if gap.size else 0.0
    worst_x = float(grid.nodes[mask][k]) if gap.size else 0.0
    stops = tuple(oracle.stops)
    explained = all(_near_pole(series, s.x) for s in stops)
    if worst > gap_tol or not explained:
        status = "error"
    elif stops:
        status = "expected-pole"
    else:
        status = "ok"
    return CompareReport(worst, worst_x, int(mask.sum()), status, stops, gap_tol)
