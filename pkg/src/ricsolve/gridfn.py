"""Complex functions sampled on a uniform grid that has 0 as a node.

The primitive operator ``P`` (cumulative integral anchored at 0) and a
second-order finite-difference derivative live here; every series
construction in the package is built from these two operations.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Callable, Union

import numpy as np

from .errors import GridError, GridMismatchError, NonFiniteError, RicsolveError

Scalar = Union[int, float, complex]

# relative slack when checking that x_lo is an integer multiple of h
_NODE_SLACK = 1e-9


@dataclass(frozen=True)
class Grid:
    """Uniform grid on ``[x_lo, x_hi]`` with ``n_cells`` cells and 0 as a node."""

    x_lo: float
    x_hi: float
    n_cells: int

    def __post_init__(self):
        if int(self.n_cells) != self.n_cells or self.n_cells < 1:
            raise GridError(f"n_cells must be a positive integer, got {self.n_cells!r}")
        if not (math.isfinite(self.x_lo) and math.isfinite(self.x_hi)):
            raise GridError("grid bounds must be finite")
        if not self.x_lo < self.x_hi:
            raise GridError(f"need x_lo < x_hi, got [{self.x_lo}, {self.x_hi}]")
        if self.x_lo > 0 or self.x_hi < 0:
            raise GridError(f"interval [{self.x_lo}, {self.x_hi}] does not contain 0")
        k = -self.x_lo / self.h
        if abs(k - round(k)) > _NODE_SLACK * max(1.0, abs(k)):
            raise GridError(
                f"0 is not a node of [{self.x_lo}, {self.x_hi}] with {self.n_cells} cells "
                f"(x_lo/h = {-k:.6g})"
            )

    @property
    def h(self) -> float:
        return (self.x_hi - self.x_lo) / self.n_cells

    @property
    def n_nodes(self) -> int:
        return self.n_cells + 1

    @cached_property
    def zero_index(self) -> int:
        return int(round(-self.x_lo / self.h))

    @cached_property
    def nodes(self) -> np.ndarray:
        # built from the zero index so that node zero_index is exactly 0.0
        x = (np.arange(self.n_nodes) - self.zero_index) * self.h
        x[0], x[-1] = self.x_lo, self.x_hi
        x.setflags(write=False)
        return x

    def index_of(self, x: float) -> int:
        """Index of the node at ``x``; raises if ``x`` is not (close to) a node."""
        k = (x - self.x_lo) / self.h
        i = int(round(k))
        if not 0 <= i < self.n_nodes or abs(k - i) > 1e-6:
            raise GridError(f"x={x} is not a node of {self}")
        return i

    @classmethod
    def adjusted(cls, x_lo: float, x_hi: float, n_cells: int, max_cells: int | None = None) -> "Grid":
        """Smallest grid with at least ``n_cells`` cells on which 0 is a node."""
        if n_cells < 1:
            raise GridError(f"n_cells must be a positive integer, got {n_cells}")
        limit = max_cells or max(10 * n_cells, n_cells + 100_000)
        for n in range(n_cells, limit + 1):
            try:
                return cls(x_lo, x_hi, n)
            except GridError as exc:
                if "not a node" not in str(exc):
                    raise
        raise GridError(
            f"no cell count in [{n_cells}, {limit}] puts 0 on a node of [{x_lo}, {x_hi}]"
        )

    def to_json(self) -> dict:
        return {"x_lo": self.x_lo, "x_hi": self.x_hi, "n_cells": self.n_cells}


def _as_values(values, n: int) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.ndim == 0:
        arr = np.full(n, arr, dtype=complex)
    if arr.shape != (n,):
        raise GridError(f"expected {n} values, got shape {arr.shape}")
    bad = np.flatnonzero(~np.isfinite(arr))
    if bad.size:
        raise NonFiniteError(f"non-finite value at node index {bad[0]}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.values, self.grid.n_nodes))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    def at(self, x: float) -> complex:
        return complex(self.values[self.grid.index_of(x)])

    @property
    def real(self) -> np.ndarray:
        return self.values.real

    @property
    def imag(self) -> np.ndarray:
        return self.values.imag

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.values)))

    def _other(self, other) -> np.ndarray | Scalar:
        if isinstance(other, GridFunction):
            _check_same_grid(self, other)
            return other.values
        if isinstance(other, (int, float, complex, np.number)):
            return other
        return NotImplemented

    def __add__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GridFunction(self.grid, self.values + o)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GridFunction(self.grid, self.values - o)

    def __rsub__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GridFunction(self.grid, o - self.values)

    def __mul__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GridFunction(self.grid, self.values * o)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        return NotImplemented if o is NotImplemented else GridFunction(self.grid, self.values / o)

    def __neg__(self):
        return GridFunction(self.grid, -self.values)

    def __pow__(self, k: int):
        return GridFunction(self.grid, self.values**k)


def _check_same_grid(*fns: GridFunction) -> Grid:
    grid = fns[0].grid
    for fn in fns[1:]:
        if fn.grid != grid:
            raise GridMismatchError(f"grid mismatch: {grid} vs {fn.grid}")
    return grid


def same_grid(*fns: GridFunction) -> Grid:
    """Return the common grid of ``fns`` or raise :class:`GridMismatchError`."""
    return _check_same_grid(*fns)


def sample(expr: Callable, grid: Grid) -> GridFunction:
    """Evaluate ``expr`` at every node.

    ``expr`` is called once on the node array; scalar results are broadcast.
    Functions that only accept scalars fall back to per-node evaluation.
    """
    x = grid.nodes
    try:
        vals = np.asarray(expr(x), dtype=complex)
        if vals.ndim == 0:
            vals = np.full(grid.n_nodes, vals, dtype=complex)
    except (TypeError, ValueError):
        vals = np.array([complex(expr(float(xi))) for xi in x])
    bad = np.flatnonzero(~np.isfinite(vals))
    if bad.size:
        i = bad[0]
        raise NonFiniteError(f"expression is not finite at node {i} (x={x[i]:.6g})")
    return GridFunction(grid, vals)


def constant(c: Scalar, grid: Grid) -> GridFunction:
    return GridFunction(grid, np.full(grid.n_nodes, c, dtype=complex))


def zeros(grid: Grid) -> GridFunction:
    return constant(0.0, grid)


def ones(grid: Grid) -> GridFunction:
    return constant(1.0, grid)


def identity(grid: Grid) -> GridFunction:
    return GridFunction(grid, grid.nodes)


# -- quadrature ----------------------------------------------------------------


def cell_integrals(v: np.ndarray, h: float, rule: str = "cubic") -> np.ndarray:
    """Integral of the sampled data over each cell.

    ``cubic``: integrate the cubic through the four nearest nodes (one-sided
    at the two end cells); fourth order. ``trapezoid``: second order.
    Grids with fewer than 3 cells always use the trapezoid.
    """
    if rule not in ("cubic", "trapezoid"):
        raise RicsolveError(f"unknown quadrature rule {rule!r}")
    n = v.shape[0] - 1
    if rule == "trapezoid" or n < 3:
        return 0.5 * h * (v[:-1] + v[1:])
    out = np.empty(n, dtype=np.result_type(v, float))
    out[1:-1] = (h / 24.0) * (13.0 * (v[1:-2] + v[2:-1]) - (v[:-3] + v[3:]))
    out[0] = (h / 24.0) * (9.0 * v[0] + 19.0 * v[1] - 5.0 * v[2] + v[3])
    out[-1] = (h / 24.0) * (v[-4] - 5.0 * v[-3] + 19.0 * v[-2] + 9.0 * v[-1])
    return out


def cumulative_from_zero(v: np.ndarray, grid: Grid, rule: str = "cubic") -> np.ndarray:
    """Oriented integral from 0 to each node of sampled data ``v``."""
    cells = cell_integrals(v, grid.h, rule)
    i0 = grid.zero_index
    out = np.zeros(grid.n_nodes, dtype=cells.dtype)
    out[i0 + 1:] = np.cumsum(cells[i0:])
    # left of zero: -(integral from x to 0)
    out[:i0] = -np.cumsum(cells[:i0][::-1])[::-1]
    return out


def primitive(f: GridFunction, rule: str = "cubic") -> GridFunction:
    """``Pf(x) = int_0^x f``, exactly 0 at the zero node."""
    return GridFunction(f.grid, cumulative_from_zero(f.values, f.grid, rule))


def fd_derivative(f: GridFunction) -> GridFunction:
    """Second-order finite differences: central inside, one-sided at the ends."""
    return GridFunction(f.grid, fd_array(f.values, f.grid.h))


def fd_array(v: np.ndarray, h: float) -> np.ndarray:
    if v.shape[0] < 3:
        raise GridError("finite differences need at least 3 nodes")
    d = np.empty_like(v, dtype=np.result_type(v, float))
    d[1:-1] = (v[2:] - v[:-2]) / (2.0 * h)
    d[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * h)
    d[-1] = (3.0 * v[-1] - 4.0 * v[-2] + v[-3]) / (2.0 * h)
    return d


# -- pointwise ops ---------------------------------------------------------------


def add(a: GridFunction, b: GridFunction) -> GridFunction:
    return a + b


def mul(a: GridFunction, b: GridFunction) -> GridFunction:
    return a * b


def scale(a: GridFunction, c: Scalar) -> GridFunction:
    return a * c


def negate(a: GridFunction) -> GridFunction:
    return -a


def abs_of(a: GridFunction) -> GridFunction:
    return GridFunction(a.grid, np.abs(a.values))


def exp_of(a: GridFunction) -> GridFunction:
    return GridFunction(a.grid, np.exp(a.values))


# -- serialization ---------------------------------------------------------------


def write_csv(dest, columns: dict[str, np.ndarray]) -> None:
    """Write named columns to a path or open text stream.

    Floats use ``repr`` so the round trip is exact.
    """
    if hasattr(dest, "write"):
        _write_rows(dest, columns)
        return
    with open(dest, "w", newline="") as fh:
        _write_rows(fh, columns)


def _write_rows(fh, columns):
    names = list(columns)
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(names)
    for row in zip(*(np.asarray(columns[k]) for k in names)):
        w.writerow([_fmt(v) for v in row])


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return repr(float(v))


def save(fn: GridFunction, path) -> None:
    """CSV (x, re, im) plus a JSON sidecar holding the grid."""
    path = Path(path)
    write_csv(path, {"x": fn.x, "re": fn.real, "im": fn.imag})
    path.with_suffix(".json").write_text(json.dumps(fn.grid.to_json(), indent=2) + "\n")


def load(path, grid: Grid | None = None) -> GridFunction:
    """Read a CSV written by :func:`save`.

    The grid comes from ``grid`` if given, else the JSON sidecar, else is
    inferred from the ``x`` column.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise GridError(f"{path}: no data rows")
    x = np.array([float(r["x"]) for r in rows])
    vals = np.array([complex(float(r["re"]), float(r.get("im") or 0.0)) for r in rows])
    if grid is None:
        side = path.with_suffix(".json")
        if side.exists():
            meta = json.loads(side.read_text())
            grid = Grid(float(meta["x_lo"]), float(meta["x_hi"]), int(meta["n_cells"]))
        else:
            grid = Grid(float(x[0]), float(x[-1]), len(x) - 1)
    if len(x) != grid.n_nodes or not np.allclose(x, grid.nodes, atol=1e-9 * max(1.0, grid.h)):
        raise GridMismatchError(f"{path}: x column does not match {grid}")
    return GridFunction(grid, vals)
