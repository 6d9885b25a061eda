"""Solution matrix ``M = psi(f, g, h)`` of ``M' = m M``, ``M(0) = I``.

With ``m = [[g/2, h], [-f, -g/2]]``, ``F = -e^{Pg} f`` and ``H = e^{-Pg} h``::

    M = [[e^{Pg/2} C_{F,H},  e^{Pg/2} S_{H,F}],
         [e^{-Pg/2} S_{F,H}, e^{-Pg/2} C_{H,F}]]

Also: the trace lift to arbitrary coefficient matrices and the inverse map
from a matrix path back to the Riccati coefficients.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .bivexp import BivExpResult, bivexp
from .errors import DeterminantError
from .gridfn import Grid, GridFunction, exp_of, fd_derivative, primitive, same_grid, write_csv
from .sphere import Mat2


@dataclass(frozen=True)
class CoeffTriple:
    """Coefficients of ``y' = f y^2 + g y + h``."""

    f: GridFunction
    g: GridFunction
    h: GridFunction

    def __post_init__(self):
        same_grid(self.f, self.g, self.h)

    @property
    def grid(self) -> Grid:
        return self.f.grid

    def generator(self) -> np.ndarray:
        """Nodewise ``m(x) = [[g/2, h], [-f, -g/2]]``, shape ``(n, 2, 2)``."""
        m = np.empty((self.grid.n_nodes, 2, 2), dtype=complex)
        m[:, 0, 0] = 0.5 * self.g.values
        m[:, 0, 1] = self.h.values
        m[:, 1, 0] = -self.f.values
        m[:, 1, 1] = -0.5 * self.g.values
        return m

    @classmethod
    def from_generator(cls, grid: Grid, m: np.ndarray) -> "CoeffTriple":
        """Read ``(f, g, h)`` off traceless matrices ``m``."""
        return cls(
            GridFunction(grid, -m[:, 1, 0]),
            GridFunction(grid, m[:, 0, 0] - m[:, 1, 1]),
            GridFunction(grid, m[:, 0, 1]),
        )


# smallest default det_tol; quadrature error dominates below this on typical grids
DET_FLOOR = 1e-8
# multiple of eps * (|ad| + |bc|) tolerated as cancellation error in det
DET_ROUNDING = 64


@dataclass(frozen=True)
class MatPath:
    """Grid-indexed 2x2 matrix path stored as four entry functions."""

    grid: Grid
    a: GridFunction
    b: GridFunction
    c: GridFunction
    d: GridFunction
    det_tol: float | None = None
    series: tuple[BivExpResult, ...] = field(default=(), repr=False)

    def det(self) -> GridFunction:
        return self.a * self.d - self.b * self.c

    def det_residual(self) -> np.ndarray:
        return np.abs(self.det().values - 1.0)

    def det_allowance(self, det_tol: float) -> np.ndarray:
        """Nodewise bound on ``|det - 1|``: ``det_tol`` plus the rounding floor of ``ad - bc``."""
        mag = np.abs(self.a.values * self.d.values) + np.abs(self.b.values * self.c.values)
        return det_tol + DET_ROUNDING * np.finfo(float).eps * mag

    def __getitem__(self, i: int) -> Mat2:
        return Mat2(*(complex(e.values[i]) for e in (self.a, self.b, self.c, self.d)))

    def as_array(self) -> np.ndarray:
        """Shape ``(n, 2, 2)``."""
        return np.stack(
            [np.stack([self.a.values, self.b.values], -1), np.stack([self.c.values, self.d.values], -1)],
            -2,
        )

    @classmethod
    def from_array(cls, grid: Grid, arr: np.ndarray, det_tol: float | None = None) -> "MatPath":
        return cls(
            grid,
            GridFunction(grid, arr[:, 0, 0]),
            GridFunction(grid, arr[:, 0, 1]),
            GridFunction(grid, arr[:, 1, 0]),
            GridFunction(grid, arr[:, 1, 1]),
            det_tol,
        )

    def diagnostics(self) -> dict:
        out = {"det_max_residual": float(np.max(self.det_residual())), "det_tol": self.det_tol}
        if self.series:
            out["series"] = [r.diagnostics() for r in self.series]
        return out

    def save(self, path) -> None:
        cols = {"x": self.grid.nodes}
        for name in "abcd":
            v = getattr(self, name).values
            cols[f"{name}_re"], cols[f"{name}_im"] = v.real, v.imag
        cols["det_residual"] = self.det_residual()
        path = Path(path)
        write_csv(path, cols)
        meta = {"grid": self.grid.to_json(), **self.diagnostics()}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")


def solution_matrix(
    f: GridFunction,
    g: GridFunction,
    h: GridFunction,
    tol: float = 1e-12,
    *,
    det_tol: float | None = None,
    check: bool = True,
    rule: str = "cubic",
) -> MatPath:
    """``psi(f, g, h)``. Raises :class:`DeterminantError` if ``det M`` drifts past ``det_tol``.

    ``det_tol`` defaults to ``max(100 * tol, 1e-8)``: below the floor the
    quadrature error of the grid, not the series tail, sets the drift. Where the entries are large the
    check also allows the rounding error of ``ad - bc`` itself, which no
    series tolerance can remove.
    """
    grid = same_grid(f, g, h)
    Pg = primitive(g, rule)
    F = -exp_of(Pg) * f
    H = exp_of(-Pg) * h
    fh = bivexp(F, H, tol, rule=rule)
    hf = bivexp(H, F, tol, rule=rule)
    up, down = exp_of(0.5 * Pg), exp_of(-0.5 * Pg)
    det_tol = max(100.0 * tol, DET_FLOOR) if det_tol is None else det_tol
    M = MatPath(grid, up * fh.C, up * hf.S, down * fh.S, down * hf.C, det_tol, (fh, hf))
    if check:
        res = M.det_residual()
        k = int(np.argmax(res / M.det_allowance(det_tol)))
        if res[k] > M.det_allowance(det_tol)[k]:
            raise DeterminantError(float(res[k]), float(grid.nodes[k]), det_tol)
    return M


def solution_matrix_of(coeffs: CoeffTriple, tol: float = 1e-12, **kw) -> MatPath:
    return solution_matrix(coeffs.f, coeffs.g, coeffs.h, tol, **kw)


def ode_residual(mpath: MatPath, coeffs: CoeffTriple) -> np.ndarray:
    """``|fd(M) - m M|`` per node and entry, shape ``(n, 2, 2)``; interior rows are meaningful."""
    same_grid(mpath.a, coeffs.f)
    M = mpath.as_array()
    dM = np.stack(
        [
            np.stack([fd_derivative(mpath.a).values, fd_derivative(mpath.b).values], -1),
            np.stack([fd_derivative(mpath.c).values, fd_derivative(mpath.d).values], -1),
        ],
        -2,
    )
    return np.abs(dM - coeffs.generator() @ M)


def trace_lift(mpath: MatPath, trace: GridFunction, rule: str = "cubic") -> MatPath:
    """``N = e^{P(trace)/2} M``, solving ``N' = (m + trace/2 I) N``.

    ``det N = e^{P trace}``, so the result carries no determinant tolerance.
    """
    same_grid(mpath.a, trace)
    k = exp_of(0.5 * primitive(trace, rule))
    return MatPath(mpath.grid, k * mpath.a, k * mpath.b, k * mpath.c, k * mpath.d, None)


def solve_general(n: np.ndarray, grid: Grid, tol: float = 1e-12, rule: str = "cubic") -> MatPath:
    """Solve ``N' = n N``, ``N(0) = I`` for arbitrary nodewise ``n`` of shape ``(nodes, 2, 2)``.

    Splits off the trace, solves the traceless part with :func:`solution_matrix`
    and lifts back.
    """
    n = np.broadcast_to(np.asarray(n, dtype=complex), (grid.n_nodes, 2, 2))
    tr = n[:, 0, 0] + n[:, 1, 1]
    m = n - 0.5 * tr[:, None, None] * np.eye(2)
    coeffs = CoeffTriple.from_generator(grid, m)
    M = solution_matrix_of(coeffs, tol, rule=rule)
    return trace_lift(M, GridFunction(grid, tr), rule)


def coeffs_from_matrix(mpath: MatPath) -> CoeffTriple:
    """Recover ``(f, g, h)`` from ``M`` via finite differences.

    ``f = c d' - c' d``, ``g = 2 (a' d - b' c)``, ``h = a b' - a' b``.
    """
    a, b, c, d = mpath.a, mpath.b, mpath.c, mpath.d
    da, db, dc, dd = (fd_derivative(e) for e in (a, b, c, d))
    return CoeffTriple(c * dd - dc * d, 2.0 * (da * d - db * c), a * db - da * b)
