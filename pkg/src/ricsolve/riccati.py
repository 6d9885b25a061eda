"""Explicit solutions of ``y' = f y^2 + g y + h`` as sphere-valued paths.

The solution from ``y0`` is ``y(x) = phi_{M(x)}(y0)`` with ``M = psi(f, g, h)``.
Trajectories keep homogeneous coordinates ``(num, den)`` so that passing
through infinity is ordinary data rather than an overflow.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import RicsolveError
from .gridfn import Grid, GridFunction, constant, exp_of, primitive, same_grid, write_csv
from .matsol import CoeffTriple, MatPath, solution_matrix_of
from .sphere import INF, POLE_EPS, Mat2, SpherePoint, chordal_homogeneous, mobius_apply, mobius_inverse

__all__ = [
    "CoeffTriple",
    "SphereTrajectory",
    "abel_closed_form",
    "conjugate_coeffs",
    "cross_ratio",
    "riccati_solve",
    "trajectory_from_matrix",
]

# a cell holds a pole crossing when the segment between the normalized
# denominators at its ends passes this close to 0
POLE_CELL_EPS = 1e-8


@dataclass(frozen=True, eq=False)
class SphereTrajectory:
    grid: Grid
    num: np.ndarray
    den: np.ndarray
    y0: SpherePoint
    eps: float = POLE_EPS
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        num = np.asarray(self.num, dtype=complex)
        den = np.asarray(self.den, dtype=complex)
        if num.shape != (self.grid.n_nodes,) or den.shape != num.shape:
            raise RicsolveError("trajectory arrays do not match the grid")
        r = np.sqrt(np.abs(num) ** 2 + np.abs(den) ** 2)
        if np.any(r == 0) or not np.all(np.isfinite(r)):
            raise RicsolveError("degenerate homogeneous coordinates")
        # store normalized so that later arithmetic cannot overflow
        num, den = num / r, den / r
        for arr in (num, den):
            arr.setflags(write=False)
        object.__setattr__(self, "num", num)
        object.__setattr__(self, "den", den)

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def is_inf(self) -> np.ndarray:
        return np.abs(self.den) <= self.eps * (np.abs(self.num) + np.abs(self.den))

    @property
    def infinity_nodes(self) -> list[int]:
        return np.flatnonzero(self.is_inf).tolist()

    @property
    def values(self) -> np.ndarray:
        """Finite values; ``inf`` at nodes on the point at infinity."""
        inf = self.is_inf
        out = np.empty(self.grid.n_nodes, dtype=complex)
        out[inf] = np.inf
        out[~inf] = self.num[~inf] / self.den[~inf]
        return out

    @property
    def points(self) -> list[SpherePoint]:
        return [INF if i else SpherePoint(v) for v, i in zip(self.values, self.is_inf)]

    def __getitem__(self, i: int) -> SpherePoint:
        if self.is_inf[i]:
            return INF
        return SpherePoint(self.num[i] / self.den[i])

    def at(self, x: float) -> SpherePoint:
        return self[self.grid.index_of(x)]

    @property
    def pole_cells(self) -> list[int]:
        """Cells ``[x_k, x_{k+1}]`` whose denominator crosses (close to) zero between finite ends."""
        d0, d1 = self.den[:-1], self.den[1:]
        seg = d1 - d0
        L2 = np.abs(seg) ** 2
        with np.errstate(invalid="ignore", divide="ignore"):
            s = np.clip(np.where(L2 > 0, -np.real(np.conj(seg) * d0) / L2, 0.0), 0.0, 1.0)
        dist = np.abs(d0 + s * seg)
        inf = self.is_inf
        interior = (s > 0) & (s < 1)
        hit = interior & (dist <= POLE_CELL_EPS) & ~inf[:-1] & ~inf[1:]
        return np.flatnonzero(hit).tolist()

    @property
    def classification(self) -> str:
        """``standard`` if the path never reaches infinity on the grid, else ``projective``."""
        return "projective" if (self.infinity_nodes or self.pole_cells) else "standard"

    def chordal_steps(self) -> np.ndarray:
        return chordal_homogeneous(self.num[:-1], self.den[:-1], self.num[1:], self.den[1:])

    @property
    def max_chordal_step(self) -> float:
        return float(np.max(self.chordal_steps())) if self.grid.n_cells else 0.0

    def chordal_gap(self, other: "SphereTrajectory") -> np.ndarray:
        same_grid_traj(self, other)
        return chordal_homogeneous(self.num, self.den, other.num, other.den)

    def transform(self, m: Mat2) -> "SphereTrajectory":
        """Apply the fixed Möbius map ``phi_m`` at every node."""
        num = m.a * self.num + m.b * self.den
        den = m.c * self.num + m.d * self.den
        return SphereTrajectory(self.grid, num, den, mobius_apply(m, self.y0), self.eps)

    def reciprocal(self) -> "SphereTrajectory":
        return self.transform(Mat2(0, 1, 1, 0))

    def diagnostics(self) -> dict:
        y0 = "inf" if self.y0.is_inf else [self.y0.z.real, self.y0.z.imag]
        return {
            "classification": self.classification,
            "y0": y0,
            "infinity_nodes": self.infinity_nodes,
            "pole_cells": self.pole_cells,
            "max_chordal_step": self.max_chordal_step,
            **self.meta,
        }

    def save(self, path) -> None:
        vals = self.values
        inf = self.is_inf
        steps = np.concatenate([[0.0], self.chordal_steps()])
        path = Path(path)
        write_csv(
            path,
            {
                "x": self.x,
                "re": np.where(inf, 0.0, vals.real),
                "im": np.where(inf, 0.0, vals.imag),
                "is_infinity": inf,
                "chordal_step": steps,
            },
        )
        meta = {"grid": self.grid.to_json(), **self.diagnostics()}
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")


def same_grid_traj(*ts: SphereTrajectory) -> Grid:
    grid = ts[0].grid
    for t in ts[1:]:
        if t.grid != grid:
            raise RicsolveError("trajectories live on different grids")
    return grid


def trajectory_from_matrix(mpath: MatPath, y0, eps: float = POLE_EPS, meta: dict | None = None) -> SphereTrajectory:
    y0 = SpherePoint.of(y0)
    p, q = y0.homogeneous()
    a, b, c, d = (e.values for e in (mpath.a, mpath.b, mpath.c, mpath.d))
    num = a * p + b * q
    den = c * p + d * q
    return SphereTrajectory(mpath.grid, num, den, y0, eps, dict(meta or {}))


def riccati_solve(
    coeffs: CoeffTriple,
    y0,
    tol: float = 1e-12,
    *,
    eps: float = POLE_EPS,
    small_f: float = 1e-12,
    **kw,
) -> SphereTrajectory:
    """Solve ``y' = f y^2 + g y + h``, ``y(0) = y0`` on the whole grid.

    Extra keyword arguments go to :func:`~ricsolve.matsol.solution_matrix`.
    The trajectory's ``meta`` records series diagnostics and the fraction of
    nodes where ``|f| <= small_f`` (uniqueness of projective solutions needs
    that set to be negligible).
    """
    M = solution_matrix_of(coeffs, tol, **kw)
    frac = float(np.mean(np.abs(coeffs.f.values) <= small_f))
    meta = {"small_f_fraction": frac, **M.diagnostics()}
    return trajectory_from_matrix(M, y0, eps, meta)


def abel_closed_form(
    f: GridFunction, g: GridFunction, gamma: complex, y0: complex, rule: str = "cubic"
) -> SphereTrajectory:
    """``y = gamma e^{Pg} tan(gamma P(e^{Pg} f) + atan(y0/gamma))``.

    Solves the case ``h = gamma^2 f e^{2Pg}``. When ``y0 = +-i gamma`` the
    arctan sits on its branch point and the solution is ``y0 e^{Pg}``.
    """
    grid = same_grid(f, g)
    gamma, y0 = complex(gamma), complex(y0)
    if gamma == 0:
        raise RicsolveError("gamma must be nonzero")
    eg = exp_of(primitive(g, rule))
    if abs(y0 * y0 + gamma * gamma) <= 1e-14 * abs(gamma) ** 2:
        return SphereTrajectory(grid, y0 * eg.values, np.ones(grid.n_nodes, complex), SpherePoint(y0))
    theta = gamma * primitive(eg * f, rule).values + np.arctan(complex(y0) / gamma)
    if not np.all(np.isfinite(theta)):
        raise RicsolveError(f"arctan(y0/gamma) is singular for y0={y0}, gamma={gamma}")
    num = gamma * eg.values * np.sin(theta)
    den = np.cos(theta)
    i0 = grid.zero_index
    num[i0], den[i0] = y0, 1.0
    return SphereTrajectory(grid, num, den, SpherePoint(y0))


def abel_coeffs(f: GridFunction, g: GridFunction, gamma: complex, rule: str = "cubic") -> CoeffTriple:
    """The triple ``(f, g, gamma^2 f e^{2Pg})``."""
    h = complex(gamma) ** 2 * f * exp_of(2.0 * primitive(g, rule))
    return CoeffTriple(f, g, h)


def cross_ratio(t1: SphereTrajectory, t2: SphereTrajectory, t3: SphereTrajectory, t4: SphereTrajectory) -> GridFunction:
    """Nodewise cross ratio ``(y4-y1)(y2-y3) / ((y4-y3)(y2-y1))``.

    Normalized so that ``(0, 1, inf, z)`` gives ``z``. Points at infinity are
    handled exactly through homogeneous coordinates.
    """
    grid = same_grid_traj(t1, t2, t3, t4)
    ts = (t1, t2, t3, t4)

    def br(i, j):
        return ts[i].num * ts[j].den - ts[j].num * ts[i].den

    pairs = [br(i, j) for i in range(4) for j in range(i + 1, 4)]
    i0 = grid.zero_index
    if min(abs(p[i0]) for p in pairs) <= 1e-14:
        raise RicsolveError("trajectories coincide at x = 0")
    return GridFunction(grid, br(3, 0) * br(1, 2) / (br(3, 2) * br(1, 0)))


def conjugate_coeffs(J: Mat2, coeffs: CoeffTriple) -> CoeffTriple:
    """Coefficients whose generator is ``J m J^{-1}``.

    Solutions transform as ``y2 = phi_J(y1)`` with ``y2(0) = phi_J(y1(0))``.
    """
    Jinv = mobius_inverse(J)
    m2 = J.to_array() @ coeffs.generator() @ Jinv.to_array()
    return CoeffTriple.from_generator(coeffs.grid, m2)


def involution(coeffs: CoeffTriple) -> CoeffTriple:
    """``(f, g, h) -> (-h, -g, -f)``; solutions map to reciprocals."""
    return CoeffTriple(-coeffs.h, -coeffs.g, -coeffs.f)


def constant_coeffs(grid: Grid, f: complex, g: complex, h: complex) -> CoeffTriple:
    return CoeffTriple(constant(f, grid), constant(g, grid), constant(h, grid))
