"""Homogeneous second-order linear ODEs ``y'' + alpha y' + beta y = 0``.

With ``f = -beta e^{P alpha}`` and ``g = e^{-P alpha}`` the general solution is
``y = y(0) C_{f,g} + y'(0) S_{g,f}``, and its derivative follows from
``C_{f,g}' = g S_{f,g}``, ``S_{g,f}' = g C_{g,f}`` without differencing.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bivexp import BivExpResult, bivexp
from .gridfn import GridFunction, exp_of, fd_derivative, primitive, same_grid


@dataclass(frozen=True)
class LinearBasis:
    """Series data shared by every solution of one equation."""

    f: GridFunction
    g: GridFunction
    fg: BivExpResult
    gf: BivExpResult

    def solution(self, y0: complex, yp0: complex) -> tuple[GridFunction, GridFunction]:
        g = self.g
        y = y0 * self.fg.C + yp0 * self.gf.S
        yp = y0 * (g * self.fg.S) + yp0 * (g * self.gf.C)
        grid = y.grid
        yv, ypv = y.values.copy(), yp.values.copy()
        yv[grid.zero_index], ypv[grid.zero_index] = y0, yp0
        return GridFunction(grid, yv), GridFunction(grid, ypv)

    def wronskian(self) -> GridFunction:
        """``y1 y2' - y1' y2`` for the basis with data ``(1, 0)`` and ``(0, 1)``."""
        y1, y1p = self.solution(1.0, 0.0)
        y2, y2p = self.solution(0.0, 1.0)
        return y1 * y2p - y1p * y2


def linear_basis(alpha: GridFunction, beta: GridFunction, tol: float = 1e-12, rule: str = "cubic") -> LinearBasis:
    same_grid(alpha, beta)
    Pa = primitive(alpha, rule)
    f = -beta * exp_of(Pa)
    g = exp_of(-Pa)
    return LinearBasis(f, g, bivexp(f, g, tol, rule=rule), bivexp(g, f, tol, rule=rule))


def linear_solve(
    alpha: GridFunction,
    beta: GridFunction,
    y0: complex,
    yp0: complex,
    tol: float = 1e-12,
    rule: str = "cubic",
) -> tuple[GridFunction, GridFunction]:
    """Return ``(y, y')`` with ``y(0) = y0``, ``y'(0) = yp0``."""
    return linear_basis(alpha, beta, tol, rule).solution(y0, yp0)


def residual(alpha: GridFunction, beta: GridFunction, y: GridFunction, y_prime: GridFunction) -> GridFunction:
    """``(y')' + alpha y' + beta y`` with the outer derivative by finite differences."""
    same_grid(alpha, beta, y, y_prime)
    return fd_derivative(y_prime) + alpha * y_prime + beta * y


def interior_max(fn: GridFunction) -> float:
    return float(np.max(np.abs(fn.values[1:-1])))
