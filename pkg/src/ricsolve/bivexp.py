"""Bivariate exponential ``E_{f,g}`` and its even/odd parts ``C``, ``S``.

``E_{f,g} = 1 + sum_j A_j`` where ``A_j`` is the iterated integral over the
simplex ``0 < s_1 < ... < s_j < x`` of ``f(s_1) g(s_2) f(s_3) ...``. The
ladder is computed by the recurrence ``A_j = P(B_j)`` with ``B_j = f A_{j-1}``
for odd ``j`` and ``g A_{j-1}`` for even ``j``; the oriented primitive takes
care of the sign for ``x < 0``.

``C`` collects the even terms and ``S`` the odd ones, so
``C' = g S`` and ``S' = f C``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import RicsolveError, SeriesCapError
from .gridfn import GridFunction, cumulative_from_zero, same_grid

DEFAULT_CAP = 400


@dataclass(frozen=True)
class BivExpResult:
    E: GridFunction
    C: GridFunction
    S: GridFunction
    terms_used: int
    tail_bound: float
    t: float
    # E_{-f,-g}; equals C - S, or the second sign run in two-run mode
    E_neg: GridFunction | None = None

    def diagnostics(self) -> dict:
        return {"terms_used": self.terms_used, "tail_bound": self.tail_bound, "t": self.t}


def tail_bound(t: float, J: int) -> float:
    """``e^t t^(J+1) / (J+1)!``: bound on ``sum_{j>J} t^j/j!``."""
    if t == 0.0:
        return 0.0
    return math.exp(t + (J + 1) * math.log(t) - math.lgamma(J + 2))


def truncation_order(t: float, tol: float, cap: int = DEFAULT_CAP) -> tuple[int, float]:
    """Smallest ``J >= 1`` whose tail bound is below ``tol``."""
    if not tol > 0:
        raise RicsolveError(f"tol must be positive, got {tol}")
    if t == 0.0:
        return 1, 0.0
    log_tol = math.log(tol)
    for J in range(1, cap + 1):
        lt = t + (J + 1) * math.log(t) - math.lgamma(J + 2)
        if lt < log_tol:
            return J, math.exp(lt)
    raise SeriesCapError(t, cap, tol)


def majorant(f: GridFunction, g: GridFunction, rule: str = "cubic") -> float:
    """``max_x |P(|f|+|g|)(x)|`` over the grid."""
    grid = same_grid(f, g)
    w = np.abs(f.values) + np.abs(g.values)
    return float(np.max(np.abs(cumulative_from_zero(w, grid, rule))))


def _ladder(fv: np.ndarray, gv: np.ndarray, grid, J: int, rule: str):
    A = np.ones(grid.n_nodes, dtype=complex)
    for j in range(1, J + 1):
        A = cumulative_from_zero((fv if j % 2 else gv) * A, grid, rule)
        yield A


def series_terms(f: GridFunction, g: GridFunction, J: int, rule: str = "cubic") -> list[GridFunction]:
    """The terms ``A_1 .. A_J`` as grid functions."""
    grid = same_grid(f, g)
    if J < 1:
        raise RicsolveError(f"J must be >= 1, got {J}")
    return [GridFunction(grid, A) for A in _ladder(f.values, g.values, grid, J, rule)]


class _Neumaier:
    """Compensated nodewise summation on complex arrays (real/imag handled separately)."""

    def __init__(self, start: np.ndarray):
        self.s = np.array(start, dtype=complex).view(float)
        self.c = np.zeros_like(self.s)

    def add(self, term: np.ndarray):
        a = np.ascontiguousarray(term, dtype=complex).view(float)
        s = self.s
        t = s + a
        big = np.abs(s) >= np.abs(a)
        self.c += np.where(big, (s - t) + a, (a - t) + s)
        self.s = t

    def value(self) -> np.ndarray:
        return (self.s + self.c).view(complex)


def _parity_sums(fv, gv, grid, J, rule):
    even = _Neumaier(np.ones(grid.n_nodes, dtype=complex))
    odd = _Neumaier(np.zeros(grid.n_nodes, dtype=complex))
    for j, A in enumerate(_ladder(fv, gv, grid, J, rule), start=1):
        (odd if j % 2 else even).add(A)
    return even.value(), odd.value()


def bivexp(
    f: GridFunction,
    g: GridFunction,
    tol: float = 1e-12,
    *,
    cap: int = DEFAULT_CAP,
    mode: str = "parity",
    rule: str = "cubic",
) -> BivExpResult:
    """Truncated ``E_{f,g}``, ``C_{f,g}``, ``S_{f,g}`` with a certified tail.

    ``J`` is chosen from ``t = max|P(|f|+|g|)|`` so that the remainder of the
    series is below ``tol`` at every node (up to quadrature error).

    ``mode="parity"`` sums even terms into ``C`` and odd terms into ``S``.
    ``mode="two-run"`` evaluates ``E_{f,g}`` and ``E_{-f,-g}`` separately and
    forms ``C, S`` as their half-sum and half-difference; it exists as a
    cross-check.
    """
    grid = same_grid(f, g)
    if not tol > 0:
        raise RicsolveError(f"tol must be positive, got {tol}")
    t = majorant(f, g, rule)
    J, tail = truncation_order(t, tol, cap)
    fv, gv = f.values, g.values
    if mode == "parity":
        C, S = _parity_sums(fv, gv, grid, J, rule)
        E, E_neg = C + S, C - S
    elif mode == "two-run":
        Cp, Sp = _parity_sums(fv, gv, grid, J, rule)
        Cm, Sm = _parity_sums(-fv, -gv, grid, J, rule)
        E, E_neg = Cp + Sp, Cm + Sm
        C, S = 0.5 * (E + E_neg), 0.5 * (E - E_neg)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    i0 = grid.zero_index
    # exact at the anchor regardless of rounding in the sums
    E[i0], C[i0], S[i0], E_neg[i0] = 1.0, 1.0, 0.0, 1.0
    return BivExpResult(
        E=GridFunction(grid, E),
        C=GridFunction(grid, C),
        S=GridFunction(grid, S),
        terms_used=J,
        tail_bound=tail,
        t=t,
        E_neg=GridFunction(grid, E_neg),
    )


def parity_split(result: BivExpResult) -> tuple[GridFunction, GridFunction]:
    """``C = (E_{f,g} + E_{-f,-g})/2``, ``S = (E_{f,g} - E_{-f,-g})/2``."""
    if result.E_neg is None:
        raise RicsolveError("result does not carry E_{-f,-g}")
    E, En = result.E, result.E_neg
    return 0.5 * (E + En), 0.5 * (E - En)
