"""Airy functions, Schrödinger evolution and Miura inversion."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterator, Sequence

import numpy as np

from .errors import RicsolveError
from .gridfn import Grid, GridFunction, constant, fd_array, identity, ones, same_grid, write_csv, zeros
from .linear2 import linear_basis, linear_solve
from .matsol import CoeffTriple, MatPath, solution_matrix_of
from .riccati import SphereTrajectory, trajectory_from_matrix
from .sphere import POLE_EPS

# Gamma(1/3) and Gamma(2/3) to 40 significant digits (mpmath, dps=40);
# tests recompute both independently.
GAMMA_1_3 = 2.678938534707747633655692940974677644129
GAMMA_2_3 = 1.354117939426400416945288028154513785519

AI0 = 1.0 / (3.0 ** (2.0 / 3.0) * GAMMA_2_3)
AIP0 = -1.0 / (3.0 ** (1.0 / 3.0) * GAMMA_1_3)
BI0 = 1.0 / (3.0 ** (1.0 / 6.0) * GAMMA_2_3)
BIP0 = 3.0 ** (1.0 / 6.0) / GAMMA_1_3

# ---------------------------------------------------------------------------
# Airy
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AiryValues:
    x: float
    Ai: complex
    Bi: complex
    u1: complex
    u2: complex
    Ai_prime: complex
    Bi_prime: complex


@dataclass(frozen=True, eq=False)
class AiryTable(Sequence):
    """``u1 = C_{x,1}``, ``u2 = S_{1,x}`` and the standard Ai, Bi built from them."""

    grid: Grid
    u1: np.ndarray
    u2: np.ndarray
    u1p: np.ndarray
    u2p: np.ndarray
    diagnostics: dict = field(default_factory=dict)

    @property
    def Ai(self) -> np.ndarray:
        return AI0 * self.u1 + AIP0 * self.u2

    @property
    def Bi(self) -> np.ndarray:
        return BI0 * self.u1 + BIP0 * self.u2

    @property
    def Ai_prime(self) -> np.ndarray:
        return AI0 * self.u1p + AIP0 * self.u2p

    @property
    def Bi_prime(self) -> np.ndarray:
        return BI0 * self.u1p + BIP0 * self.u2p

    def wronskian(self) -> np.ndarray:
        return self.Ai * self.Bi_prime - self.Ai_prime * self.Bi

    def __len__(self) -> int:
        return self.grid.n_nodes

    def __getitem__(self, i):
        if isinstance(i, slice):
            return [self[k] for k in range(*i.indices(len(self)))]
        return AiryValues(
            float(self.grid.nodes[i]),
            complex(self.Ai[i]),
            complex(self.Bi[i]),
            complex(self.u1[i]),
            complex(self.u2[i]),
            complex(self.Ai_prime[i]),
            complex(self.Bi_prime[i]),
        )

    def __iter__(self) -> Iterator[AiryValues]:
        return (self[i] for i in range(len(self)))

    def at(self, x: float) -> AiryValues:
        return self[self.grid.index_of(x)]

    def save(self, path) -> None:
        write_csv(
            Path(path),
            {
                "x": self.grid.nodes,
                "Ai": self.Ai.real,
                "Bi": self.Bi.real,
                "u1": self.u1.real,
                "u2": self.u2.real,
                "Ai_prime": self.Ai_prime.real,
                "Bi_prime": self.Bi_prime.real,
            },
        )


def airy(grid: Grid, tol: float = 1e-12, rule: str = "cubic") -> AiryTable:
    """Airy functions on ``grid`` from the series solutions of ``u'' = x u``."""
    # alpha = 0, beta = -x  =>  f = x, g = 1
    basis = linear_basis(zeros(grid), -identity(grid), tol, rule)
    u1, u1p = basis.solution(1.0, 0.0)
    u2, u2p = basis.solution(0.0, 1.0)
    diag = {"C_x1": basis.fg.diagnostics(), "S_1x": basis.gf.diagnostics()}
    return AiryTable(grid, u1.values, u2.values, u1p.values, u2p.values, diag)


# ---------------------------------------------------------------------------
# Schrödinger
# ---------------------------------------------------------------------------


def schrodinger_solve(
    q: GridFunction, lam: complex, y0: complex, yp0: complex, tol: float = 1e-12, rule: str = "cubic"
) -> tuple[GridFunction, GridFunction]:
    """``-y'' + q y = lam y``: returns ``(y, y')`` with ``y = y0 C_{q-lam,1} + yp0 S_{1,q-lam}``."""
    return linear_solve(zeros(q.grid), lam - q, y0, yp0, tol, rule)


# ---------------------------------------------------------------------------
# Miura
# ---------------------------------------------------------------------------

# nodes excluded on each side of an infinity crossing when differencing alpha
MIURA_BUFFER = 3


@dataclass(frozen=True, eq=False)
class MiuraResult:
    q: GridFunction
    alpha: SphereTrajectory
    q_reconstructed: GridFunction
    valid: np.ndarray
    singular_scan: list = field(default_factory=list)

    @property
    def classification(self) -> str:
        return self.alpha.classification

    def reconstruction_error(self) -> float:
        """Max ``|alpha^2 + alpha' - q|`` over valid interior nodes."""
        mask = self.valid.copy()
        mask[0] = mask[-1] = False
        if not mask.any():
            return 0.0
        return float(np.max(np.abs(self.q_reconstructed.values - self.q.values)[mask]))

    def save(self, path) -> None:
        a = self.alpha
        inf = a.is_inf
        vals = a.values
        path = Path(path)
        write_csv(
            path,
            {
                "x": a.x,
                "alpha_re": np.where(inf, 0.0, vals.real),
                "alpha_im": np.where(inf, 0.0, vals.imag),
                "is_infinity": inf,
                "q": self.q.real,
                "q_reconstructed": self.q_reconstructed.real,
                "valid": self.valid,
            },
        )
        meta = {
            "grid": a.grid.to_json(),
            **a.diagnostics(),
            "buffer": MIURA_BUFFER,
            "reconstruction_error": self.reconstruction_error(),
            "singular_scan": [[y, c] for y, c in self.singular_scan],
        }
        path.with_suffix(".json").write_text(json.dumps(meta, indent=2) + "\n")


def _require_real(q: GridFunction):
    if np.max(np.abs(q.imag)) > 1e-12:
        raise RicsolveError("Miura inversion needs a real-valued q")


def miura_matrix(q: GridFunction, tol: float = 1e-12, **kw) -> MatPath:
    """``psi(-1, 0, q) = [[C_{1,q}, S_{q,1}], [S_{1,q}, C_{q,1}]]``."""
    _require_real(q)
    return solution_matrix_of(CoeffTriple(constant(-1.0, q.grid), zeros(q.grid), q), tol, **kw)


def miura_valid_mask(alpha: SphereTrajectory, buffer: int = MIURA_BUFFER) -> np.ndarray:
    n = alpha.grid.n_nodes
    bad = np.zeros(n, bool)
    for i in alpha.infinity_nodes:
        bad[max(0, i - buffer): i + buffer + 1] = True
    for k in alpha.pole_cells:
        bad[max(0, k - buffer + 1): k + buffer + 1] = True
    return ~bad


def miura_invert(q: GridFunction, y0: float, tol: float = 1e-12, *, mpath: MatPath | None = None) -> MiuraResult:
    """Solve ``alpha^2 + alpha' = q`` with ``alpha(0) = y0`` via ``y' = q - y^2``.

    ``q_reconstructed`` is ``alpha^2 + fd(alpha)`` on nodes away from infinity
    crossings (see ``valid``); excluded nodes hold 0.
    """
    _require_real(q)
    if abs(complex(y0).imag) > 0:
        raise RicsolveError("y0 must be real")
    M = mpath if mpath is not None else miura_matrix(q, tol)
    alpha = trajectory_from_matrix(M, float(complex(y0).real), POLE_EPS, M.diagnostics())
    valid = miura_valid_mask(alpha)
    # the buffer is wider than the stencil, so placeholder zeros never reach a valid node
    vals = np.where(alpha.is_inf, 0.0, alpha.values)
    recon = np.where(valid, vals**2 + fd_array(vals, q.grid.h), 0.0)
    return MiuraResult(q, alpha, GridFunction(q.grid, recon), valid)


@dataclass(frozen=True)
class MiuraScan:
    entries: list[tuple[float, str]]
    contiguous: bool
    endpoints: tuple[float | None, float | None] = (None, None)

    @property
    def standard(self) -> list[float]:
        return [y for y, c in self.entries if c == "standard"]


def _classify(M: MatPath, y0: float) -> str:
    return trajectory_from_matrix(M, float(y0)).classification


def miura_singular_scan(
    q: GridFunction,
    y0_samples: Sequence[float],
    tol: float = 1e-12,
    *,
    refine_steps: int = 20,
    mpath: MatPath | None = None,
) -> MiuraScan:
    """Classify each initial value and check that the standard ones are contiguous.

    With ``refine_steps > 0`` each boundary between a standard and a
    projective sample is bisected that many times; ``endpoints`` holds the
    refined left/right ends of the standard block (``None`` when the block
    reaches the end of the sample range).
    """
    M = mpath if mpath is not None else miura_matrix(q, tol)
    ys = sorted(float(y) for y in y0_samples)
    entries = [(y, _classify(M, y)) for y in ys]
    flags = [c == "standard" for _, c in entries]
    idx = [i for i, s in enumerate(flags) if s]
    contiguous = not idx or all(flags[idx[0]: idx[-1] + 1])
    left = right = None
    if idx and contiguous and refine_steps > 0:
        if idx[0] > 0:
            left = _bisect(M, ys[idx[0] - 1], ys[idx[0]], refine_steps)
        if idx[-1] < len(ys) - 1:
            right = _bisect(M, ys[idx[-1]], ys[idx[-1] + 1], refine_steps)
    return MiuraScan(entries, contiguous, (left, right))


def _bisect(M: MatPath, a: float, b: float, steps: int) -> float:
    ca = _classify(M, a)
    for _ in range(steps):
        mid = 0.5 * (a + b)
        if _classify(M, mid) == ca:
            a = mid
        else:
            b = mid
    return 0.5 * (a + b)
