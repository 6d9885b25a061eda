"""Riemann-sphere geometry: Möbius maps, stereographic embedding, chordal metric.

Points of the sphere are :class:`SpherePoint` values. Array routines carry
a point either as ``(value, is_inf)`` pairs or in homogeneous coordinates
``(num, den)`` with ``z = num/den``.
"""
from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import RicsolveError, SingularMatrixError
from .gridfn import write_csv

# relative threshold deciding that a denominator vanishes
POLE_EPS = 1e-13


@dataclass(frozen=True)
class SpherePoint:
    """A finite complex number or the point at infinity."""

    z: complex = 0j
    is_inf: bool = False

    def __post_init__(self):
        if self.is_inf:
            object.__setattr__(self, "z", 0j)
        else:
            z = complex(self.z)
            if not cmath.isfinite(z):
                raise RicsolveError("use SpherePoint.inf() for the point at infinity")
            object.__setattr__(self, "z", z)

    @classmethod
    def inf(cls) -> "SpherePoint":
        return cls(0j, True)

    @classmethod
    def of(cls, v) -> "SpherePoint":
        """Coerce a number, ``None``/complex infinity, or a SpherePoint."""
        if isinstance(v, SpherePoint):
            return v
        if v is None:
            return cls.inf()
        v = complex(v)
        if cmath.isinf(v):
            return cls.inf()
        return cls(v)

    def homogeneous(self) -> tuple[complex, complex]:
        return (1 + 0j, 0j) if self.is_inf else (self.z, 1 + 0j)

    def __repr__(self):
        return "SpherePoint(inf)" if self.is_inf else f"SpherePoint({self.z!r})"


INF = SpherePoint.inf()


@dataclass(frozen=True)
class EmbeddedPoint:
    x1: float
    x2: float
    x3: float

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.x1, self.x2, self.x3)


@dataclass(frozen=True)
class Mat2:
    """2x2 complex matrix ``[[a, b], [c, d]]``."""

    a: complex
    b: complex
    c: complex
    d: complex

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    @classmethod
    def identity(cls) -> "Mat2":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_array(cls, m) -> "Mat2":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    def to_array(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]], dtype=complex)

    def __matmul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __mul__(self, k) -> "Mat2":
        return Mat2(self.a * k, self.b * k, self.c * k, self.d * k)

    __rmul__ = __mul__


def _is_singular(m: Mat2) -> bool:
    scale = abs(m.a * m.d) + abs(m.b * m.c)
    return scale == 0 or abs(m.det) <= 1e-14 * scale


def _require_invertible(m: Mat2):
    if _is_singular(m):
        raise SingularMatrixError(f"matrix is singular (det={m.det})")


# -- embedding and metric -----------------------------------------------------


def stereographic(p) -> EmbeddedPoint:
    p = SpherePoint.of(p)
    if p.is_inf:
        return EmbeddedPoint(0.0, 0.0, 1.0)
    z = p.z
    r2 = abs(z) ** 2
    if r2 > 1e300:
        return EmbeddedPoint(0.0, 0.0, 1.0)
    k = 1.0 / (r2 + 1.0)
    return EmbeddedPoint(2 * z.real * k, 2 * z.imag * k, (r2 - 1.0) * k)


def stereographic_array(values: np.ndarray, is_inf: np.ndarray | None = None) -> np.ndarray:
    """Embed an array of points; rows are ``(x1, x2, x3)``."""
    z = np.asarray(values, dtype=complex)
    inf = np.zeros(z.shape, bool) if is_inf is None else np.asarray(is_inf, bool)
    inf = inf | ~np.isfinite(z)
    z = np.where(inf, 0, z)
    r2 = np.abs(z) ** 2
    k = 1.0 / (r2 + 1.0)
    out = np.stack([2 * z.real * k, 2 * z.imag * k, (r2 - 1.0) * k], axis=-1)
    out[inf] = (0.0, 0.0, 1.0)
    return out


def chordal_distance(p, q) -> float:
    """Chordal distance ``|S(p) - S(q)|``, at most 2."""
    p, q = SpherePoint.of(p), SpherePoint.of(q)
    if p.is_inf and q.is_inf:
        return 0.0
    if p.is_inf or q.is_inf:
        z = q.z if p.is_inf else p.z
        return 2.0 / math.sqrt(1.0 + abs(z) ** 2)
    return 2.0 * abs(p.z - q.z) / math.sqrt((1.0 + abs(p.z) ** 2) * (1.0 + abs(q.z) ** 2))


def chordal_homogeneous(n1, d1, n2, d2) -> np.ndarray:
    """Chordal distance between points given as ``num/den`` pairs (arrays)."""
    n1, d1, n2, d2 = (np.asarray(v, dtype=complex) for v in (n1, d1, n2, d2))
    r1 = np.sqrt(np.abs(n1) ** 2 + np.abs(d1) ** 2)
    r2 = np.sqrt(np.abs(n2) ** 2 + np.abs(d2) ** 2)
    return 2.0 * np.abs(n1 * d2 - n2 * d1) / (r1 * r2)


def chordal_array(v1, inf1, v2, inf2) -> np.ndarray:
    n1, d1 = _to_homogeneous(v1, inf1)
    n2, d2 = _to_homogeneous(v2, inf2)
    return chordal_homogeneous(n1, d1, n2, d2)


def _to_homogeneous(values, is_inf):
    v = np.asarray(values, dtype=complex)
    inf = np.asarray(is_inf, bool) | ~np.isfinite(v)
    return np.where(inf, 1.0, v), np.where(inf, 0.0, 1.0)


# -- Möbius group ---------------------------------------------------------------


def resolve(num: complex, den: complex, eps: float = POLE_EPS) -> SpherePoint:
    """``num/den`` with the relative near-pole rule."""
    if abs(den) <= eps * (abs(num) + abs(den)):
        return INF
    return SpherePoint(num / den)


def mobius_apply(m: Mat2, p, eps: float = POLE_EPS) -> SpherePoint:
    """``(a z + b)/(c z + d)``; ``inf`` maps to ``a/c``."""
    _require_invertible(m)
    p = SpherePoint.of(p)
    if p.is_inf:
        return resolve(m.a, m.c, eps)
    return resolve(m.a * p.z + m.b, m.c * p.z + m.d, eps)


def mobius_compose(m1: Mat2, m2: Mat2) -> Mat2:
    """Matrix of ``phi_m1 o phi_m2``."""
    _require_invertible(m1)
    _require_invertible(m2)
    return m1 @ m2


def mobius_inverse(m: Mat2) -> Mat2:
    _require_invertible(m)
    k = 1.0 / m.det
    return Mat2(m.d * k, -m.b * k, -m.c * k, m.a * k)


def normalize(m: Mat2) -> Mat2:
    """Scale to determinant 1 (one of the two square-root branches)."""
    _require_invertible(m)
    return m * (1.0 / cmath.sqrt(m.det))


def same_map(m1: Mat2, m2: Mat2, tol: float = 1e-12) -> bool:
    """Whether two matrices are nonzero multiples of each other."""
    x, y = m1.to_array().ravel(), m2.to_array().ravel()
    k = np.argmax(np.abs(y))
    if y[k] == 0:
        return False
    lam = x[k] / y[k]
    return bool(np.max(np.abs(x - lam * y)) <= tol * np.max(np.abs(x)))


# -- singular curve ---------------------------------------------------------------


@dataclass(frozen=True)
class SingularCurveSample:
    """Values ``-d(x)/c(x)`` at nodes where ``|c| > zero_threshold``."""

    x: np.ndarray
    values: np.ndarray
    gaps: np.ndarray
    zero_threshold: float

    @property
    def points(self) -> list[tuple[float, complex]]:
        return list(zip(self.x.tolist(), self.values.tolist()))

    def save(self, path) -> None:
        write_csv(Path(path), {"x": self.x, "re": self.values.real, "im": self.values.imag})


def singular_curve(mpath, zero_threshold: float = 1e-12) -> SingularCurveSample:
    c, d = mpath.c.values, mpath.d.values
    x = mpath.grid.nodes
    keep = np.abs(c) > zero_threshold
    return SingularCurveSample(
        x=x[keep].copy(),
        values=-d[keep] / c[keep],
        gaps=x[~keep].copy(),
        zero_threshold=zero_threshold,
    )
