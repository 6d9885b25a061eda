"""Shared fixtures and helpers: random smooth coefficients, power-series oracles."""
from __future__ import annotations

import math

import numpy as np
import pytest

from ricsolve import Grid, GridFunction

# lines recorded by the acceptance suite, echoed after the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def trig_poly(rng: np.random.Generator, degree: int = 3, amp: float = 1.0, complex_: bool = False):
    """Random trigonometric polynomial in x with total amplitude at most ``amp``."""
    a = rng.uniform(-1, 1, degree + 1)
    b = rng.uniform(-1, 1, degree + 1)
    if complex_:
        a = a + 1j * rng.uniform(-1, 1, degree + 1)
        b = b + 1j * rng.uniform(-1, 1, degree + 1)
    norm = np.sum(np.abs(a)) + np.sum(np.abs(b))
    a, b = a * amp / norm, b * amp / norm
    k = np.arange(degree + 1)

    def fn(x):
        x = np.asarray(x, dtype=float)[..., None]
        return np.sum(a * np.cos(k * x) + b * np.sin(k * x), axis=-1)

    return fn


def random_fn(rng, grid: Grid, amp: float = 1.0, complex_: bool = False) -> GridFunction:
    return GridFunction(grid, trig_poly(rng, amp=amp, complex_=complex_)(grid.nodes))


def airy_series(x: float, terms: int = 80) -> tuple[float, float]:
    """Maclaurin series of the two canonical solutions of u'' = x u at x.

    u1 = sum x^{3k} / prod (3j-1)(3j),  u2 = sum x^{3k+1} / prod 3j(3j+1).
    """
    u1 = u2 = 0.0
    t1, t2 = 1.0, x
    for k in range(terms):
        u1 += t1
        u2 += t2
        t1 *= x**3 / ((3 * k + 2) * (3 * k + 3))
        t2 *= x**3 / ((3 * k + 3) * (3 * k + 4))
    return u1, u2


def gamma_stirling(z: float) -> float:
    """Gamma(z) by upward recurrence to z + 20 and a Stirling series there."""
    shift = 20
    w = z + shift
    series = 1 / (12 * w) - 1 / (360 * w**3) + 1 / (1260 * w**5) - 1 / (1680 * w**7) + 1 / (1188 * w**9)
    log_g = (w - 0.5) * math.log(w) - w + 0.5 * math.log(2 * math.pi) + series
    prod = 1.0
    for k in range(shift):
        prod *= z + k
    return math.exp(log_g) / prod


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def grid():
    return Grid(-2.0, 2.0, 2000)


@pytest.fixture
def small_grid():
    return Grid(-1.0, 1.0, 400)
