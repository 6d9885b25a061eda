"""Explicit solutions of Riccati and second-order linear ODEs on a grid.

The solvers evaluate the bivariate exponential (a series of iterated
integrals) and assemble from it the SL(2)-valued solution matrix whose
Möbius action generates every Riccati solution, including those passing
through infinity.
"""
__version__ = "0.1.0"

from .apps import AiryTable, AiryValues, MiuraResult, airy, miura_invert, miura_singular_scan, schrodinger_solve
from .bivexp import BivExpResult, bivexp, parity_split, series_terms
from .errors import RicsolveError
from .gridfn import Grid, GridFunction, fd_derivative, primitive, sample
from .linear2 import linear_solve, residual
from .matsol import CoeffTriple, MatPath, coeffs_from_matrix, solution_matrix, trace_lift
from .oracle import OracleOptions, compare_riccati, rk_linear2, rk_matrix, rk_riccati
from .riccati import SphereTrajectory, abel_closed_form, conjugate_coeffs, cross_ratio, riccati_solve
from .sphere import (
    INF,
    Mat2,
    SpherePoint,
    chordal_distance,
    mobius_apply,
    mobius_compose,
    mobius_inverse,
    singular_curve,
    stereographic,
)
