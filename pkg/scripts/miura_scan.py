"""Classify Miura initial values for a few real potentials and refine the standard interval.

    python scripts/miura_scan.py --samples 41
"""
from __future__ import annotations

import argparse

import numpy as np

from ricsolve import Grid, miura_invert, miura_singular_scan, sample
from ricsolve.apps import miura_matrix
from ricsolve.sphere import singular_curve

POTENTIALS = {
    "1": lambda x: np.ones_like(x),
    "cos x": np.cos,
    "x^2 - 1": lambda x: x**2 - 1,
    "-2 sech^2 x": lambda x: -2 / np.cosh(x) ** 2,
}


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=-3.0)
    ap.add_argument("--hi", type=float, default=3.0)
    ap.add_argument("--cells", type=int, default=1200)
    ap.add_argument("--samples", type=int, default=41)
    ap.add_argument("--span", type=float, default=3.0, help="scan y0 in [-span, span]")
    args = ap.parse_args()

    grid = Grid.adjusted(args.lo, args.hi, args.cells)
    ys = np.linspace(-args.span, args.span, args.samples)
    print(f"{'q':>12}  {'contiguous':>10}  {'standard interval':>24}  {'recon err':>9}  {'max|Im Sigma|':>13}")
    for name, fn in POTENTIALS.items():
        q = sample(fn, grid)
        M = miura_matrix(q)
        scan = miura_singular_scan(q, ys, mpath=M)
        lo, hi = scan.endpoints
        std = scan.standard
        interval = "none" if not std else f"[{lo if lo is not None else std[0]:+.5f}, {hi if hi is not None else std[-1]:+.5f}]"
        err = miura_invert(q, min(std, key=abs), mpath=M).reconstruction_error() if std else float("nan")
        sc = singular_curve(M)
        imag = float(np.max(np.abs(sc.values.imag))) if len(sc.values) else 0.0
        print(f"{name:>12}  {str(scan.contiguous):>10}  {interval:>24}  {err:9.2e}  {imag:13.2e}")


if __name__ == "__main__":
    main()
