"""Tabulate Ai, Bi on a grid and report the Wronskian and origin checks.

    python scripts/airy_table.py --lo -5 --hi 2 --cells 2000 --out airy.csv
"""
from __future__ import annotations

import argparse
import math

import numpy as np

from ricsolve import Grid, airy
from ricsolve.apps import AI0, BI0


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--lo", type=float, default=-5.0)
    ap.add_argument("--hi", type=float, default=2.0)
    ap.add_argument("--cells", type=int, default=2000)
    ap.add_argument("--tol", type=float, default=1e-12)
    ap.add_argument("--out", default=None)
    args = ap.parse_args()

    grid = Grid.adjusted(args.lo, args.hi, args.cells)
    tab = airy(grid, args.tol)
    o = tab.at(0.0)
    w = np.abs(tab.wronskian() - 1 / math.pi)
    print(f"grid        {grid.x_lo}:{grid.x_hi}:{grid.n_cells}")
    print(f"Ai(0) err   {abs(o.Ai - AI0):.2e}")
    print(f"Bi(0) err   {abs(o.Bi - BI0):.2e}")
    print(f"Wronskian   max |W - 1/pi| = {w.max():.2e} at x = {grid.nodes[w.argmax()]:.4f}")
    for x in (-4.0, -2.0, 0.0, 1.0, 2.0):
        if grid.x_lo <= x <= grid.x_hi:
            v = tab[int(np.argmin(np.abs(grid.nodes - x)))]
            print(f"  x={v.x:+.4f}  Ai={v.Ai.real:+.12f}  Bi={v.Bi.real:+.12f}")
    if args.out:
        tab.save(args.out)
        print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
