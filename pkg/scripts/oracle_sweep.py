"""Sweep random coefficient triples and compare the series solver with the RK oracle.

    python scripts/oracle_sweep.py --triples 20 --starts 5 --seed 0
"""
from __future__ import annotations

import argparse
from collections import Counter

import numpy as np

from ricsolve import Grid, GridFunction, OracleOptions, compare_riccati, riccati_solve, rk_riccati
from ricsolve.matsol import CoeffTriple


def random_coeff(rng: np.random.Generator, grid: Grid, degree: int = 3, amp: float = 1.0) -> GridFunction:
    a = rng.uniform(-1, 1, degree + 1) + 1j * rng.uniform(-1, 1, degree + 1)
    b = rng.uniform(-1, 1, degree + 1) + 1j * rng.uniform(-1, 1, degree + 1)
    scale = amp / (np.abs(a).sum() + np.abs(b).sum())
    k = np.arange(degree + 1)
    x = grid.nodes[:, None]
    return GridFunction(grid, scale * (a * np.cos(k * x) + b * np.sin(k * x)).sum(axis=1))


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--triples", type=int, default=10)
    ap.add_argument("--starts", type=int, default=5)
    ap.add_argument("--cells", type=int, default=2000)
    ap.add_argument("--amp", type=float, default=1.0)
    ap.add_argument("--tol", type=float, default=1e-10)
    ap.add_argument("--rel-tol", type=float, default=1e-9)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    grid = Grid(-2.0, 2.0, args.cells)
    opts = OracleOptions(rel_tol=args.rel_tol)
    statuses, gaps = Counter(), []
    for _ in range(args.triples):
        c = CoeffTriple(*(random_coeff(rng, grid, amp=args.amp) for _ in range(3)))
        for _ in range(args.starts):
            y0 = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
            rep = compare_riccati(riccati_solve(c, y0, args.tol), rk_riccati(c, y0, opts))
            statuses[rep.status] += 1
            if rep.status == "ok":
                gaps.append(rep.max_chordal_gap)
    print(f"runs: {sum(statuses.values())}  " + "  ".join(f"{k}: {v}" for k, v in sorted(statuses.items())))
    if gaps:
        g = np.array(gaps)
        print(f"chordal gap over ok runs: median {np.median(g):.2e}  max {g.max():.2e}")


if __name__ == "__main__":
    main()
