"""Acceptance suite: the thirteen end-to-end criteria at their stated tolerances.

Each test records one PASS/FAIL line; the lines are printed in the terminal
summary (see conftest) so they show regardless of output capture.
"""
from __future__ import annotations

import subprocess
import sys

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES, airy_series, random_fn
from ricsolve import (
    Grid,
    Mat2,
    OracleOptions,
    airy,
    bivexp,
    coeffs_from_matrix,
    compare_riccati,
    conjugate_coeffs,
    cross_ratio,
    fd_derivative,
    miura_singular_scan,
    primitive,
    riccati_solve,
    rk_riccati,
    sample,
    schrodinger_solve,
    singular_curve,
    solution_matrix,
)
from ricsolve.apps import AI0, AIP0, BI0, BIP0, miura_invert, miura_matrix
from ricsolve.gridfn import constant, identity, zeros
from ricsolve.matsol import CoeffTriple, ode_residual
from ricsolve.riccati import abel_closed_form, abel_coeffs, constant_coeffs, involution, trajectory_from_matrix
from ricsolve.sphere import SpherePoint, mobius_apply

GRID = Grid(-2.0, 2.0, 2000)
H = GRID.h


def report(number: int, name: str, ok: bool, detail: str) -> None:
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number:2d} {name}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def random_triple(rng, grid=GRID, amp=1.0) -> CoeffTriple:
    return CoeffTriple(*(random_fn(rng, grid, amp, complex_=True) for _ in range(3)))


def interior(a: np.ndarray) -> np.ndarray:
    return a[1:-1]


def test_01_diagonal_collapse():
    rng = np.random.default_rng(1)
    worst = 0.0
    for k in range(10):
        f = random_fn(rng, GRID, complex_=bool(k % 2))
        res = bivexp(f, f, tol=1e-10)
        exact = np.exp(primitive(f).values)
        worst = max(worst, float(np.max(np.abs(res.E.values - exact))))
    ok = worst < 1e-8
    report(1, "diagonal collapse", ok, f"max |E_ff - exp(Pf)| = {worst:.2e} (< 1e-8)")
    assert ok


def test_02_even_odd_identities():
    rng = np.random.default_rng(2)
    worst = 0.0
    for _ in range(10):
        f = random_fn(rng, GRID, complex_=True)
        g = random_fn(rng, GRID, complex_=True)
        res = bivexp(f, g, tol=1e-10)
        d1 = interior(np.abs(fd_derivative(res.C).values - (g * res.S).values))
        d2 = interior(np.abs(fd_derivative(res.S).values - (f * res.C).values))
        worst = max(worst, float(d1.max()), float(d2.max()))
    limit = 50 * (4 / 2000) ** 2
    ok = worst < limit
    report(2, "C' = gS, S' = fC", ok, f"max fd residual = {worst:.2e} (< {limit:.1e})")
    assert ok


def test_03_solution_matrix():
    rng = np.random.default_rng(3)
    det_err = res_err = 0.0
    origin_exact = True
    for _ in range(5):
        c = random_triple(rng)
        M = solution_matrix(c.f, c.g, c.h, tol=1e-10)
        det_err = max(det_err, float(np.max(M.det_residual())))
        res_err = max(res_err, float(np.max(ode_residual(M, c)[1:-1])))
        i0 = GRID.zero_index
        origin_exact &= (M.a.values[i0], M.b.values[i0], M.c.values[i0], M.d.values[i0]) == (1, 0, 0, 1)
    limit = 50 * H**2
    ok = det_err < 1e-8 and res_err < limit and origin_exact
    report(
        3,
        "solution matrix",
        ok,
        f"|det-1| = {det_err:.2e} (< 1e-8), ODE residual = {res_err:.2e} (< {limit:.1e}), M(0) = I exact: {origin_exact}",
    )
    assert ok


def test_04_series_vs_oracle():
    rng = np.random.default_rng(4)
    opts = OracleOptions(rel_tol=1e-9)
    worst, kept, discarded, statuses = 0.0, 0, 0, set()
    for _ in range(10):
        c = random_triple(rng)
        for _ in range(5):
            y0 = complex(rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5))
            orc = rk_riccati(c, y0, opts)
            if orc.blowups:
                discarded += 1
                continue
            traj = riccati_solve(c, y0, tol=1e-10)
            rep = compare_riccati(traj, orc, gap_tol=1e-5)
            statuses.add(rep.status)
            worst = max(worst, rep.max_chordal_gap)
            kept += 1
    ok = kept > 0 and worst < 1e-5 and statuses <= {"ok"}
    report(4, "series vs oracle", ok, f"max chordal gap = {worst:.2e} (< 1e-5) over {kept} runs, {discarded} discarded")
    assert ok


def test_05_projective_continuation():
    grid = Grid(0.0, 2.0, 2000)
    c = constant_coeffs(grid, 1, 0, 0)
    traj = riccati_solve(c, 1.0, tol=1e-10)
    y2 = traj.at(2.0)
    err = abs(y2.z + 1) if not y2.is_inf else np.inf
    crossing = [float(traj.x[i]) for i in traj.infinity_nodes]
    near_one = any(abs(x - 1) < 2 * grid.h for x in crossing) or any(
        abs(traj.x[k] - 1) < 2 * grid.h for k in traj.pole_cells
    )
    rep = compare_riccati(traj, rk_riccati(c, 1.0, OracleOptions(rel_tol=1e-9)))
    ok = err < 1e-6 and near_one and rep.status == "expected-pole"
    report(5, "projective continuation", ok, f"|y(2) + 1| = {err:.2e} (< 1e-6), crosses inf near 1: {near_one}, report: {rep.status}")
    assert ok


def test_06_abel_closed_form():
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(5):
        f = random_fn(rng, GRID)
        g = random_fn(rng, GRID)
        for gamma in (1, 2, 1j):
            c = abel_coeffs(f, g, gamma)
            for y0 in (0, 1):
                traj = riccati_solve(c, y0, tol=1e-10)
                ref = abel_closed_form(f, g, gamma, y0)
                worst = max(worst, float(np.max(traj.chordal_gap(ref))))
    ok = worst < 1e-6
    report(6, "Abel closed form", ok, f"max chordal gap = {worst:.2e} (< 1e-6)")
    assert ok


def test_07_airy():
    grid = Grid.adjusted(-5.0, 2.0, 2000)
    tab = airy(grid, tol=1e-12)
    o = tab.at(0.0)
    origin = max(abs(o.Ai - AI0), abs(o.Ai_prime - AIP0), abs(o.Bi - BI0), abs(o.Bi_prime - BIP0))
    u1, u2 = airy_series(1.0)
    ai1 = abs(tab.at(1.0).Ai - (AI0 * u1 + AIP0 * u2))
    wr = float(np.max(np.abs(tab.wronskian() - 1 / np.pi)))
    ok = origin < 1e-10 and ai1 < 1e-6 and wr < 1e-6
    report(7, "Airy", ok, f"origin {origin:.1e} (< 1e-10), Ai(1) {ai1:.1e} (< 1e-6), Wronskian {wr:.1e} (< 1e-6)")
    assert ok


def test_08_schrodinger():
    x = GRID.nodes
    q0 = zeros(GRID)
    cases = [
        (1.0, 1.0, 0.0, np.cos(x), -np.sin(x)),
        (1.0, 0.0, 1.0, np.sin(x), np.cos(x)),
        (-1.0, 1.0, 0.0, np.cosh(x), np.sinh(x)),
        (-1.0, 0.0, 1.0, np.sinh(x), np.cosh(x)),
    ]
    red = 0.0
    for lam, y0, yp0, y_ref, yp_ref in cases:
        y, yp = schrodinger_solve(q0, lam, y0, yp0, tol=1e-12)
        red = max(red, float(np.max(np.abs(y.values - y_ref))), float(np.max(np.abs(yp.values - yp_ref))))
    tab = airy(GRID, tol=1e-12)
    y1, _ = schrodinger_solve(identity(GRID), 0.0, 1.0, 0.0, tol=1e-12)
    y2, _ = schrodinger_solve(identity(GRID), 0.0, 0.0, 1.0, tol=1e-12)
    ai = max(float(np.max(np.abs(y1.values - tab.u1))), float(np.max(np.abs(y2.values - tab.u2))))
    ok = red < 1e-6 and ai < 1e-8
    report(8, "Schrodinger", ok, f"q = 0 reductions {red:.1e} (< 1e-6), q = x vs Airy {ai:.1e} (< 1e-8)")
    assert ok


def test_09_miura():
    grid = Grid(-3.0, 3.0, 1200)
    samples = np.linspace(-2.5, 2.5, 21)
    recon, contiguous, imag = 0.0, True, 0.0
    for q in (constant(1.0, grid), sample(np.cos, grid), sample(lambda x: x**2 - 1, grid)):
        M = miura_matrix(q, tol=1e-12)
        scan = miura_singular_scan(q, samples, mpath=M, refine_steps=0)
        contiguous &= scan.contiguous
        standard = scan.standard
        assert standard, "no standard initial value among the samples"
        y0 = min(standard, key=abs)
        res = miura_invert(q, y0, mpath=M)
        assert res.classification == "standard"
        recon = max(recon, res.reconstruction_error())
        sc = singular_curve(M)
        if len(sc.values):
            imag = max(imag, float(np.max(np.abs(sc.values.imag))))
    ok = recon < 1e-3 and contiguous and imag < 1e-9
    report(9, "Miura", ok, f"reconstruction {recon:.1e} (< 1e-3), contiguous: {contiguous}, max |Im Sigma| {imag:.1e} (< 1e-9)")
    assert ok


def test_10_cross_ratio_constancy():
    rng = np.random.default_rng(10)
    c = random_triple(rng)
    M = solution_matrix(c.f, c.g, c.h, tol=1e-10)
    ts = [trajectory_from_matrix(M, y0) for y0 in (0.0, 1.0, -1.0 + 0.5j, 2.0j)]
    cr = cross_ratio(*ts).values
    spread = float(np.std(cr))
    ok = spread < 1e-7
    report(10, "cross-ratio constancy", ok, f"nodewise std = {spread:.2e} (< 1e-7)")
    assert ok


def test_11_conjugacy():
    rng = np.random.default_rng(11)
    c = random_triple(rng)
    worst = 0.0
    for _ in range(5):
        J = Mat2(*(complex(*rng.uniform(-1, 1, 2)) for _ in range(4)))
        while abs(J.det) < 0.1:  # keep J comfortably invertible
            J = Mat2(*(complex(*rng.uniform(-1, 1, 2)) for _ in range(4)))
        c2 = conjugate_coeffs(J, c)
        for y0 in (0.3, -0.5j):
            t1 = riccati_solve(c, y0, tol=1e-10)
            t2 = riccati_solve(c2, mobius_apply(J, SpherePoint.of(y0)), tol=1e-10)
            worst = max(worst, float(np.max(t2.chordal_gap(t1.transform(J)))))
    inv_err = 0.0
    for y0 in (0.5, 2.0 - 1j):
        t1 = riccati_solve(c, y0, tol=1e-10)
        t2 = riccati_solve(involution(c), 1 / y0, tol=1e-10)
        inv_err = max(inv_err, float(np.max(t2.chordal_gap(t1.reciprocal()))))
    ok = worst < 1e-6 and inv_err < 1e-6
    report(11, "conjugacy transport", ok, f"GL(2) gap {worst:.1e}, involution gap {inv_err:.1e} (< 1e-6)")
    assert ok


def test_12_round_trip():
    rng = np.random.default_rng(12)
    worst = 0.0
    for _ in range(5):
        c = random_triple(rng)
        back = coeffs_from_matrix(solution_matrix(c.f, c.g, c.h, tol=1e-10))
        for a, b in ((c.f, back.f), (c.g, back.g), (c.h, back.h)):
            worst = max(worst, float(np.max(np.abs(a.values - b.values)[1:-1])))
    limit = 100 * H**2
    ok = worst < limit
    report(12, "round trip", ok, f"max coefficient error {worst:.2e} (< {limit:.1e})")
    assert ok


@pytest.mark.parametrize("fmt", ["csv"])
def test_13_cli_determinism(tmp_path, fmt):
    args = ["riccati", "--f", "cos(x)", "--g", "0.5", "--h", "-1", "--y0", "0.5", "--range", "-2:2:1000"]
    outputs = []
    for k in range(2):
        out = tmp_path / f"run{k}.{fmt}"
        proc = subprocess.run(
            [sys.executable, "-m", "ricsolve", *args, "--out", str(out)], capture_output=True, check=False
        )
        assert proc.returncode == 0, proc.stderr.decode()
        outputs.append((out.read_bytes(), out.with_suffix(".json").read_bytes(), proc.stdout))
    stdout_runs = [
        subprocess.run([sys.executable, "-m", "ricsolve", *args, "--format", "json"], capture_output=True).stdout
        for _ in range(2)
    ]
    ok = outputs[0] == outputs[1] and stdout_runs[0] == stdout_runs[1] and len(stdout_runs[0]) > 0
    report(13, "CLI determinism", ok, f"byte-identical files and stdout: {ok}")
    assert ok
