"""Command-line front end.

Every command takes ``--range lo:hi:cells`` and writes CSV (default) or
JSON. With ``--out PATH`` and CSV format a metadata sidecar ``PATH.json``
is written next to the data.

Exit codes: 0 ok, 1 usage, 2 solver rejection, 3 self-check failure.
"""
from __future__ import annotations

import json
import math
import os
import platform
import sys
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import click
import numpy as np

from . import __version__
from .apps import airy, miura_invert, miura_singular_scan, schrodinger_solve
from .bivexp import bivexp
from .errors import ExpressionError, GridError, RicsolveError
from .expr import compile_expr, evaluate
from .gridfn import Grid, GridFunction, load, sample, write_csv
from .linear2 import interior_max, linear_solve, residual
from .matsol import CoeffTriple, solution_matrix_of
from .oracle import OracleOptions, compare_riccati, rk_riccati
from .riccati import riccati_solve
from .sphere import INF, SpherePoint, singular_curve

EXIT_OK, EXIT_USAGE, EXIT_SOLVER, EXIT_CHECK = 0, 1, 2, 3

COMMANDS = (
    "bivexp",
    "matrix",
    "riccati",
    "linear",
    "airy",
    "schrodinger",
    "miura",
    "singular-curve",
    "oracle-compare",
)

BUILTINS = {
    "zero": "0",
    "one": "1",
    "identity": "x",
    "airy": "x",
    "gauss": "exp(-x^2)",
    "well": "-2/cosh(x)^2",
}


@dataclass
class RunConfig:
    command: str
    x_lo: float
    x_hi: float
    cells: int
    coeffs: dict[str, str] = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    tol: float = 1e-10
    out: str | None = None
    fmt: str = "csv"
    timestamp: bool = False
    check: bool = True
    requested_cells: int | None = None

    @property
    def grid(self) -> Grid:
        return Grid(self.x_lo, self.x_hi, self.cells)


class UsageError(click.UsageError):
    pass


# -- argument helpers ----------------------------------------------------------------


def parse_range(spec: str) -> tuple[float, float, int, int]:
    """``lo:hi:cells`` -> (lo, hi, cells actually used, cells requested)."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise UsageError(f"--range must look like lo:hi:cells, got {spec!r}")
    try:
        lo, hi = float(parts[0]), float(parts[1])
        cells = int(parts[2])
    except ValueError:
        raise UsageError(f"--range must look like lo:hi:cells, got {spec!r}") from None
    if cells < 1:
        raise UsageError(f"--range needs a positive cell count, got {cells}")
    if not lo < hi:
        raise UsageError(f"--range needs lo < hi, got {spec!r}")
    if lo > 0 or hi < 0:
        raise UsageError(f"--range {spec!r} must contain 0")
    try:
        grid = Grid.adjusted(lo, hi, cells)
    except GridError as exc:
        raise UsageError(str(exc)) from None
    return lo, hi, grid.n_cells, cells


def check_coeff(spec: str) -> str:
    if spec.startswith("builtin:"):
        if spec[8:] not in BUILTINS:
            raise UsageError(f"unknown builtin {spec[8:]!r}; choose from {', '.join(BUILTINS)}")
        return spec
    if spec.lower().endswith(".csv"):
        if not Path(spec).exists():
            raise UsageError(f"coefficient file {spec!r} does not exist")
        return spec
    try:
        compile_expr(spec)
    except ExpressionError as exc:
        raise UsageError(f"bad expression: {exc}") from None
    return spec


def resolve_coeff(spec: str, grid: Grid) -> GridFunction:
    if spec.startswith("builtin:"):
        spec = BUILTINS[spec[8:]]
    elif spec.lower().endswith(".csv"):
        return load(spec, grid)
    fn = compile_expr(spec)
    with np.errstate(all="ignore"):
        return sample(fn, grid)


def parse_point(text: str) -> SpherePoint:
    if text.strip().lower() in ("inf", "infinity", "oo"):
        return INF
    try:
        v = complex(evaluate(text))
    except ExpressionError as exc:
        raise UsageError(f"bad value {text!r}: {exc}") from None
    if not math.isfinite(abs(v)):
        return INF
    return SpherePoint(v)


def parse_number(text: str) -> complex:
    p = parse_point(text)
    if p.is_inf:
        raise UsageError(f"{text!r}: a finite value is required")
    return p.z


# -- click layer ----------------------------------------------------------------------------


def _common(fn):
    opts = [
        click.option("--range", "range_", required=True, help="lo:hi:cells; 0 must lie in [lo, hi]"),
        click.option("--tol", type=float, default=1e-10, show_default=True, help="series truncation tolerance"),
        click.option("--out", type=click.Path(dir_okay=False), default=None, help="output file (default stdout)"),
        click.option("--format", "fmt", type=click.Choice(["csv", "json"]), default="csv", show_default=True),
        click.option("--timestamp", is_flag=True, help="record a timestamp in the metadata"),
        click.option("--no-check", is_flag=True, help="skip self-checks"),
    ]
    for o in reversed(opts):
        fn = o(fn)
    return fn


def _config(command, range_, tol, out, fmt, timestamp, no_check, coeffs=None, params=None) -> RunConfig:
    lo, hi, cells, requested = parse_range(range_)
    if not tol > 0:
        raise UsageError(f"--tol must be positive, got {tol}")
    coeffs = {k: check_coeff(v) for k, v in (coeffs or {}).items()}
    return RunConfig(
        command, lo, hi, cells, coeffs, params or {}, tol, out, fmt, timestamp, not no_check, requested
    )


@click.group(context_settings={"help_option_names": ["-h", "--help"]})
@click.version_option(__version__, prog_name="ricsolve")
def cli():
    """Explicit Riccati / second-order linear ODE solvers on a grid."""


def _fgh(fn):
    for name in ("h", "g", "f"):
        fn = click.option(f"--{name}", default="0", show_default=True, help=f"coefficient {name}(x)")(fn)
    return fn


@cli.command("bivexp")
@click.option("--f", default="0", show_default=True)
@click.option("--g", default="0", show_default=True)
@_common
def _bivexp(f, g, **kw):
    """E, C, S of the bivariate exponential of (f, g)."""
    return _config("bivexp", coeffs={"f": f, "g": g}, **kw)


@cli.command("matrix")
@_fgh
@_common
def _matrix(f, g, h, **kw):
    """Solution matrix psi(f, g, h)."""
    return _config("matrix", coeffs={"f": f, "g": g, "h": h}, **kw)


@cli.command("riccati")
@_fgh
@click.option("--y0", default="0", show_default=True, help="initial value (complex, or inf)")
@_common
def _riccati(f, g, h, y0, **kw):
    """Solve y' = f y^2 + g y + h."""
    return _config("riccati", coeffs={"f": f, "g": g, "h": h}, params={"y0": parse_point(y0)}, **kw)


@cli.command("linear")
@click.option("--alpha", default="0", show_default=True)
@click.option("--beta", default="0", show_default=True)
@click.option("--y0", default="1", show_default=True)
@click.option("--yp0", default="0", show_default=True)
@_common
def _linear(alpha, beta, y0, yp0, **kw):
    """Solve y'' + alpha y' + beta y = 0."""
    params = {"y0": parse_number(y0), "yp0": parse_number(yp0)}
    return _config("linear", coeffs={"alpha": alpha, "beta": beta}, params=params, **kw)


@cli.command("airy")
@_common
def _airy(**kw):
    """Airy functions Ai, Bi on the grid."""
    return _config("airy", **kw)


@cli.command("schrodinger")
@click.option("--q", default="0", show_default=True)
@click.option("--lambda", "lam", default="0", show_default=True)
@click.option("--y0", default="1", show_default=True)
@click.option("--yp0", default="0", show_default=True)
@_common
def _schrodinger(q, lam, y0, yp0, **kw):
    """Solve -y'' + q y = lambda y."""
    params = {"lambda": parse_number(lam), "y0": parse_number(y0), "yp0": parse_number(yp0)}
    return _config("schrodinger", coeffs={"q": q}, params=params, **kw)


@cli.command("miura")
@click.option("--q", default="0", show_default=True)
@click.option("--y0", default="0", show_default=True)
@click.option("--scan", default=None, help="comma-separated initial values to classify")
@click.option("--check-tol", type=float, default=1e-3, show_default=True)
@_common
def _miura(q, y0, scan, check_tol, **kw):
    """Invert the Miura map alpha -> alpha^2 + alpha'."""
    y = parse_number(y0)
    if y.imag != 0:
        raise UsageError("--y0 must be real for miura")
    samples = None
    if scan:
        try:
            samples = [float(s) for s in scan.split(",") if s.strip()]
        except ValueError:
            raise UsageError(f"--scan must be a list of real numbers, got {scan!r}") from None
    params = {"y0": y.real, "scan": samples, "check_tol": check_tol}
    return _config("miura", coeffs={"q": q}, params=params, **kw)


@cli.command("singular-curve")
@_fgh
@click.option("--zero-threshold", type=float, default=1e-12, show_default=True)
@_common
def _singular(f, g, h, zero_threshold, **kw):
    """Sample the singular curve -d/c of psi(f, g, h)."""
    return _config(
        "singular-curve", coeffs={"f": f, "g": g, "h": h}, params={"zero_threshold": zero_threshold}, **kw
    )


@cli.command("oracle-compare")
@_fgh
@click.option("--y0", default="0", show_default=True)
@click.option("--rel-tol", type=float, default=1e-9, show_default=True)
@click.option("--abs-tol", type=float, default=1e-12, show_default=True)
@click.option("--gap-tol", type=float, default=1e-5, show_default=True)
@_common
def _oracle(f, g, h, y0, rel_tol, abs_tol, gap_tol, **kw):
    """Compare the series solution with an adaptive Runge-Kutta run."""
    p = parse_point(y0)
    if p.is_inf:
        raise UsageError("oracle-compare needs a finite --y0")
    params = {"y0": p, "rel_tol": rel_tol, "abs_tol": abs_tol, "gap_tol": gap_tol}
    return _config("oracle-compare", coeffs={"f": f, "g": g, "h": h}, params=params, **kw)


def parse_args(argv: list[str]) -> RunConfig:
    """Parse a command line into a :class:`RunConfig`; raises ``click.ClickException`` on bad input."""
    return cli.main(list(argv), prog_name="ricsolve", standalone_mode=False)


# -- execution --------------------------------------------------------------------------------


def _pt_json(p: SpherePoint):
    return "inf" if p.is_inf else [p.z.real, p.z.imag]


def _meta(cfg: RunConfig, extra: dict) -> dict:
    meta = {
        "command": cfg.command,
        "grid": cfg.grid.to_json(),
        "tol": cfg.tol,
        "coefficients": cfg.coeffs,
    }
    params = {}
    for k, v in cfg.params.items():
        if isinstance(v, SpherePoint):
            params[k] = _pt_json(v)
        elif isinstance(v, complex):
            params[k] = [v.real, v.imag]
        else:
            params[k] = v
    meta["params"] = params
    meta.update(extra)
    meta["versions"] = {"ricsolve": __version__, "numpy": np.__version__, "python": platform.python_version()}
    if cfg.timestamp:
        meta["timestamp"] = datetime.now(timezone.utc).isoformat()
    return meta


def _emit(cfg: RunConfig, columns: dict, meta: dict) -> None:
    if cfg.fmt == "json":
        doc = {"meta": meta, "data": {k: np.asarray(v).tolist() for k, v in columns.items()}}
        text = json.dumps(doc, indent=1, default=_json_default) + "\n"
        if cfg.out:
            Path(cfg.out).write_text(text)
        else:
            sys.stdout.write(text)
        return
    if cfg.out:
        write_csv(cfg.out, columns)
        Path(cfg.out).with_suffix(".json").write_text(json.dumps(meta, indent=2, default=_json_default) + "\n")
    else:
        write_csv(sys.stdout, columns)


def _json_default(o):
    if isinstance(o, (np.integer,)):
        return int(o)
    if isinstance(o, (np.floating,)):
        return float(o)
    if isinstance(o, (np.bool_,)):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    raise TypeError(f"not serializable: {type(o)}")


def _cplx(prefix: str, v: np.ndarray) -> dict:
    return {f"{prefix}_re": v.real, f"{prefix}_im": v.imag}


def _coeffs(cfg: RunConfig, grid: Grid, names) -> list[GridFunction]:
    return [resolve_coeff(cfg.coeffs[n], grid) for n in names]


def _traj_columns(traj) -> dict:
    inf = traj.is_inf
    vals = np.where(inf, 0, traj.values)
    return {
        "x": traj.x,
        "re": vals.real,
        "im": vals.imag,
        "is_infinity": inf,
        "chordal_step": np.concatenate([[0.0], traj.chordal_steps()]),
    }


def execute(cfg: RunConfig) -> tuple[dict, dict, list[str]]:
    """Run the pipeline; returns (columns, metadata, failed self-checks)."""
    grid = cfg.grid
    failed: list[str] = []
    cmd = cfg.command
    x = grid.nodes

    if cmd == "bivexp":
        f, g = _coeffs(cfg, grid, "fg")
        r = bivexp(f, g, cfg.tol)
        cols = {"x": x, **_cplx("E", r.E.values), **_cplx("C", r.C.values), **_cplx("S", r.S.values)}
        return cols, {"series": r.diagnostics()}, failed

    if cmd == "matrix":
        f, g, h = _coeffs(cfg, grid, "fgh")
        M = solution_matrix_of(CoeffTriple(f, g, h), cfg.tol)
        cols = {"x": x}
        for name in "abcd":
            cols.update(_cplx(name, getattr(M, name).values))
        cols["det_residual"] = M.det_residual()
        return cols, M.diagnostics(), failed

    if cmd == "riccati":
        f, g, h = _coeffs(cfg, grid, "fgh")
        y0 = cfg.params["y0"]
        traj = riccati_solve(CoeffTriple(f, g, h), y0, cfg.tol)
        if cfg.check and traj[grid.zero_index] != y0:
            failed.append("initial value not reproduced at x=0")
        return _traj_columns(traj), traj.diagnostics(), failed

    if cmd == "linear":
        alpha, beta = _coeffs(cfg, grid, ("alpha", "beta"))
        y, yp = linear_solve(alpha, beta, cfg.params["y0"], cfg.params["yp0"], cfg.tol)
        res = interior_max(residual(alpha, beta, y, yp))
        cols = {"x": x, **_cplx("y", y.values), **_cplx("yp", yp.values)}
        return cols, {"residual_max": res}, failed

    if cmd == "airy":
        t = airy(grid, cfg.tol)
        w = float(np.max(np.abs(t.wronskian() - 1 / math.pi)))
        if cfg.check and w > 1e-6:
            failed.append(f"Wronskian deviates from 1/pi by {w:.3e}")
        cols = {
            "x": x,
            "Ai": t.Ai.real,
            "Bi": t.Bi.real,
            "u1": t.u1.real,
            "u2": t.u2.real,
            "Ai_prime": t.Ai_prime.real,
            "Bi_prime": t.Bi_prime.real,
        }
        return cols, {"series": t.diagnostics, "wronskian_max_error": w}, failed

    if cmd == "schrodinger":
        (q,) = _coeffs(cfg, grid, "q")
        p = cfg.params
        y, yp = schrodinger_solve(q, p["lambda"], p["y0"], p["yp0"], cfg.tol)
        cols = {"x": x, **_cplx("y", y.values), **_cplx("yp", yp.values)}
        return cols, {}, failed

    if cmd == "miura":
        (q,) = _coeffs(cfg, grid, "q")
        p = cfg.params
        res = miura_invert(q, p["y0"], cfg.tol)
        err = res.reconstruction_error()
        meta = {**res.alpha.diagnostics(), "reconstruction_error": err, "check_tol": p["check_tol"]}
        if p.get("scan"):
            scan = miura_singular_scan(q, p["scan"], cfg.tol)
            meta["singular_scan"] = {
                "entries": [[y, c] for y, c in scan.entries],
                "contiguous": scan.contiguous,
                "endpoints": list(scan.endpoints),
            }
            if cfg.check and not scan.contiguous:
                failed.append("standard initial values are not contiguous")
        if cfg.check and res.classification == "standard" and err > p["check_tol"]:
            failed.append(f"Miura reconstruction error {err:.3e} exceeds {p['check_tol']:g}")
        inf = res.alpha.is_inf
        vals = np.where(inf, 0, res.alpha.values)
        cols = {
            "x": x,
            "alpha_re": vals.real,
            "alpha_im": vals.imag,
            "is_infinity": inf,
            "q": q.real,
            "q_reconstructed": res.q_reconstructed.real,
            "valid": res.valid,
        }
        return cols, meta, failed

    if cmd == "singular-curve":
        f, g, h = _coeffs(cfg, grid, "fgh")
        M = solution_matrix_of(CoeffTriple(f, g, h), cfg.tol)
        s = singular_curve(M, cfg.params["zero_threshold"])
        cols = {"x": s.x, "re": s.values.real, "im": s.values.imag}
        return cols, {"gaps": len(s.gaps), **M.diagnostics()}, failed

    if cmd == "oracle-compare":
        f, g, h = _coeffs(cfg, grid, "fgh")
        p = cfg.params
        coeffs = CoeffTriple(f, g, h)
        traj = riccati_solve(coeffs, p["y0"], cfg.tol)
        orc = rk_riccati(coeffs, p["y0"].z, OracleOptions(rel_tol=p["rel_tol"], abs_tol=p["abs_tol"]))
        rep = compare_riccati(traj, orc, p["gap_tol"])
        if cfg.check and rep.status == "error":
            failed.append(f"series and oracle disagree (max chordal gap {rep.max_chordal_gap:.3e})")
        inf = traj.is_inf
        cols = {
            "x": x,
            **_cplx("series", np.where(inf, 0, traj.values)),
            "series_is_infinity": inf,
            **_cplx("oracle", orc.y.values),
            "oracle_valid": orc.valid,
        }
        return cols, {"comparison": rep.to_json(), "classification": traj.classification}, failed

    raise UsageError(f"unknown command {cmd!r}")


def run(cfg: RunConfig) -> int:
    if cfg.requested_cells is not None and cfg.requested_cells != cfg.cells:
        click.echo(
            f"warning: using {cfg.cells} cells instead of {cfg.requested_cells} so that 0 is a grid node",
            err=True,
        )
    try:
        with np.errstate(over="ignore", invalid="ignore"):
            cols, extra, failed = execute(cfg)
    except RicsolveError as exc:
        click.echo(f"error: {exc}", err=True)
        return EXIT_SOLVER
    meta = _meta(cfg, extra)
    meta["self_checks"] = {"enabled": cfg.check, "failed": failed}
    _emit(cfg, cols, meta)
    for msg in failed:
        click.echo(f"self-check failed: {msg}", err=True)
    return EXIT_CHECK if failed else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cfg = parse_args(argv)
    except click.exceptions.Exit as exc:  # --help / --version
        return exc.exit_code
    except click.Abort:
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except RicsolveError as exc:
        click.echo(f"usage error: {exc}", err=True)
        return EXIT_USAGE
    if not isinstance(cfg, RunConfig):  # --help / --version return early
        return EXIT_OK
    return run(cfg)


def entry() -> None:
    try:
        code = main()
        sys.stdout.flush()
    except BrokenPipeError:
        # reader closed early (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        code = EXIT_OK
    sys.exit(code)
