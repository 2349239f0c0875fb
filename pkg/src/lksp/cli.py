"""Command-line runner: ``lksp [--config FILE] key=value ...``.

Every run writes one CSV table.  The header carries the effective
configuration as ``# key=value`` comment lines (they re-parse to the same
config), the config hash and the routes involved.  Exit codes: 0 success,
1 a check failed (identities, residual, compare), 2 configuration error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import os
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import brownian as bt
from . import data as datasets
from . import verification as ver
from .fd import fd_integrate, max_stable_dt
from .field import Grid, make_grid, max_abs_diff

__all__ = [
    "ConfigError",
    "RunConfig",
    "ResultTable",
    "parse_config",
    "config_from_header",
    "run",
    "emit_plotdata",
    "main",
    "OUTPUT_DIR_ENV",
]

OUTPUT_DIR_ENV = "LKSP_OUTPUT_DIR"
COMMANDS = ("solve", "compare", "mc", "identities", "residual", "convergence", "holder-probe")
ROUTES = ("multiplier", "gauss-hermite", "monte-carlo", "fd")
_ROUTE_ALIASES = {"mc": "monte-carlo", "gh": "gauss-hermite", "gauss_hermite": "gauss-hermite",
                  "monte_carlo": "monte-carlo"}
DATA = ("bump", "gaussian", "trig", "holder_bump")
HOLDER_S_DEFAULT = tuple(float(s) for s in np.logspace(-3, -4, 9))

# compare command: error vs multiplier, relative to max(1, |u|)
GH_TOL = 1e-8
FD_TOL = 1e-4
MC_SIGMAS = 4.0
MC_COVERAGE = 0.99


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    command: str
    dim: int = 1
    n: int = 256
    length: float = 20.0
    datum: str = "bump"
    radius: Optional[float] = None
    sigma: Optional[float] = None
    amplitude: Optional[float] = None
    k: Optional[tuple] = None
    alpha: Optional[tuple] = None
    t: tuple = (1.0,)
    route: str = "multiplier"
    gh_order: int = 64
    mc_samples: int = 10_000
    seed: int = 1
    dt: Optional[float] = None
    s: Optional[tuple] = None
    output: Optional[str] = None
    plotdata: Optional[str] = None

    @property
    def grid(self) -> Grid:
        return make_grid(self.dim, self.n, self.length)

    def datum_params(self) -> dict:
        p = {}
        for key in ("radius", "sigma", "amplitude", "k"):
            if getattr(self, key) is not None:
                p[key] = getattr(self, key)
        if self.alpha is not None:
            p["alpha"] = self.alpha[0]
        return p

    def build_datum(self) -> datasets.InitialDatum:
        return datasets.by_name(self.datum, self.dim, **self.datum_params())

    def echo_lines(self) -> list[str]:
        """``key=value`` for every set field, in declaration order."""
        out = []
        for f in fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            out.append(f"{f.name}={_format_value(v)}")
        return out

    def hash(self) -> str:
        text = "\n".join(line for line in self.echo_lines()
                         if not line.startswith(("output=", "plotdata=")))
        return hashlib.sha256(text.encode()).hexdigest()[:16]


def _format_value(v) -> str:
    if isinstance(v, tuple):
        return ",".join(_format_value(x) for x in v)
    if isinstance(v, float):
        return repr(v)
    return str(v)


# ---------------------------------------------------------------------------
# parsing


def _int(key, text):
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}") from None


def _float(key, text):
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}") from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: must be finite, got {text!r}")
    return v


def _floats(key, text):
    parts = [p for p in text.split(",") if p.strip()]
    if not parts:
        raise ConfigError(f"{key}: expected a comma-separated list of numbers")
    return tuple(_float(key, p) for p in parts)


def _str(key, text):
    return text


_PARSERS = {
    "command": _str, "dim": _int, "n": _int, "length": _float, "datum": _str,
    "radius": _float, "sigma": _float, "amplitude": _float, "k": _floats, "alpha": _floats,
    "t": _floats, "route": _str, "gh_order": _int, "mc_samples": _int, "seed": _int,
    "dt": _float, "s": _floats, "output": _str, "plotdata": _str,
}


def _tokens(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0]
        out.extend(line.split())
    return out


def _pairs(tokens: Sequence[str]) -> dict:
    values = {}
    for tok in tokens:
        tok = tok[2:] if tok.startswith("--") else tok
        if "=" not in tok:
            raise ConfigError(f"expected key=value, got {tok!r}")
        key, val = tok.split("=", 1)
        key = key.strip().replace("-", "_")
        if key not in _PARSERS:
            raise ConfigError(f"unknown key {key!r}; known keys: {', '.join(sorted(_PARSERS))}")
        values[key] = _PARSERS[key](key, val.strip())
    return values


def parse_config(text: str = "", flags: Sequence[str] = ()) -> RunConfig:
    """Build a validated :class:`RunConfig`; ``flags`` override ``text``."""
    values = _pairs(_tokens(text))
    values.update(_pairs(flags))
    if "command" not in values:
        raise ConfigError("missing required key 'command'")
    if "route" in values:
        values["route"] = _ROUTE_ALIASES.get(values["route"], values["route"])
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def config_from_header(csv_text: str) -> RunConfig:
    """Re-parse the config echo at the top of a CSV written by :func:`run`."""
    lines = []
    for line in csv_text.splitlines():
        if line.startswith("# config_hash="):
            break
        if line.startswith("# ") and "=" in line:
            lines.append(line[2:])
    return parse_config("\n".join(lines))


def _validate(cfg: RunConfig) -> None:
    if cfg.command not in COMMANDS:
        raise ConfigError(f"command must be one of {', '.join(COMMANDS)}, got {cfg.command!r}")
    if cfg.route not in ROUTES:
        raise ConfigError(f"route must be one of {', '.join(ROUTES)}, got {cfg.route!r}")
    if cfg.datum not in DATA:
        raise ConfigError(f"datum must be one of {', '.join(DATA)}, got {cfg.datum!r}")
    try:
        grid = cfg.grid
    except ValueError as e:
        raise ConfigError(f"grid precondition: {e}") from None
    if not 1 <= cfg.gh_order <= bt.MAX_GH_ORDER:
        raise ConfigError(f"gauss_hermite_rule precondition: gh_order in [1, {bt.MAX_GH_ORDER}], got {cfg.gh_order}")
    if cfg.mc_samples < 2:
        raise ConfigError(f"u_monte_carlo precondition: mc_samples >= 2, got {cfg.mc_samples}")
    if any(t < 0 for t in cfg.t):
        raise ConfigError(f"u_multiplier precondition: t >= 0, got {cfg.t}")
    if cfg.command != "solve" or cfg.route != "multiplier":
        if any(t <= 0 for t in cfg.t):
            raise ConfigError(f"t must be positive for command {cfg.command} route {cfg.route}, got {cfg.t}")
    if cfg.k is not None and len(cfg.k) not in (1, cfg.dim):
        raise ConfigError(f"k must have 1 or dim={cfg.dim} components")
    if cfg.command == "holder-probe":
        if cfg.dim != 1:
            raise ConfigError("holder-probe runs in dim=1")
        for a in cfg.alpha or (0.5,):
            if not 0 < a <= 1:
                raise ConfigError(f"holder_bump precondition: alpha in (0, 1], got {a}")
        s = cfg.s or HOLDER_S_DEFAULT
        if any(not 1e-4 <= v <= 1 for v in s) or any(b >= a for a, b in zip(s, s[1:])):
            raise ConfigError("probe_holder_blowup precondition: s strictly decreasing within [1e-4, 1]")
        return
    try:
        datasets.check_fits(cfg.build_datum(), grid)
    except ValueError as e:
        raise ConfigError(f"datum precondition: {e}") from None
    if cfg.dt is not None:
        if cfg.dt <= 0:
            raise ConfigError(f"dt must be positive, got {cfg.dt}")
        if cfg.route == "fd" and cfg.command in ("solve", "compare", "convergence") and cfg.dt > max_stable_dt(grid):
            raise ConfigError(f"FdScheme precondition: dt={cfg.dt} exceeds stability bound {max_stable_dt(grid):.6e}")
        if cfg.command in ("residual", "identities") and any(cfg.dt >= t for t in cfg.t):
            raise ConfigError("check_pde_residual precondition: dt < t")
    if cfg.command == "residual" and cfg.route == "fd":
        raise ConfigError("residual supports routes multiplier, gauss-hermite, monte-carlo")
    if cfg.command == "convergence" and cfg.route == "fd" and cfg.n < 16:
        raise ConfigError("fd convergence needs n >= 16 (three levels n/4, n/2, n)")


# ---------------------------------------------------------------------------
# tables


@dataclass
class ResultTable:
    columns: list
    rows: list
    config: RunConfig
    routes: tuple = ()
    comments: list = field(default_factory=list)
    # spatial tables: number of leading coordinate columns and the grid shape
    coord_cols: int = 0
    grid_shape: tuple = ()
    passed: Optional[bool] = None

    def header_lines(self) -> list[str]:
        lines = [f"# lksp {self.config.command}"]
        lines += [f"# {line}" for line in self.config.echo_lines()]
        lines.append(f"# config_hash={self.config.hash()}")
        lines.append(f"# routes={','.join(self.routes) if self.routes else 'none'}")
        lines += [f"# {c}" for c in self.comments]
        return lines

    def to_csv(self) -> str:
        buf = io.StringIO()
        for line in self.header_lines():
            buf.write(line + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([_cell(v) for v in row])
        return buf.getvalue()


def _cell(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.16e" % float(v)
    return str(v)


def _coords(grid: Grid) -> list[np.ndarray]:
    return [np.broadcast_to(c, grid.shape).reshape(-1) for c in grid.coords()]


def _field_table(cfg, grid, columns: dict, routes, comments=()) -> ResultTable:
    coord_names = ["x", "y", "z"][: grid.dim]
    cols = coord_names + list(columns)
    arrs = _coords(grid) + [np.asarray(v).reshape(-1) for v in columns.values()]
    rows = [list(r) for r in zip(*arrs)]
    return ResultTable(cols, rows, cfg, tuple(routes), list(comments), grid.dim, grid.shape)


# ---------------------------------------------------------------------------
# commands


def _solve_one(cfg, f, t, route):
    grid = f.grid
    if route == "multiplier":
        return bt.u_multiplier(f, t).values, None
    if route == "gauss-hermite":
        return bt.u_gauss_hermite(f, t, bt.gauss_hermite_rule(cfg.gh_order)).values, None
    if route == "monte-carlo":
        est = bt.u_monte_carlo(f, t, cfg.mc_samples, cfg.seed)
        return est.mean.values, est.std_error.values
    dt = cfg.dt if cfg.dt is not None else 0.9 * max_stable_dt(grid)
    return fd_integrate(f, t, dt).values, None


def _cmd_solve(cfg):
    grid = cfg.grid
    f = datasets.sample(cfg.build_datum(), grid)
    cols = {}
    for t in cfg.t:
        u, se = _solve_one(cfg, f, t, cfg.route)
        cols[f"u(t={t!r})"] = u
        if se is not None:
            cols[f"std_error(t={t!r})"] = se
    return _field_table(cfg, grid, cols, (cfg.route,)), 0


def _cmd_mc(cfg):
    grid = cfg.grid
    f = datasets.sample(cfg.build_datum(), grid)
    cols = {}
    comments = []
    for t in cfg.t:
        est = bt.u_monte_carlo(f, t, cfg.mc_samples, cfg.seed)
        ref = bt.u_multiplier(f, t).values
        z = np.abs(est.mean.values - ref) / np.maximum(est.std_error.values, 1e-300)
        cols[f"mean(t={t!r})"] = est.mean.values
        cols[f"std_error(t={t!r})"] = est.std_error.values
        cols[f"multiplier(t={t!r})"] = ref
        comments.append(f"t={t!r} fraction_within_{MC_SIGMAS:g}_se={np.mean(z <= MC_SIGMAS)!r}")
    return _field_table(cfg, grid, cols, ("monte-carlo", "multiplier"), comments), 0


def _cmd_compare(cfg):
    grid = cfg.grid
    f = datasets.sample(cfg.build_datum(), grid)
    t = cfg.t[0]
    ref = bt.u_multiplier(f, t).values
    scale = max(1.0, float(np.max(np.abs(ref))))
    gh, _ = _solve_one(cfg, f, t, "gauss-hermite")
    mc, se = _solve_one(cfg, f, t, "monte-carlo")
    fd, _ = _solve_one(cfg, f, t, "fd")
    err_gh = np.abs(gh - ref)
    err_mc = np.abs(mc - ref)
    err_fd = np.abs(fd - ref)
    coverage = float(np.mean(err_mc <= MC_SIGMAS * se))
    checks = {
        "gauss-hermite": float(err_gh.max()) <= GH_TOL * scale,
        "monte-carlo": coverage >= MC_COVERAGE,
        "fd": float(err_fd.max()) <= FD_TOL * scale,
    }
    comments = [
        f"gauss-hermite max_err={err_gh.max():.6e} tol={GH_TOL * scale:.6e} pass={checks['gauss-hermite']}",
        f"monte-carlo coverage_{MC_SIGMAS:g}se={coverage!r} min={MC_COVERAGE} pass={checks['monte-carlo']}",
        f"fd max_err={err_fd.max():.6e} tol={FD_TOL * scale:.6e} pass={checks['fd']}",
    ]
    cols = {"multiplier": ref, "gauss_hermite": gh, "monte_carlo": mc, "mc_std_error": se, "fd": fd,
            "err_gauss_hermite": err_gh, "err_monte_carlo": err_mc, "err_fd": err_fd}
    table = _field_table(cfg, grid, cols, ("multiplier", "gauss-hermite", "monte-carlo", "fd"), comments)
    table.passed = all(checks.values())
    return table, 0 if table.passed else 1


_REPORT_COLUMNS = ["name", "params", "abs_residual", "rel_residual", "tolerance", "pass"]


def _report_row(r: ver.ResidualReport) -> list:
    row = r.row()
    tol = "" if r.tolerance is None else float(r.tolerance)
    return [row["name"], row["params"], r.abs_residual, r.rel_residual, tol, row["pass"]]


def _cmd_identities(cfg):
    grid = cfg.grid
    f = datasets.sample(cfg.build_datum(), grid)
    rule = bt.gauss_hermite_rule(cfg.gh_order)
    pde_dt = cfg.dt if cfg.dt is not None else 1e-3
    reports = []
    for s in cfg.s or (0.5,):
        reports.append(ver.check_ds_identity(f, s, 1e-4, tolerance=1e-6))
        reports.append(ver.check_d2s_identity(f, s, 1e-3, tolerance=1e-5))
    for t in cfg.t:
        reports.append(ver.check_interchange(f, t, rule, tolerance=1e-10))
        reports.append(ver.check_pde_residual(f, t, pde_dt, "multiplier", tolerance=1e-5))
        reports.append(ver.check_pde_residual(f, t, pde_dt, "gauss_hermite", rule, tolerance=1e-5))
    table = ResultTable(_REPORT_COLUMNS, [_report_row(r) for r in reports], cfg,
                        ("multiplier", "gauss-hermite"))
    table.passed = all(r.passed for r in reports)
    return table, 0 if table.passed else 1


def _cmd_residual(cfg):
    grid = cfg.grid
    f = datasets.sample(cfg.build_datum(), grid)
    route = cfg.route.replace("-", "_")
    rule = bt.gauss_hermite_rule(cfg.gh_order) if route == "gauss_hermite" else None
    pde_dt = cfg.dt if cfg.dt is not None else 1e-3
    reports = [
        ver.check_pde_residual(f, t, pde_dt, route, rule, n_samples=cfg.mc_samples, seed=cfg.seed)
        for t in cfg.t
    ]
    table = ResultTable(_REPORT_COLUMNS, [_report_row(r) for r in reports], cfg, (cfg.route,))
    table.passed = all(r.passed for r in reports)
    return table, 0 if table.passed else 1


def _cmd_convergence(cfg):
    t = cfg.t[0]
    datum = cfg.build_datum()
    rows = []
    if cfg.route == "fd":
        levels = [cfg.n // 4, cfg.n // 2, cfg.n]
        errs = []
        for n in levels:
            g = make_grid(cfg.dim, n, cfg.length)
            f = datasets.sample(datum, g)
            dt = 0.9 * max_stable_dt(g)
            errs.append(max_abs_diff(fd_integrate(f, t, dt), bt.u_multiplier(f, t)))
        param = "n"
        values = levels
    elif cfg.route == "gauss-hermite":
        f = datasets.sample(datum, cfg.grid)
        ref = bt.u_multiplier(f, t)
        values = sorted({o for o in (4, 8, 16, 32, 64, 128, 256) if o <= cfg.gh_order} | {cfg.gh_order})
        errs = [max_abs_diff(bt.u_gauss_hermite(f, t, bt.gauss_hermite_rule(o)), ref) for o in values]
        param = "gh_order"
    elif cfg.route == "monte-carlo":
        f = datasets.sample(datum, cfg.grid)
        values = sorted({m for m in (100, 1000, 10_000, 100_000) if m <= cfg.mc_samples} | {cfg.mc_samples})
        errs = [float(np.mean(bt.u_monte_carlo(f, t, m, cfg.seed).std_error.values)) for m in values]
        param = "mc_samples"
    else:
        raise ConfigError("convergence needs route fd, gauss-hermite or monte-carlo")
    for i, (p, e) in enumerate(zip(values, errs)):
        order = ""
        if i > 0 and e > 0 and errs[i - 1] > 0:
            order = math.log(errs[i - 1] / e) / math.log(p / values[i - 1])
        rows.append([p, e, order])
    col = "error" if cfg.route != "monte-carlo" else "mean_std_error"
    return ResultTable([param, col, "observed_order"], rows, cfg, (cfg.route, "multiplier")), 0


def _cmd_holder(cfg):
    s_values = cfg.s or HOLDER_S_DEFAULT
    rows = []
    comments = []
    for a in cfg.alpha or (0.5,):
        rep = ver.probe_holder_blowup(a, s_values, t=cfg.t[0])
        for s, v in zip(rep.s_values, rep.norms):
            rows.append([a, s, v])
        comments.append(
            f"alpha={a!r} slope={rep.slope!r} terminal_slope={rep.terminal_slope!r} "
            f"origin_slope={rep.extra['origin_slope']!r} "
            f"bound_exponent={rep.bound_exponent!r} resolved={rep.resolved} "
            f"integral_stable={rep.integral_stable} status={rep.status}"
        )
    return ResultTable(["alpha", "s", "sup_d4v"], rows, cfg, ("direct-quadrature",), comments), 0


_COMMANDS = {
    "solve": _cmd_solve,
    "compare": _cmd_compare,
    "mc": _cmd_mc,
    "identities": _cmd_identities,
    "residual": _cmd_residual,
    "convergence": _cmd_convergence,
    "holder-probe": _cmd_holder,
}


def _output_path(cfg: RunConfig) -> Optional[Path]:
    if cfg.output:
        return Path(cfg.output)
    out_dir = os.environ.get(OUTPUT_DIR_ENV)
    if out_dir:
        return Path(out_dir) / f"{cfg.command}-{cfg.hash()}.csv"
    return None


def run(cfg: RunConfig, stdout=None) -> tuple[ResultTable, int]:
    """Execute ``cfg``; write the CSV (and plot data if requested)."""
    table, code = _COMMANDS[cfg.command](cfg)
    text = table.to_csv()
    path = _output_path(cfg)
    if path is None:
        (stdout or sys.stdout).write(text)
    else:
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(text)
    if cfg.plotdata:
        emit_plotdata(table, cfg.plotdata)
    return table, code


# ---------------------------------------------------------------------------
# plot data


def _write_columns(path: Path, names, arrays) -> None:
    with open(path, "w") as fh:
        fh.write("# " + " ".join(names) + "\n")
        for row in zip(*arrays):
            fh.write(" ".join("%.16e" % float(v) for v in row) + "\n")


def emit_plotdata(table: ResultTable, path) -> list[Path]:
    """Whitespace-separated column files under directory ``path``.

    Spatial tables give one file per axis, sliced through the origin node;
    other tables give one file with their numeric columns (nonpositive
    values dropped for log-log use in convergence tables).
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise OSError(f"cannot write plot data to {out}: {e}") from e
    stem = f"{table.config.command}-{table.config.hash()}"
    written = []
    if table.coord_cols:
        d = table.coord_cols
        shape = table.grid_shape
        data = np.array([[float(v) for v in r] for r in table.rows]).reshape(shape + (len(table.columns),))
        origin = tuple(s // 2 for s in shape)
        for ax in range(d):
            idx = tuple(slice(None) if j == ax else origin[j] for j in range(d))
            sl = data[idx]
            names = [table.columns[ax]] + table.columns[d:]
            arrays = [sl[:, ax]] + [sl[:, j] for j in range(d, len(table.columns))]
            p = out / (f"{stem}.dat" if d == 1 else f"{stem}_axis{ax}.dat")
            _write_columns(p, names, arrays)
            written.append(p)
        return written
    numeric = [j for j, _ in enumerate(table.columns)
               if all(isinstance(r[j], (int, float, np.integer, np.floating)) and not isinstance(r[j], bool)
                      for r in table.rows)]
    rows = table.rows
    if table.config.command == "convergence":
        rows = [r for r in rows if r[0] > 0 and r[1] > 0]
        numeric = [0, 1]
    p = out / f"{stem}.dat"
    _write_columns(p, [table.columns[j] for j in numeric], [[r[j] for r in rows] for j in numeric])
    written.append(p)
    return written


# ---------------------------------------------------------------------------


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = argparse.ArgumentParser(
        prog="lksp",
        description="Linearized KS solver via the imaginary-Brownian-time representation.",
        epilog="Keys: " + ", ".join(_PARSERS) + ". Example: lksp command=solve datum=bump radius=8 t=1",
    )
    ap.add_argument("--config", help="file of key=value lines ('#' starts a comment)")
    ap.add_argument("settings", nargs="*", help="key=value overrides (also accepted as --key=value)")
    args, extra = ap.parse_known_args(argv)
    try:
        text = Path(args.config).read_text() if args.config else ""
        cfg = parse_config(text, list(args.settings) + list(extra))
    except (ConfigError, OSError) as e:
        print(f"lksp: configuration error: {e}", file=sys.stderr)
        return 2
    try:
        _, code = run(cfg)
    except ConfigError as e:
        print(f"lksp: configuration error: {e}", file=sys.stderr)
        return 2
    return code


if __name__ == "__main__":
    sys.exit(main())
