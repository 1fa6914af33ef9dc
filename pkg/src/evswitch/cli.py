"""Command-line front end.

Every subcommand resolves a RunConfig (defaults, then ``--config`` file, then
flags), calls one library routine and writes a table.  Exit codes: 0 success,
2 usage or configuration error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys

import numpy as np

from . import calibration, mc, sensitivity, solver
from .config import RunConfig, build_config, load_config
from .errors import ConfigError, DomainError, NumericFailure

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_NUMERIC = 3

DEFAULT_LAMBDA_GRID = "0:12:13"
DEFAULT_K_GRID = "0:6000:13"

# flag -> config key
_OVERRIDES = {
    "ell": "ell",
    "lambda": "lambda",
    "c": "c",
    "invest": "invest",
    "incentive": "incentive",
    "rho": "rho",
    "a_over_b": "a_over_b",
    "b": "b",
    "sigma": "sigma",
    "x0": "x0",
    "seed": "seed",
    "n_paths": "n_paths",
    "dt": "dt",
    "t_max": "t_max",
    "out": "output_path",
    "format": "output_format",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _common_flags() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("run options")
    g.add_argument("--config", metavar="PATH", help="flat JSON config file")
    g.add_argument("--seed", type=int, metavar="N")
    g.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    g.add_argument("--format", choices=("csv", "json"))
    m = p.add_argument_group("model overrides")
    m.add_argument("--ell", type=float, help="km driven per year")
    m.add_argument("--lambda", dest="lambda", type=float, help="traffic bans per year")
    m.add_argument("--c", type=float, help="cost per ban (EUR)")
    m.add_argument("--invest", type=float, help="purchase price of the electric vehicle (EUR)")
    m.add_argument("--incentive", type=float, help="purchase incentive k (EUR)")
    m.add_argument("--rho", type=float, help="discount rate per year")
    m.add_argument("--a-over-b", dest="a_over_b", type=float, help="OU mean level (EUR/km)")
    m.add_argument("--b", type=float, help="OU mean-reversion speed per year")
    m.add_argument("--sigma", type=float, help="OU volatility")
    m.add_argument("--x0", type=float, help="initial opportunity cost (EUR/km)")
    return p


def _mc_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n-paths", dest="n_paths", type=int)
    p.add_argument("--dt", type=float, help="time step in years")
    p.add_argument("--t-max", dest="t_max", type=float, help="censoring horizon in years")


def build_parser() -> argparse.ArgumentParser:
    common = _common_flags()
    parser = _Parser(prog="evswitch", description="Optimal switching to an electric vehicle.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sub.add_parser("solve", parents=[common], help="threshold and values at x0")

    p = sub.add_parser("value", parents=[common], help="value functions on an x grid")
    p.add_argument("--x-min", type=float)
    p.add_argument("--x-max", type=float)
    p.add_argument("--points", type=int, default=81)

    p = sub.add_parser("sensitivity", parents=[common], help="comparative statics of x*")
    p.add_argument("--params", default=",".join(q.value for q in sensitivity.Param))

    p = sub.add_parser("calibrate", parents=[common], help="fit the OU model to a price CSV")
    p.add_argument("prices", metavar="CSV")

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo expected switching time")
    _mc_flags(p)

    p = sub.add_parser("surface", parents=[common], help="policy surface over (lambda, k)")
    _mc_flags(p)
    p.add_argument("--lambda-grid", default=DEFAULT_LAMBDA_GRID, help="start:stop:num or v1,v2,...")
    p.add_argument("--k-grid", default=DEFAULT_K_GRID, help="start:stop:num or v1,v2,...")
    return parser


def parse_grid(spec: str) -> np.ndarray:
    """``start:stop:num`` (inclusive linspace) or a comma-separated list."""
    try:
        if ":" in spec:
            start, stop, num = spec.split(":")
            n = int(num)
            if n < 1:
                raise ValueError
            return np.linspace(float(start), float(stop), n)
        return np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise ConfigError(f"bad grid specification {spec!r}") from None


def resolve_config(args: argparse.Namespace) -> RunConfig:
    file_values = load_config(args.config) if args.config else {}
    overrides = {key: getattr(args, flag) for flag, key in _OVERRIDES.items() if hasattr(args, flag)}
    return build_config(file_values, overrides)


# ---------------------------------------------------------------- formatting


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return "nan" if math.isnan(v) else ("inf" if v > 0 else "-inf")
    if isinstance(v, np.generic):
        return _jsonable(v.item())
    return v


def _header(cfg: RunConfig, command: str) -> dict:
    return {"command": command, "config_hash": cfg.config_hash(), "seed": cfg.mc.seed}


def render(cfg: RunConfig, command: str, columns, rows, fmt: str) -> str:
    """Render a table; CSV gets a ``#`` comment header, JSON gets header keys."""
    head = _header(cfg, command)
    if fmt == "csv":
        buf = io.StringIO()
        buf.write("# " + " ".join(f"{k}={v}" for k, v in head.items()) + "\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(columns)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])
        return buf.getvalue()
    records = [{c: _jsonable(v) for c, v in zip(columns, row)} for row in rows]
    doc = dict(head)
    if len(records) == 1 and command in ("solve", "calibrate", "simulate"):
        doc.update(records[0])
    else:
        doc["rows"] = records
    return json.dumps(doc, indent=2) + "\n"


# ---------------------------------------------------------------- commands


def cmd_solve(cfg: RunConfig, args) -> tuple[list, list]:
    sol = solver.solve(cfg.cost, cfg.ou)
    x0 = cfg.mc.x0
    rec = sol.as_dict()
    rec.update(
        x0=x0,
        v_hat_x0=float(solver.v_hat(cfg.cost, cfg.ou, x0)),
        u_x0=solver.value_u(cfg.cost, cfg.ou, sol, x0),
        v_x0=solver.value_total(cfg.cost, cfg.ou, sol, x0),
    )
    return list(rec), [list(rec.values())]


def cmd_value(cfg: RunConfig, args) -> tuple[list, list]:
    sol = solver.solve(cfg.cost, cfg.ou)
    m, s = cfg.ou.mean_level, cfg.ou.x_scale
    lo = args.x_min if args.x_min is not None else m - 4 * s
    hi = args.x_max if args.x_max is not None else m + 4 * s
    if args.points < 2 or not hi > lo:
        raise ConfigError("value grid needs x_max > x_min and at least 2 points")
    rows = []
    for x in np.linspace(lo, hi, args.points):
        x = float(x)
        rows.append([
            x,
            float(solver.v_hat(cfg.cost, cfg.ou, x)),
            solver.value_u(cfg.cost, cfg.ou, sol, x),
            solver.value_total(cfg.cost, cfg.ou, sol, x),
        ])
    return ["x", "v_hat", "u", "v"], rows


def cmd_sensitivity(cfg: RunConfig, args) -> tuple[list, list]:
    try:
        params = [sensitivity.Param(p.strip()) for p in args.params.split(",") if p.strip()]
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    sol = solver.solve(cfg.cost, cfg.ou)
    reports = [sensitivity.dxstar(p, cfg.cost, cfg.ou, sol).as_dict() for p in params]
    cols = ["param", "derivative", "sign", "fd_check", "rel_gap"]
    return cols, [[r[c] for c in cols] for r in reports]


def cmd_calibrate(cfg: RunConfig, args) -> tuple[list, list]:
    try:
        series = calibration.read_price_csv(args.prices)
    except OSError as exc:
        raise ConfigError(f"{args.prices}: {exc.strerror}") from None
    res = calibration.calibrate(series, cfg.fuel_economy).as_dict()
    return list(res), [list(res.values())]


def cmd_simulate(cfg: RunConfig, args) -> tuple[list, list]:
    sol = solver.solve(cfg.cost, cfg.ou)
    est = mc.expected_switch_time(cfg.ou, cfg.cost, cfg.mc).as_dict()
    rec = {"x_star": sol.x_star, "x0": cfg.mc.x0, "dt": cfg.mc.dt, "t_max": cfg.mc.t_max, **est}
    return list(rec), [list(rec.values())]


def cmd_surface(cfg: RunConfig, args) -> tuple[list, list]:
    surf = mc.policy_surface(
        cfg.ou, cfg.cost, parse_grid(args.lambda_grid), parse_grid(args.k_grid), cfg.mc
    )
    return list(mc.SURFACE_COLUMNS), [list(r) for r in surf.rows()]


COMMANDS = {
    "solve": (cmd_solve, "json"),
    "value": (cmd_value, "csv"),
    "sensitivity": (cmd_sensitivity, "csv"),
    "calibrate": (cmd_calibrate, "json"),
    "simulate": (cmd_simulate, "json"),
    "surface": (cmd_surface, "csv"),
}


def run(args: argparse.Namespace) -> str:
    cfg = resolve_config(args)
    fn, default_fmt = COMMANDS[args.command]
    columns, rows = fn(cfg, args)
    text = render(cfg, args.command, columns, rows, cfg.output_format or default_fmt)
    if cfg.output_path:
        try:
            with open(cfg.output_path, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise ConfigError(f"{cfg.output_path}: {exc.strerror}") from None
    else:
        sys.stdout.write(text)
    return text


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        run(args)
    except (ConfigError, DomainError) as exc:
        print(f"evswitch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"evswitch: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
