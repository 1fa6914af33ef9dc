"""Run configuration: a flat JSON document, CLI overrides, Lombardy defaults."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

from .calibration import FuelEconomy
from .diffusion import OUParams
from .errors import ConfigError, EvSwitchError
from .mc import McConfig
from .solver import CostParams

__all__ = ["DEFAULTS", "RunConfig", "load_config", "build_config"]

# Lombardy scenario: household driving, ban and purchase costs with an OU fitted to regional prices.
DEFAULTS: dict = {
    "ell": 12000.0,
    "lambda": 7.272,
    "c": 150.0,
    "invest": 25000.0,
    "incentive": 6000.0,
    "rho": 0.05,
    "a_over_b": 0.1045,
    "b": 0.5941,
    "sigma": 0.090,
    "x0": 0.02,
    "n_paths": 10000,
    "dt": 1.0 / 360.0,
    "t_max": 100.0,
    "seed": 20190320,
    "h_f": 0.076,
    "h_e": 0.20,
    "output_path": None,
    "output_format": None,  # None: each subcommand picks its natural format
}

_INT_KEYS = {"n_paths", "seed"}
_STR_KEYS = {"output_path", "output_format"}


@dataclass(frozen=True)
class RunConfig:
    ou: OUParams
    cost: CostParams
    mc: McConfig
    fuel_economy: FuelEconomy
    output_path: str | None
    output_format: str | None

    def to_flat_dict(self) -> dict:
        return {
            "ell": self.cost.ell,
            "lambda": self.cost.lam,
            "c": self.cost.c,
            "invest": self.cost.invest,
            "incentive": self.cost.incentive,
            "rho": self.cost.rho,
            "a_over_b": self.ou.mean_level,
            "b": self.ou.b,
            "sigma": self.ou.sigma,
            "x0": self.mc.x0,
            "n_paths": self.mc.n_paths,
            "dt": self.mc.dt,
            "t_max": self.mc.t_max,
            "seed": self.mc.seed,
            "h_f": self.fuel_economy.h_f,
            "h_e": self.fuel_economy.h_e,
            "output_path": self.output_path,
            "output_format": self.output_format,
        }

    def config_hash(self) -> str:
        d = self.to_flat_dict()
        # where the output goes does not change the result
        d.pop("output_path")
        d.pop("output_format")
        blob = json.dumps(d, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]


def _key_line(text: str, key: str) -> int | None:
    m = re.search(r'"' + re.escape(key) + r'"\s*:', text)
    return None if m is None else text.count("\n", 0, m.start()) + 1


def _coerce(key: str, value, where: str):
    if key in _STR_KEYS:
        if value is not None and not isinstance(value, str):
            raise ConfigError(f"{where}: {key} must be a string")
        return value
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: {key} must be a number, got {value!r}")
    if key in _INT_KEYS:
        if int(value) != value:
            raise ConfigError(f"{where}: {key} must be an integer, got {value!r}")
        return int(value)
    return float(value)


def load_config(path) -> dict:
    """Parse a flat JSON config file into a dict of validated scalar values."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}:1: config must be a JSON object")
    out = {}
    for key, value in raw.items():
        line = _key_line(text, key)
        where = f"{path}:{line}" if line else str(path)
        if key not in DEFAULTS:
            raise ConfigError(f"{where}: unknown config key {key!r}")
        out[key] = _coerce(key, value, where)
    return out


def build_config(file_values: dict | None = None, overrides: dict | None = None) -> RunConfig:
    """Merge defaults, file values and CLI overrides (later wins) and validate."""
    values = dict(DEFAULTS)
    for src in (file_values or {}, overrides or {}):
        for k, v in src.items():
            if v is not None:
                values[k] = v
    if values["output_format"] not in (None, "csv", "json"):
        raise ConfigError(f"output_format must be csv or json, got {values['output_format']!r}")
    try:
        ou = OUParams.from_mean_level(values["a_over_b"], values["b"], values["sigma"])
        cost = CostParams(
            ell=values["ell"],
            lam=values["lambda"],
            c=values["c"],
            invest=values["invest"],
            incentive=values["incentive"],
            rho=values["rho"],
        )
        mc = McConfig(
            n_paths=values["n_paths"],
            dt=values["dt"],
            t_max=values["t_max"],
            seed=values["seed"],
            x0=values["x0"],
        )
        fe = FuelEconomy(values["h_f"], values["h_e"])
    except EvSwitchError as exc:
        raise ConfigError(f"invalid configuration: {exc}") from None
    return RunConfig(ou, cost, mc, fe, values["output_path"], values["output_format"])
