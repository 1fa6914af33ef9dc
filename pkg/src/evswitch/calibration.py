"""Calibration of the OU opportunity cost from monthly fuel and electricity prices.

The per-km opportunity cost is X_t = p_fuel * h_f - p_elec * h_e.  An AR(1)
X_{t+1} = alpha + phi X_t + eps is fitted by OLS on the monthly series and
mapped to annualised OU coefficients through the exact discretisation

    phi = exp(-b dt),   alpha / (1 - phi) = a / b,
    Var(eps) = sigma^2 (1 - phi^2) / (2 b).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import stats

from .diffusion import OUParams
from .errors import DomainError

__all__ = [
    "CSV_HEADER",
    "PriceSeries",
    "FuelEconomy",
    "Ar1Fit",
    "TrendTest",
    "CalibrationResult",
    "read_price_csv",
    "write_price_csv",
    "opportunity_cost",
    "build_opportunity_series",
    "trend_test",
    "fit_ar1",
    "fit_ar1_to_ou",
    "asymptotic_std_errors",
    "calibrate",
]

CSV_HEADER = ("date", "fuel_eur_per_liter", "electricity_eur_per_kwh")
MONTH = 1.0 / 12.0


def _parse_month(s: str) -> tuple[int, int]:
    parts = s.strip().split("-")
    if len(parts) != 2 or len(parts[0]) != 4 or len(parts[1]) != 2:
        raise DomainError(f"bad month identifier {s!r}, expected YYYY-MM")
    year, month = int(parts[0]), int(parts[1])
    if not 1 <= month <= 12:
        raise DomainError(f"bad month in {s!r}")
    return year, month


@dataclass(frozen=True)
class PriceSeries:
    timestamps: tuple[str, ...]
    fuel_price: np.ndarray
    electricity_price: np.ndarray

    def __post_init__(self):
        fuel = np.asarray(self.fuel_price, dtype=float)
        elec = np.asarray(self.electricity_price, dtype=float)
        object.__setattr__(self, "fuel_price", fuel)
        object.__setattr__(self, "electricity_price", elec)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        n = len(self.timestamps)
        if fuel.shape != (n,) or elec.shape != (n,):
            raise DomainError("timestamps and price series must have equal lengths")
        if n < 24:
            raise DomainError(f"need at least 24 monthly observations, got {n}")
        if not (np.all(np.isfinite(fuel)) and np.all(np.isfinite(elec))):
            raise DomainError("prices must be finite")
        if np.any(fuel <= 0) or np.any(elec <= 0):
            raise DomainError("prices must be strictly positive")
        months = [y * 12 + (m - 1) for y, m in map(_parse_month, self.timestamps)]
        gaps = np.diff(months)
        if np.any(gaps != 1):
            i = int(np.flatnonzero(gaps != 1)[0])
            raise DomainError(
                f"timestamps must be consecutive months: {self.timestamps[i]} -> {self.timestamps[i + 1]}"
            )

    def __len__(self) -> int:
        return len(self.timestamps)


@dataclass(frozen=True)
class FuelEconomy:
    h_f: float = 0.076  # liter / km
    h_e: float = 0.20  # kWh / km

    def __post_init__(self):
        if not (self.h_f > 0 and self.h_e > 0):
            raise DomainError("fuel economies must be positive")


@dataclass(frozen=True)
class Ar1Fit:
    intercept: float
    slope: float
    resid_std: float
    cov: np.ndarray  # OLS covariance of (intercept, slope)
    n_regressions: int


@dataclass(frozen=True)
class TrendTest:
    slope: float
    p_value: float
    reject: bool


@dataclass(frozen=True)
class CalibrationResult:
    ou: OUParams
    ar1_intercept: float
    ar1_slope: float
    resid_std: float
    trend_p_value: float
    n_obs: int
    se_mean_level: float
    se_b: float
    se_sigma: float

    def as_dict(self) -> dict:
        return {
            "a": self.ou.a,
            "b": self.ou.b,
            "sigma": self.ou.sigma,
            "a_over_b": self.ou.mean_level,
            "ar1_intercept": self.ar1_intercept,
            "ar1_slope": self.ar1_slope,
            "resid_std": self.resid_std,
            "trend_p_value": self.trend_p_value,
            "n_obs": self.n_obs,
            "se_a_over_b": self.se_mean_level,
            "se_b": self.se_b,
            "se_sigma": self.se_sigma,
        }


def read_price_csv(path) -> PriceSeries:
    """Read the monthly price file; errors carry the offending line number."""
    path = Path(path)
    dates, fuel, elec = [], [], []
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(h.strip() for h in header) != CSV_HEADER:
            raise DomainError(f"{path}:1: expected header {','.join(CSV_HEADER)}")
        for row in reader:
            line = reader.line_num
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 3:
                raise DomainError(f"{path}:{line}: expected 3 columns, got {len(row)}")
            try:
                _parse_month(row[0])
                fuel.append(float(row[1]))
                elec.append(float(row[2]))
            except (ValueError, DomainError) as exc:
                raise DomainError(f"{path}:{line}: {exc}") from None
            dates.append(row[0].strip())
    return PriceSeries(tuple(dates), np.array(fuel), np.array(elec))


def write_price_csv(series: PriceSeries, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CSV_HEADER)
        for d, f, e in zip(series.timestamps, series.fuel_price, series.electricity_price):
            w.writerow([d, f"{f:.6f}", f"{e:.6f}"])


def opportunity_cost(fuel_price, electricity_price, fe: FuelEconomy = FuelEconomy()) -> np.ndarray:
    """Elementwise p_fuel * h_f - p_elec * h_e (EUR per km)."""
    fuel = np.asarray(fuel_price, dtype=float)
    elec = np.asarray(electricity_price, dtype=float)
    if fuel.shape != elec.shape:
        raise DomainError("fuel and electricity series differ in length")
    return fuel * fe.h_f - elec * fe.h_e


def build_opportunity_series(p: PriceSeries, fe: FuelEconomy = FuelEconomy()) -> np.ndarray:
    return opportunity_cost(p.fuel_price, p.electricity_price, fe)


def trend_test(x, significance: float = 0.05) -> TrendTest:
    """Two-sided t-test on the slope of an OLS regression of x on time."""
    x = np.asarray(x, dtype=float)
    if x.size < 10:
        raise DomainError("trend test needs at least 10 observations")
    if np.ptp(x) == 0:
        raise DomainError("trend test is undefined for a constant series")
    res = stats.linregress(np.arange(x.size, dtype=float), x)
    p = float(res.pvalue)
    return TrendTest(slope=float(res.slope), p_value=p, reject=p < significance)


def fit_ar1(x) -> Ar1Fit:
    """OLS of x[t+1] on (1, x[t])."""
    x = np.asarray(x, dtype=float)
    if x.size < 3:
        raise DomainError("AR(1) fit needs at least 3 observations")
    design = np.column_stack([np.ones(x.size - 1), x[:-1]])
    target = x[1:]
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    resid = target - design @ coef
    n = target.size
    s2 = float(resid @ resid) / (n - 2)
    cov = s2 * np.linalg.inv(design.T @ design)
    return Ar1Fit(float(coef[0]), float(coef[1]), math.sqrt(s2), cov, n)


def _sigma_log_slope(phi: float) -> float:
    """d log(sigma) / d phi at fixed residual std."""
    return 0.5 * (1.0 / (phi * math.log(phi)) + 2.0 * phi / (1.0 - phi * phi))


def asymptotic_std_errors(ou: OUParams, n_regressions: int, dt: float = MONTH) -> dict:
    """Large-sample standard errors of (a/b, b, sigma) for given true parameters."""
    phi = math.exp(-ou.b * dt)
    s = ou.sigma * math.sqrt((1 - phi * phi) / (2 * ou.b))
    n = n_regressions
    var_phi = (1 - phi * phi) / n
    se_b = math.sqrt(var_phi) / (phi * dt)
    se_mean = s / (math.sqrt(n) * (1 - phi))
    se_sigma = ou.sigma * math.sqrt(1.0 / (2 * n) + _sigma_log_slope(phi) ** 2 * var_phi)
    return {"a_over_b": se_mean, "b": se_b, "sigma": se_sigma}


def fit_ar1_to_ou(x, dt: float = MONTH) -> CalibrationResult:
    x = np.asarray(x, dtype=float)
    if x.size < 24:
        raise DomainError(f"need at least 24 observations, got {x.size}")
    fit = fit_ar1(x)
    phi, alpha, s = fit.slope, fit.intercept, fit.resid_std
    if not 0 < phi < 1:
        raise DomainError(f"AR(1) slope {phi:.4f} outside (0, 1): data are not mean-reverting")
    if not s > 0:
        raise DomainError("zero residual variance: volatility is not identifiable")
    b = -math.log(phi) / dt
    mean = alpha / (1 - phi)
    sigma = s * math.sqrt(2 * b / (1 - phi * phi))

    # plug-in delta-method standard errors
    n = fit.n_regressions
    var_phi = fit.cov[1, 1]
    grad_mean = np.array([1 / (1 - phi), alpha / (1 - phi) ** 2])
    se_mean = math.sqrt(float(grad_mean @ fit.cov @ grad_mean))
    se_b = math.sqrt(var_phi) / (phi * dt)
    se_sigma = sigma * math.sqrt(1.0 / (2 * n) + _sigma_log_slope(phi) ** 2 * var_phi)

    try:
        p_trend = trend_test(x).p_value
    except DomainError:
        p_trend = float("nan")
    return CalibrationResult(
        ou=OUParams.from_mean_level(mean, b, sigma),
        ar1_intercept=alpha,
        ar1_slope=phi,
        resid_std=s,
        trend_p_value=p_trend,
        n_obs=int(x.size),
        se_mean_level=se_mean,
        se_b=se_b,
        se_sigma=se_sigma,
    )


def calibrate(series: PriceSeries, fe: FuelEconomy = FuelEconomy()) -> CalibrationResult:
    return fit_ar1_to_ou(build_opportunity_series(series, fe))
