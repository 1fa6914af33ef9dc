"""Comparative statics of the switching threshold.

For y in {ell, lam, c, k} the implicit-function theorem applied to
A(x, y) = (x - beta(y)) psi'(x) - psi(x) gives dx*/dy = -A_y / A_x with
A_x = (x* - beta) psi''(x*) = psi(x*) psi''(x*) / psi'(x*) at the root,
and A_y = -psi'(x*) dbeta/dy.  Volatility enters psi itself, so its
derivative is taken numerically.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .diffusion import DiscountedOU, OUParams, psi, psi_prime, psi_second
from .errors import DomainError, NumericFailure
from .solver import CostParams, ThresholdSolution, solve_threshold

__all__ = [
    "Param",
    "SensitivityReport",
    "dxstar",
    "closed_form_derivative",
    "fd_derivative",
    "sigma_monotonicity_check",
]


class Param(str, enum.Enum):
    ELL = "ell"
    LAMBDA = "lambda"
    C = "c"
    K = "k"
    SIGMA = "sigma"


@dataclass(frozen=True)
class SensitivityReport:
    param_name: Param
    derivative: float
    sign: str
    fd_check: float
    rel_gap: float

    def as_dict(self) -> dict:
        return {
            "param": self.param_name.value,
            "derivative": self.derivative,
            "sign": self.sign,
            "fd_check": self.fd_check,
            "rel_gap": self.rel_gap,
        }


def _sign(v: float) -> str:
    return "+" if v > 0 else "-" if v < 0 else "0"


def _get(cost: CostParams, ou: OUParams, param: Param) -> float:
    return {
        Param.ELL: cost.ell,
        Param.LAMBDA: cost.lam,
        Param.C: cost.c,
        Param.K: cost.incentive,
        Param.SIGMA: ou.sigma,
    }[param]


def _with(cost: CostParams, ou: OUParams, param: Param, value: float):
    if param is Param.SIGMA:
        return cost, OUParams(a=ou.a, b=ou.b, sigma=value)
    field = {Param.ELL: "ell", Param.LAMBDA: "lam", Param.C: "c", Param.K: "incentive"}[param]
    return cost.replace(**{field: value}), ou


def closed_form_derivative(
    param: Param, cost: CostParams, ou: OUParams, sol: ThresholdSolution, ax_tol: float = 1e-300
) -> float:
    """dx*/dy for y in {ell, lambda, c, k}."""
    param = Param(param)
    if param is Param.SIGMA:
        raise DomainError("no closed form for sigma; use fd_derivative")
    if not sol.is_interior:
        raise DomainError("comparative statics need an interior threshold")
    m = DiscountedOU(ou, cost.rho)
    x = sol.x_star
    p0, p1 = psi(m, x), psi_prime(m, x)
    p2 = psi_second(m, x)
    a_x = p0 * p2 / p1
    if not abs(a_x) > ax_tol:
        raise NumericFailure("A_x vanishes at the threshold; implicit function is degenerate")
    k_rb = (cost.rho + ou.b) / cost.ell
    # -(psi')^2 * (coefficient) / (psi psi'')
    factor = {
        Param.ELL: k_rb / cost.ell * (cost.net_cost - cost.lam * cost.c / cost.rho),
        Param.LAMBDA: cost.c / cost.rho * k_rb,
        Param.C: cost.lam / cost.rho * k_rb,
        Param.K: k_rb,
    }[param]
    return -(p1 * p1) * factor / (p0 * p2) + 0.0  # + 0.0 folds -0.0 into 0.0


def _x_star_at(cost: CostParams, ou: OUParams, param: Param, value: float) -> float:
    c2, o2 = _with(cost, ou, param, value)
    return solve_threshold(c2, o2).x_star


def fd_derivative(
    param: Param,
    cost: CostParams,
    ou: OUParams,
    rel_step: float = 1e-4,
    step: float | None = None,
) -> float:
    """Finite-difference dx*/dy, central where the parameter allows it."""
    param = Param(param)
    p = _get(cost, ou, param)
    h = step if step is not None else rel_step * (abs(p) if p != 0 else 1.0)
    lower_bound = 0.0  # every parameter here is non-negative
    upper_bound = cost.invest if param is Param.K else math.inf
    if p - h > lower_bound and p + h < upper_bound:
        return (_x_star_at(cost, ou, param, p + h) - _x_star_at(cost, ou, param, p - h)) / (2 * h)
    # second-order one-sided difference at the edge of the admissible range
    f0 = _x_star_at(cost, ou, param, p)
    if p + 2 * h < upper_bound:
        f1 = _x_star_at(cost, ou, param, p + h)
        f2 = _x_star_at(cost, ou, param, p + 2 * h)
        return (-3 * f0 + 4 * f1 - f2) / (2 * h)
    f1 = _x_star_at(cost, ou, param, p - h)
    f2 = _x_star_at(cost, ou, param, p - 2 * h)
    return (3 * f0 - 4 * f1 + f2) / (2 * h)


def _gap(a: float, b: float) -> float:
    scale = max(abs(a), abs(b))
    return 0.0 if scale == 0 else abs(a - b) / scale


def dxstar(
    param: Param,
    cost: CostParams,
    ou: OUParams,
    sol: ThresholdSolution | None = None,
    rel_step: float = 1e-4,
    tol: float = 1e-3,
) -> SensitivityReport:
    """Sensitivity of the threshold to one parameter, with a finite-difference check.

    For sigma the derivative itself is the (Richardson-refined) central
    difference, and ``fd_check`` is the plain central difference.
    """
    param = Param(param)
    if sol is None:
        sol = solve_threshold(cost, ou)
    if not sol.is_interior:
        raise DomainError("comparative statics need an interior threshold")
    p = _get(cost, ou, param)
    h = rel_step * (abs(p) if p != 0 else 1.0)

    fd = fd_derivative(param, cost, ou, step=h)
    if param is Param.SIGMA:
        fd_half = fd_derivative(param, cost, ou, step=h / 2)
        deriv = (4 * fd_half - fd) / 3
        return SensitivityReport(param, deriv, _sign(deriv), fd, _gap(deriv, fd))

    deriv = closed_form_derivative(param, cost, ou, sol)
    gap = _gap(deriv, fd)
    if gap > tol:
        fd_half = fd_derivative(param, cost, ou, step=h / 2)
        fd = (4 * fd_half - fd) / 3
        gap = _gap(deriv, fd)
    return SensitivityReport(param, deriv, _sign(deriv), fd, gap)


def sigma_monotonicity_check(cost: CostParams, ou: OUParams, sigma_grid) -> tuple[bool, np.ndarray]:
    """Solve x* along an ascending sigma grid; True iff the sequence strictly increases."""
    grid = np.asarray(sigma_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("sigma_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("sigma_grid must be strictly ascending")
    xs = np.array([_x_star_at(cost, ou, Param.SIGMA, s) for s in grid])
    return bool(np.all(np.diff(xs) > 0)), xs
