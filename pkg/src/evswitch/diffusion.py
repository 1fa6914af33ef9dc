"""Ornstein-Uhlenbeck opportunity-cost process and its rho-harmonic functions.

The process follows dX = (a - b X) dt + sigma dW.  Its increasing fundamental
solution of (L - rho) u = 0 is

    psi(x) = exp(b (x - m)**2 / (2 sigma**2)) * D_{-rho/b}(-(x - m) sqrt(2 b) / sigma),

with m = a / b.  Written with the standardised variable
y = -(x - m) sqrt(2 b) / sigma the prefactor is exp(y**2 / 4), so psi is the
scaled cylinder function evaluated at y.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericFailure
from .special_fn import DEFAULT_QUAD, QuadratureSpec, pcf_D_scaled

__all__ = [
    "OUParams",
    "DiscountedOU",
    "psi",
    "psi_prime",
    "psi_second",
    "psi_ode_oracle",
    "scale_density",
    "speed_density",
    "laplace_upward",
]


@dataclass(frozen=True)
class OUParams:
    """Drift intercept ``a``, mean-reversion speed ``b`` and volatility ``sigma``."""

    a: float
    b: float
    sigma: float

    def __post_init__(self):
        if not (math.isfinite(self.a) and math.isfinite(self.b) and math.isfinite(self.sigma)):
            raise DomainError("OU parameters must be finite")
        if not self.b > 0:
            raise DomainError(f"mean-reversion speed b must be positive, got {self.b}")
        if not self.sigma > 0:
            raise DomainError(f"volatility sigma must be positive, got {self.sigma}")

    @classmethod
    def from_mean_level(cls, mean_level: float, b: float, sigma: float) -> "OUParams":
        return cls(a=mean_level * b, b=b, sigma=sigma)

    @property
    def mean_level(self) -> float:
        return self.a / self.b

    @property
    def stationary_std(self) -> float:
        return self.sigma / math.sqrt(2.0 * self.b)

    @property
    def x_scale(self) -> float:
        """dx per unit of the standardised cylinder argument y (equals the stationary std)."""
        return self.stationary_std


@dataclass(frozen=True)
class DiscountedOU:
    params: OUParams
    rho: float

    def __post_init__(self):
        if not (math.isfinite(self.rho) and self.rho > 0):
            raise DomainError(f"discount rate rho must be positive, got {self.rho}")

    @property
    def order(self) -> float:
        """Cylinder-function order -rho/b."""
        return -self.rho / self.params.b

    def standardise(self, x: float) -> float:
        p = self.params
        return -(x - p.mean_level) / p.x_scale


def psi(m: DiscountedOU, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Increasing fundamental solution psi_rho(x)."""
    return pcf_D_scaled(m.order, m.standardise(x), quad)


def psi_prime(m: DiscountedOU, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    # Chain rule: d/dy[exp(y^2/4) D_th(y)] = exp(y^2/4) (y/2 D_th + D'_th) and the
    # recurrence D'_th = th D_{th-1} - y/2 D_th collapse this to th exp(y^2/4) D_{th-1}.
    # Using the collapsed form avoids cancellation between y/2 D_th and D'_th.
    th = m.order
    dy_dx = -1.0 / m.params.x_scale
    return dy_dx * th * pcf_D_scaled(th - 1.0, m.standardise(x), quad)


def psi_second(m: DiscountedOU, x: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """psi'' from the ODE 0.5 sigma^2 psi'' + (a - b x) psi' - rho psi = 0."""
    p = m.params
    return (2.0 / p.sigma**2) * (m.rho * psi(m, x, quad) - (p.a - p.b * x) * psi_prime(m, x, quad))


def psi_ode_oracle(
    m: DiscountedOU,
    x_grid,
    x_anchor: float,
    rtol: float = 1e-12,
) -> np.ndarray:
    """Increasing solution of (L - rho) u = 0 by direct ODE integration.

    Independent of the cylinder-function route; used only to cross-check
    ``psi`` up to a positive constant.  The output is normalised to 1 at
    ``x_anchor``.
    """
    p = m.params
    xs = np.asarray(x_grid, dtype=float)
    if xs.ndim != 1 or xs.size == 0:
        raise DomainError("x_grid must be a non-empty 1-d sequence")
    if np.any(np.diff(xs) <= 0):
        raise DomainError("x_grid must be strictly ascending")
    half_width = 8.0 * p.x_scale
    lo_allowed, hi_allowed = p.mean_level - half_width, p.mean_level + half_width
    tol = 1e-12 * max(1.0, abs(p.mean_level), half_width)
    if xs[0] < lo_allowed - tol or xs[-1] > hi_allowed + tol:
        raise DomainError("x_grid must lie within mean_level +/- 8 sigma/sqrt(2b)")
    if not lo_allowed - tol <= x_anchor <= hi_allowed + tol:
        raise DomainError("x_anchor must lie within mean_level +/- 8 sigma/sqrt(2b)")

    # Start well below the grid where psi behaves like y**(-nu); seeding with
    # that log-slope keeps the decreasing solution's share negligible, and it
    # decays further relative to psi while integrating upward.
    y_start = 12.0
    x_start = p.mean_level - y_start * p.x_scale
    nu = m.rho / p.b
    log_slope = nu / (y_start * p.x_scale)
    u0 = 1e-8

    def rhs(x, u):
        return [u[1], (2.0 / p.sigma**2) * (m.rho * u[0] - (p.a - p.b * x) * u[1])]

    t_eval = np.unique(np.concatenate([xs, [x_anchor]]))
    sol = integrate.solve_ivp(
        rhs,
        (x_start, float(t_eval[-1])),
        [u0, u0 * log_slope],
        method="DOP853",
        t_eval=t_eval,
        rtol=rtol,
        atol=1e-300,
    )
    if sol.status != 0:
        raise NumericFailure(f"ODE oracle failed: {sol.message}")
    values = sol.y[0]
    anchor_value = values[np.searchsorted(t_eval, x_anchor)]
    out = values[np.searchsorted(t_eval, xs)] / anchor_value
    return out


def scale_density(p: OUParams, x, x_ref: float | None = None):
    """S'(x) = exp(-int_{x_ref}^x 2 (a - b y) / sigma^2 dy); x_ref defaults to a/b."""
    if x_ref is None:
        x_ref = p.mean_level
    x = np.asarray(x, dtype=float)
    expo = (p.b * x * x - 2.0 * p.a * x - p.b * x_ref * x_ref + 2.0 * p.a * x_ref) / p.sigma**2
    out = np.exp(expo)
    return float(out) if out.ndim == 0 else out


def speed_density(p: OUParams, x, x_ref: float | None = None):
    """m'(x) = 2 / (sigma^2 S'(x))."""
    if x_ref is None:
        x_ref = p.mean_level
    x = np.asarray(x, dtype=float)
    expo = (p.b * x * x - 2.0 * p.a * x - p.b * x_ref * x_ref + 2.0 * p.a * x_ref) / p.sigma**2
    out = (2.0 / p.sigma**2) * np.exp(-expo)
    return float(out) if out.ndim == 0 else out


def laplace_upward(m: DiscountedOU, x: float, y: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """E_x[exp(-rho tau_y)] for an upward target y > x."""
    if not x < y:
        raise DomainError(f"upward hitting requires x < y, got x={x}, y={y}")
    return psi(m, x, quad) / psi(m, y, quad)
