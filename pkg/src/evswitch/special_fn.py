"""Gamma function and parabolic cylinder functions of negative order.

The cylinder function is evaluated from its integral representation

    D_theta(y) = exp(-y**2/4) / Gamma(-theta) * int_0^inf t**(-theta-1) exp(-t**2/2 - y*t) dt,

valid for theta < 0.  For theta in (-1, 0) the integrand has an integrable
algebraic singularity at t = 0, which is handled by an algebraic-weight
quadrature rule rather than by the adaptive splitter alone.

``pcf_D_scaled`` returns exp(y**2/4) * D_theta(y); it is the quantity the
OU fundamental solution actually needs and stays representable where the
unscaled value and its prefactor would individually over/underflow.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import DomainError, NumericFailure, NumericRangeError, PoleError

__all__ = [
    "QuadratureSpec",
    "DEFAULT_QUAD",
    "Y_LIMIT",
    "gamma",
    "pcf_D",
    "pcf_D_scaled",
    "pcf_D_prime",
]

# Largest |y| accepted by the cylinder-function routines.
Y_LIMIT = 30.0

# Gamma(x) overflows a double for x above this value.
GAMMA_OVERFLOW = 171.62437695630271

# Lanczos approximation, g = 7, n = 9.
_LANCZOS_G = 7.0
_LANCZOS_COEF = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_subdivisions: int = 200

    def __post_init__(self):
        if not self.abs_tol > 0:
            raise DomainError(f"abs_tol must be positive, got {self.abs_tol}")
        if not self.rel_tol > 0:
            raise DomainError(f"rel_tol must be positive, got {self.rel_tol}")
        if int(self.max_subdivisions) < 1:
            raise DomainError(f"max_subdivisions must be >= 1, got {self.max_subdivisions}")


DEFAULT_QUAD = QuadratureSpec()


def gamma(x: float) -> float:
    """Euler's Gamma function for real ``x``.

    Raises ``PoleError`` at 0, -1, -2, ... and ``NumericRangeError`` when the
    result overflows.
    """
    x = float(x)
    if not math.isfinite(x):
        raise DomainError(f"gamma argument must be finite, got {x}")
    if x <= 0 and x == math.floor(x):
        raise PoleError(f"gamma has a pole at {x}")
    if x > GAMMA_OVERFLOW:
        raise NumericRangeError(f"gamma({x}) overflows double precision")
    if x < 0.5:
        # reflection: Gamma(x) Gamma(1-x) = pi / sin(pi x)
        s = math.sin(math.pi * x)
        return math.pi / (s * gamma(1.0 - x))

    z = x - 1.0
    acc = _LANCZOS_COEF[0]
    for i, c in enumerate(_LANCZOS_COEF[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    # split the power so t**(z+0.5) cannot overflow before exp(-t) is applied
    half = t ** ((z + 0.5) / 2.0)
    return math.sqrt(2.0 * math.pi) * half * (half * math.exp(-t)) * acc


def _check_args(theta: float, y: float) -> None:
    if not theta < 0:
        raise DomainError(f"cylinder function order must be negative, got {theta}")
    if not math.isfinite(y):
        raise DomainError(f"cylinder function argument must be finite, got {y}")
    if abs(y) > Y_LIMIT:
        raise NumericRangeError(f"|y| = {abs(y):g} exceeds the supported range {Y_LIMIT:g}")


def _log_integrand(t: float, nu: float, y: float, shift: float) -> float:
    return (nu - 1.0) * math.log(t) - 0.5 * t * t - y * t - shift


def _upper_limit(nu: float, y: float, shift: float, quad: QuadratureSpec) -> float:
    """Truncation point T such that both the integrand at T and the tail
    integral beyond T are below ``abs_tol * 1e-3`` (in shifted units)."""
    target = math.log(quad.abs_tol * 1e-3)
    t = max(-y, 0.0) + max(1.0, math.sqrt(max(nu - 1.0, 0.0))) + 2.0
    for _ in range(400):
        if t > 1.0:
            log_f = _log_integrand(t, nu, y, shift)
            slope = (nu - 1.0) / t - t - y
            # log f is concave for t > 1, so the tail is bounded by f(T) / |(log f)'(T)|
            if slope < 0 and log_f < target and log_f - math.log(-slope) < target:
                return t
        t += 0.5
    raise NumericFailure(f"could not truncate cylinder integral (theta={-nu}, y={y})")


def _shifted_integral(nu: float, y: float, quad: QuadratureSpec) -> tuple[float, float]:
    """Return (I, shift) with int_0^inf t**(nu-1) exp(-t**2/2 - y t) dt = I * exp(shift)."""
    shift = 0.5 * y * y if y < 0 else 0.0
    upper = _upper_limit(nu, y, shift, quad)

    def f(t):
        return np.exp(-0.5 * t * t - y * t - shift)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(
            f,
            0.0,
            upper,
            weight="alg",
            wvar=(nu - 1.0, 0.0),
            epsabs=quad.abs_tol,
            epsrel=quad.rel_tol,
            limit=int(quad.max_subdivisions),
            full_output=1,
        )
    value, abserr, info = out[0], out[1], out[2]
    if len(out) > 3:
        # ier > 0: subdivision limit, roundoff or divergence
        tol = max(quad.abs_tol, quad.rel_tol * abs(value))
        if not abserr <= 10 * tol:
            raise NumericFailure(
                f"cylinder integral did not converge (theta={-nu}, y={y}): {out[3]}"
            )
    if not value > 0:
        raise NumericFailure(f"cylinder integral non-positive (theta={-nu}, y={y})")
    return value, shift


def pcf_D_scaled(theta: float, y: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """exp(y**2/4) * D_theta(y) for theta < 0."""
    _check_args(theta, y)
    nu = -theta
    value, shift = _shifted_integral(nu, y, quad)
    return value * math.exp(shift) / gamma(nu)


def pcf_D(theta: float, y: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """Parabolic cylinder function D_theta(y), theta < 0."""
    _check_args(theta, y)
    nu = -theta
    value, shift = _shifted_integral(nu, y, quad)
    log_scale = shift - 0.25 * y * y
    return value * math.exp(log_scale) / gamma(nu)


def pcf_D_prime(theta: float, y: float, quad: QuadratureSpec = DEFAULT_QUAD) -> float:
    """d/dy D_theta(y) via D'_theta(y) = theta D_{theta-1}(y) - (y/2) D_theta(y)."""
    return theta * pcf_D(theta - 1.0, y, quad) - 0.5 * y * pcf_D(theta, y, quad)
