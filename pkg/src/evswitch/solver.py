"""Free-boundary solver for the switching problem.

The owner pays a running cost ell * X_t + lam * c until switching and the net
purchase price I - k at the switching time.  The value splits as
V = V_hat + U, where V_hat is the discounted cost of never switching and U
is the value of the option to switch.  For an OU opportunity cost the
option is exercised the first time X reaches a threshold x_star, which
solves

    A(x) = (x - beta) psi'(x) - psi(x) = 0   on (x_hat, inf).

The same threshold is the zero of the integral form

    F(x) = int_{-inf}^{x} psi(y) m'(y) (ell y + lam c - rho (I - k)) dy,

which ``solve_threshold_integral`` evaluates by quadrature as an
independent check.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

from scipy import integrate, optimize

from .diffusion import DiscountedOU, OUParams, psi, psi_prime, speed_density
from .errors import DomainError, NumericFailure, NumericRangeError
from .special_fn import Y_LIMIT

__all__ = [
    "CostParams",
    "Case",
    "ThresholdSolution",
    "v_hat",
    "classify",
    "beta_coeff",
    "x_hat",
    "threshold_function",
    "solve_threshold",
    "solve_threshold_integral",
    "integral_function",
    "solve",
    "value_u",
    "value_total",
]

# Usable x-range in units of the OU x_scale around the mean level.
_RANGE_SIGMAS = Y_LIMIT - 1.0


@dataclass(frozen=True)
class CostParams:
    """Economic inputs.

    ell: km driven per year; lam: traffic bans per year; c: cost per ban (EUR);
    invest: purchase price I (EUR); incentive: k (EUR); rho: discount rate per year.
    """

    ell: float
    lam: float
    c: float
    invest: float
    incentive: float
    rho: float

    def __post_init__(self):
        for name in ("ell", "lam", "c", "invest", "incentive", "rho"):
            if not math.isfinite(getattr(self, name)):
                raise DomainError(f"{name} must be finite")
        if not self.rho > 0:
            raise DomainError(f"rho must be positive, got {self.rho}")
        if self.ell < 0 or self.lam < 0 or self.c < 0:
            raise DomainError("ell, lam and c must be non-negative")
        if self.incentive < 0:
            raise DomainError(f"incentive must be non-negative, got {self.incentive}")
        if not self.invest > self.incentive:
            raise DomainError("purchase cost must exceed the incentive")

    @property
    def net_cost(self) -> float:
        return self.invest - self.incentive

    def replace(self, **changes) -> "CostParams":
        from dataclasses import replace

        return replace(self, **changes)


class Case(str, enum.Enum):
    INTERIOR = "interior"
    NEVER_SWITCH = "never_switch"
    SWITCH_IMMEDIATELY = "switch_immediately"


@dataclass(frozen=True)
class ThresholdSolution:
    """Classified outcome.  ``x_star`` is +inf for NEVER_SWITCH and -inf for
    SWITCH_IMMEDIATELY; ``beta``/``x_hat``/``residual`` are None unless interior."""

    case: Case
    x_star: float
    beta: float | None = None
    x_hat: float | None = None
    residual: float | None = None

    @property
    def is_interior(self) -> bool:
        return self.case is Case.INTERIOR

    def as_dict(self) -> dict:
        return {
            "case": self.case.value,
            "x_star": self.x_star,
            "beta": self.beta,
            "x_hat": self.x_hat,
            "residual": self.residual,
        }


def v_hat(cost: CostParams, ou: OUParams, x):
    """Discounted expected running cost of never switching, started at x."""
    mean = ou.mean_level
    return (
        mean * cost.ell / cost.rho
        + (x - mean) * cost.ell / (cost.rho + ou.b)
        + cost.lam * cost.c / cost.rho
    )


def classify(cost: CostParams) -> Case:
    if cost.ell > 0:
        # ell x + lam c sweeps (-inf, inf) over the OU state space
        return Case.INTERIOR
    ban_cost = cost.lam * cost.c
    hurdle = cost.rho * cost.net_cost
    if ban_cost < hurdle:
        return Case.NEVER_SWITCH
    if ban_cost > hurdle:
        return Case.SWITCH_IMMEDIATELY
    raise DomainError(
        "degenerate boundary: ell = 0 and lam*c == rho*(I-k); neither strict case applies"
    )


def _require_ell(cost: CostParams) -> None:
    if not cost.ell > 0:
        raise DomainError("ell must be positive for beta and x_hat (division by zero)")


def beta_coeff(cost: CostParams, ou: OUParams) -> float:
    _require_ell(cost)
    mean = ou.mean_level
    return (cost.net_cost - mean * cost.ell / cost.rho - cost.lam * cost.c / cost.rho) * (
        cost.rho + ou.b
    ) / cost.ell + mean


def x_hat(cost: CostParams) -> float:
    """Level at which the instantaneous net running cost changes sign."""
    _require_ell(cost)
    return (cost.rho * cost.net_cost - cost.lam * cost.c) / cost.ell


def _model(cost: CostParams, ou: OUParams) -> DiscountedOU:
    return DiscountedOU(ou, cost.rho)


def threshold_function(cost: CostParams, ou: OUParams, x: float) -> float:
    """A(x) = (x - beta) psi'(x) - psi(x)."""
    m = _model(cost, ou)
    return (x - beta_coeff(cost, ou)) * psi_prime(m, x) - psi(m, x)


def _x_limits(ou: OUParams) -> tuple[float, float]:
    w = _RANGE_SIGMAS * ou.x_scale
    return ou.mean_level - w, ou.mean_level + w


def _bracket(fn, cost: CostParams, ou: OUParams) -> tuple[float, float]:
    """Sign-changing bracket on (x_hat, inf): fn < 0 just above x_hat, fn -> +inf."""
    xh = x_hat(cost)
    x_min, x_max = _x_limits(ou)
    lo = xh + 1e-8 * max(1.0, abs(xh))
    if lo < x_min:
        lo = x_min
    if lo > x_max:
        raise NumericRangeError("x_hat lies beyond the representable range of psi")
    f_lo = fn(lo)
    if not f_lo < 0:
        raise NumericFailure(f"threshold function not negative at lower bracket {lo} ({f_lo})")
    step = ou.x_scale
    hi = xh + step
    for _ in range(61):
        if hi > lo:
            clamped = min(hi, x_max)
            if fn(clamped) > 0:
                return lo, clamped
            if clamped == x_max:
                raise NumericRangeError(
                    f"threshold lies above {x_max:.6g}, beyond the representable range of psi"
                )
            lo = clamped
        step *= 2.0
        hi = xh + step
    raise NumericFailure("could not bracket the threshold root")


def solve_threshold(cost: CostParams, ou: OUParams) -> ThresholdSolution:
    """Interior threshold from the algebraic smooth-fit equation."""
    if classify(cost) is not Case.INTERIOR:
        raise DomainError("solve_threshold requires an interior case (ell > 0)")
    m = _model(cost, ou)
    beta = beta_coeff(cost, ou)

    # psi grows super-exponentially; dividing by psi gives the same root with O(1) values
    def scaled(x):
        return (x - beta) * psi_prime(m, x) / psi(m, x) - 1.0

    lo, hi = _bracket(scaled, cost, ou)
    x_star = optimize.brentq(scaled, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
    residual = (x_star - beta) * psi_prime(m, x_star) - psi(m, x_star)
    return ThresholdSolution(
        case=Case.INTERIOR, x_star=x_star, beta=beta, x_hat=x_hat(cost), residual=residual
    )


def _integrand(cost: CostParams, ou: OUParams, m: DiscountedOU):
    hurdle = cost.rho * cost.net_cost - cost.lam * cost.c

    def f(y):
        return psi(m, y) * speed_density(ou, y) * (cost.ell * y - hurdle)

    return f


def _quad(f, a, b, epsabs):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=epsabs, epsrel=1e-11, limit=200)
    return val, err


def integral_function(cost: CostParams, ou: OUParams, x: float, n_sigma: float = 10.0) -> float:
    """Truncated F(x) = int_{m - n_sigma*scale}^{x} psi m' (ell y + lam c - rho(I-k)) dy."""
    m = _model(cost, ou)
    f = _integrand(cost, ou, m)
    lower = ou.mean_level - n_sigma * ou.x_scale
    if x <= lower:
        return 0.0
    val, _ = _quad(f, lower, x, epsabs=0.0)
    return val


def solve_threshold_integral(cost: CostParams, ou: OUParams, n_sigma: float = 10.0) -> float:
    """Threshold as the zero of the integral equation (oracle for ``solve_threshold``)."""
    if classify(cost) is not Case.INTERIOR:
        raise DomainError("solve_threshold_integral requires an interior case (ell > 0)")
    m = _model(cost, ou)
    f = _integrand(cost, ou, m)
    xh = x_hat(cost)
    lower = ou.mean_level - n_sigma * ou.x_scale
    if xh <= lower:
        raise NumericFailure("x_hat lies below the truncated lower limit of the integral")

    # F(x_hat) is the most negative value of F; split there so the root search
    # integrates only over (x_hat, x).
    base, _ = _quad(f, lower, xh, epsabs=0.0)
    check, _ = _quad(f, ou.mean_level - 2 * n_sigma * ou.x_scale, lower, epsabs=0.0)
    if abs(check) > 1e-9 * abs(base):
        raise NumericFailure(f"lower truncation at {n_sigma} sigma is not negligible")
    if not base < 0:
        raise NumericFailure("integral is not negative at x_hat")
    scale = abs(base)

    def F(x):
        val, _ = _quad(f, xh, x, epsabs=1e-13 * scale)
        return (base + val) / scale

    lo, hi = _bracket(F, cost, ou)
    return optimize.brentq(F, lo, hi, xtol=1e-13, rtol=1e-15, maxiter=200)


def solve(cost: CostParams, ou: OUParams) -> ThresholdSolution:
    """Classify and, for the interior case, solve for the threshold."""
    case = classify(cost)
    if case is Case.NEVER_SWITCH:
        return ThresholdSolution(case=case, x_star=math.inf)
    if case is Case.SWITCH_IMMEDIATELY:
        return ThresholdSolution(case=case, x_star=-math.inf)
    return solve_threshold(cost, ou)


def value_u(cost: CostParams, ou: OUParams, sol: ThresholdSolution, x: float) -> float:
    """Option value U(x) of being able to switch."""
    if sol.case is Case.NEVER_SWITCH:
        return 0.0
    if sol.case is Case.SWITCH_IMMEDIATELY or x >= sol.x_star:
        return cost.net_cost - v_hat(cost, ou, x)
    m = _model(cost, ou)
    ratio = psi(m, x) / psi(m, sol.x_star)
    return (cost.net_cost - v_hat(cost, ou, sol.x_star)) * ratio


def value_total(cost: CostParams, ou: OUParams, sol: ThresholdSolution, x: float) -> float:
    """Minimal expected cost V(x) = V_hat(x) + U(x)."""
    if sol.case is Case.SWITCH_IMMEDIATELY:
        return cost.net_cost
    if sol.case is Case.INTERIOR and x >= sol.x_star:
        return cost.net_cost
    return v_hat(cost, ou, x) + value_u(cost, ou, sol, x)
