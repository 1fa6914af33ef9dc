"""Optimal switching from a fossil-fuelled to an electric vehicle under an OU opportunity cost."""

from .calibration import CalibrationResult, FuelEconomy, PriceSeries, calibrate, read_price_csv
from .diffusion import DiscountedOU, OUParams, psi, psi_prime
from .errors import ConfigError, DomainError, EvSwitchError, NumericFailure
from .mc import McConfig, McEstimate, PolicySurface, expected_switch_time, policy_surface
from .sensitivity import Param, SensitivityReport, dxstar
from .solver import (
    Case,
    CostParams,
    ThresholdSolution,
    solve,
    solve_threshold,
    solve_threshold_integral,
    v_hat,
    value_total,
    value_u,
)
from .special_fn import gamma, pcf_D

__version__ = "0.1.0"
