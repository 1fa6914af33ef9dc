import math

import numpy as np
import pytest
from hypothesis import given, settings

from evswitch.errors import DomainError
from evswitch.sensitivity import (
    Param,
    closed_form_derivative,
    dxstar,
    fd_derivative,
    sigma_monotonicity_check,
)
from evswitch.solver import solve, solve_threshold

from paramgen import LOMBARDY_COST, LOMBARDY_OU, interior_params


@pytest.mark.parametrize("param,sign", [
    (Param.LAMBDA, "-"), (Param.C, "-"), (Param.K, "-"), (Param.SIGMA, "+"), (Param.ELL, "+"),
])
def test_lombardy_signs(param, sign):
    r = dxstar(param, LOMBARDY_COST, LOMBARDY_OU)
    assert r.sign == sign
    assert r.rel_gap <= 1e-3


def test_lombardy_values_regression():
    assert dxstar(Param.LAMBDA, LOMBARDY_COST, LOMBARDY_OU).derivative == pytest.approx(-0.01578059130, rel=1e-8)
    assert dxstar(Param.K, LOMBARDY_COST, LOMBARDY_OU).derivative == pytest.approx(-5.2601971e-6, rel=1e-7)


def test_ell_sign_follows_ban_cost_versus_net_price():
    # without bans lam c / rho = 0 < I - k, so more driving lowers the threshold
    cost = LOMBARDY_COST.replace(lam=0.0)
    r = dxstar(Param.ELL, cost, LOMBARDY_OU)
    assert r.sign == "-"


def test_zero_derivative_when_bans_cost_nothing():
    cost = LOMBARDY_COST.replace(c=0.0)
    sol = solve(cost, LOMBARDY_OU)
    assert closed_form_derivative(Param.LAMBDA, cost, LOMBARDY_OU, sol) == 0.0
    assert math.copysign(1.0, closed_form_derivative(Param.LAMBDA, cost, LOMBARDY_OU, sol)) == 1.0


@settings(max_examples=12, deadline=None)
@given(interior_params())
def test_closed_forms_match_finite_differences(params):
    cost, ou = params
    sol = solve_threshold(cost, ou)
    for p in (Param.ELL, Param.LAMBDA, Param.C, Param.K):
        r = dxstar(p, cost, ou, sol)
        assert r.rel_gap <= 1e-3 or abs(r.derivative - r.fd_check) <= 1e-12


@settings(max_examples=12, deadline=None)
@given(interior_params())
def test_derivative_signs(params):
    cost, ou = params
    sol = solve_threshold(cost, ou)
    assert closed_form_derivative(Param.K, cost, ou, sol) < 0
    assert closed_form_derivative(Param.LAMBDA, cost, ou, sol) <= 0
    assert closed_form_derivative(Param.C, cost, ou, sol) <= 0
    d_ell = closed_form_derivative(Param.ELL, cost, ou, sol)
    driver = cost.lam * cost.c / cost.rho - cost.net_cost
    assert d_ell * driver >= 0


def test_sigma_sweep_increasing():
    ok, xs = sigma_monotonicity_check(LOMBARDY_COST, LOMBARDY_OU, np.linspace(0.05, 0.13, 5))
    assert ok
    np.testing.assert_allclose(xs[2], 0.03325802869425214, atol=1e-12)


@pytest.mark.parametrize("grid", [[], [0.1, 0.05], [[0.05, 0.1]]])
def test_sigma_grid_validation(grid):
    with pytest.raises(DomainError):
        sigma_monotonicity_check(LOMBARDY_COST, LOMBARDY_OU, grid)


def test_sigma_has_no_closed_form():
    sol = solve(LOMBARDY_COST, LOMBARDY_OU)
    with pytest.raises(DomainError):
        closed_form_derivative(Param.SIGMA, LOMBARDY_COST, LOMBARDY_OU, sol)


def test_non_interior_cases_rejected():
    cost = LOMBARDY_COST.replace(ell=0.0, lam=0.0)
    with pytest.raises(DomainError):
        dxstar(Param.K, cost, LOMBARDY_OU)


def test_one_sided_difference_at_zero_incentive():
    cost = LOMBARDY_COST.replace(incentive=0.0)
    sol = solve(cost, LOMBARDY_OU)
    fd = fd_derivative(Param.K, cost, LOMBARDY_OU, step=1.0)
    assert fd == pytest.approx(closed_form_derivative(Param.K, cost, LOMBARDY_OU, sol), rel=1e-5)


def test_report_as_dict():
    d = dxstar("c", LOMBARDY_COST, LOMBARDY_OU).as_dict()
    assert d["param"] == "c" and d["sign"] == "-"
