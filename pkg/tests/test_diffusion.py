import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from evswitch.diffusion import (
    DiscountedOU,
    OUParams,
    laplace_upward,
    psi,
    psi_ode_oracle,
    psi_prime,
    psi_second,
    scale_density,
    speed_density,
)
from evswitch.errors import DomainError

from paramgen import LOMBARDY_OU

ou_params = st.builds(
    OUParams.from_mean_level,
    st.floats(min_value=-0.2, max_value=0.3),
    st.floats(min_value=0.05, max_value=3.0),
    st.floats(min_value=0.01, max_value=0.3),
)
rhos = st.floats(min_value=0.005, max_value=0.2)


@pytest.mark.parametrize("kwargs", [dict(a=0.1, b=0.0, sigma=0.1), dict(a=0.1, b=-1.0, sigma=0.1),
                                    dict(a=0.1, b=1.0, sigma=0.0), dict(a=math.nan, b=1.0, sigma=0.1)])
def test_ou_params_validation(kwargs):
    with pytest.raises(DomainError):
        OUParams(**kwargs)


def test_ou_derived_quantities():
    p = OUParams.from_mean_level(0.1045, 0.5941, 0.09)
    assert p.a == pytest.approx(0.1045 * 0.5941, rel=1e-15)
    assert p.mean_level == pytest.approx(0.1045, rel=1e-15)
    assert p.x_scale == pytest.approx(0.09 / math.sqrt(2 * 0.5941), rel=1e-15)
    assert p.stationary_std == pytest.approx(p.x_scale, rel=1e-15)


def test_discount_rate_must_be_positive():
    with pytest.raises(DomainError):
        DiscountedOU(LOMBARDY_OU, 0.0)


@settings(max_examples=40, deadline=None)
@given(ou_params, rhos, st.floats(min_value=-4.0, max_value=4.0), st.floats(min_value=0.05, max_value=3.0))
def test_psi_positive_and_increasing(p, rho, u, du):
    m = DiscountedOU(p, rho)
    x1 = p.mean_level + u * p.x_scale
    x2 = x1 + du * p.x_scale
    assert psi(m, x1) > 0
    assert psi_prime(m, x1) > 0
    assert psi(m, x2) > psi(m, x1)


@settings(max_examples=15, deadline=None)
@given(ou_params, rhos)
def test_psi_matches_ode_oracle(p, rho):
    m = DiscountedOU(p, rho)
    grid = p.mean_level + p.x_scale * np.linspace(-5, 5, 11)
    ratios = psi_ode_oracle(m, grid, x_anchor=p.mean_level)
    direct = np.array([psi(m, x) for x in grid]) / psi(m, p.mean_level)
    np.testing.assert_allclose(direct, ratios, rtol=1e-8)


@settings(max_examples=30, deadline=None)
@given(ou_params, rhos, st.floats(min_value=-4.0, max_value=4.0))
def test_derivatives_match_finite_differences(p, rho, u):
    m = DiscountedOU(p, rho)
    x = p.mean_level + u * p.x_scale
    h = 1e-4 * p.x_scale
    fd1 = (psi(m, x + h) - psi(m, x - h)) / (2 * h)
    fd2 = (psi_prime(m, x + h) - psi_prime(m, x - h)) / (2 * h)
    assert psi_prime(m, x) == pytest.approx(fd1, rel=1e-6)
    assert psi_second(m, x) == pytest.approx(fd2, rel=1e-6)


@settings(max_examples=30, deadline=None)
@given(ou_params, rhos, st.floats(min_value=-4.0, max_value=4.0))
def test_generator_annihilates_psi(p, rho, u):
    # independent second derivative by central differences of psi itself
    m = DiscountedOU(p, rho)
    x = p.mean_level + u * p.x_scale
    h = 1e-3 * p.x_scale
    d2 = (psi(m, x + h) - 2 * psi(m, x) + psi(m, x - h)) / h**2
    terms = (0.5 * p.sigma**2 * d2, (p.a - p.b * x) * psi_prime(m, x), -rho * psi(m, x))
    assert abs(sum(terms)) <= 1e-6 * max(abs(t) for t in terms)


@given(ou_params, st.floats(min_value=-10.0, max_value=10.0))
def test_speed_times_scale_is_constant(p, u):
    x = p.mean_level + u * p.x_scale
    assert speed_density(p, x) * scale_density(p, x) == pytest.approx(2 / p.sigma**2, rel=1e-12)


def test_densities_normalised_at_mean_and_vectorised():
    p = LOMBARDY_OU
    assert scale_density(p, p.mean_level) == pytest.approx(1.0)
    xs = np.linspace(-0.1, 0.3, 5)
    out = speed_density(p, xs)
    assert out.shape == xs.shape
    assert out[2] == pytest.approx(speed_density(p, float(xs[2])))
    # speed density is the (unnormalised) stationary Gaussian density
    ratio = speed_density(p, xs) / speed_density(p, p.mean_level)
    np.testing.assert_allclose(ratio, np.exp(-((xs - p.mean_level) ** 2) / (2 * p.stationary_std**2)), rtol=1e-12)


def test_laplace_upward():
    m = DiscountedOU(LOMBARDY_OU, 0.05)
    val = laplace_upward(m, 0.02, 0.2)
    assert 0 < val < 1
    assert val == pytest.approx(psi(m, 0.02) / psi(m, 0.2))
    with pytest.raises(DomainError):
        laplace_upward(m, 0.2, 0.2)


def test_ode_oracle_rejects_grid_outside_window():
    m = DiscountedOU(LOMBARDY_OU, 0.05)
    with pytest.raises(DomainError):
        psi_ode_oracle(m, [LOMBARDY_OU.mean_level + 9 * LOMBARDY_OU.x_scale], LOMBARDY_OU.mean_level)
    with pytest.raises(DomainError):
        psi_ode_oracle(m, [0.1, 0.05], LOMBARDY_OU.mean_level)
