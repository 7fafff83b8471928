import math

import numpy as np
import pytest

from lrd_quadforms.errors import IntegralDivergenceError
from lrd_quadforms.quadrature import (
    composite_gauss,
    cosine_transform_table,
    gauss_legendre_rule,
    integrate_1d,
    integrate_2d,
    integrate_regular,
    integrate_singular_end,
)


def test_rule_integrates_polynomials_exactly():
    nodes, weights = gauss_legendre_rule(5)
    assert weights.sum() == pytest.approx(1.0, abs=1e-14)
    assert np.sum(weights * nodes**9) == pytest.approx(0.1, abs=1e-14)


def test_composite_rule_on_smooth_function():
    assert composite_gauss(np.sin, 0.0, math.pi, 4, 10) == pytest.approx(2.0, abs=1e-12)


def test_regular_integration_with_oscillation_hint():
    res = integrate_regular(lambda x: np.cos(40 * x), 0.0, 1.0, 1e-10, frequency=40)
    assert res.value == pytest.approx(math.sin(40) / 40, abs=1e-9)


@pytest.mark.parametrize("exponent", [-0.5, -0.8, -0.95, 0.3])
def test_power_singularity_at_endpoint(exponent):
    res = integrate_singular_end(lambda x: np.abs(x) ** exponent, 0.0, 1.0, 1e-10)
    assert res.value == pytest.approx(1.0 / (exponent + 1.0), rel=1e-8)


def test_singular_end_to_the_left():
    res = integrate_singular_end(lambda x: np.abs(x - 1.0) ** -0.5, 1.0, -1.0, 1e-10)
    assert res.value == pytest.approx(2.0, rel=1e-8)


def test_interior_singular_point():
    res = integrate_1d(lambda x: np.abs(x) ** -0.6, -1.0, 2.0, [0.0], tol=1e-10)
    assert res.value == pytest.approx((1.0 + 2.0**0.4) / 0.4, rel=1e-8)


def test_singular_right_end_is_positive():
    res = integrate_1d(lambda x: np.abs(x - 1.0) ** -0.5, 0.0, 1.0, [1.0], tol=1e-10)
    assert res.value == pytest.approx(2.0, rel=1e-8)


def test_singular_at_both_ends():
    res = integrate_1d(
        lambda x: np.abs(x) ** -0.5 + np.abs(x - 1.0) ** -0.5, 0.0, 1.0, [0.0, 1.0], tol=1e-10
    )
    assert res.value == pytest.approx(4.0, rel=1e-8)


def test_reversed_limits_flip_sign():
    forward = integrate_1d(np.exp, 0.0, 1.0)
    backward = integrate_1d(np.exp, 1.0, 0.0)
    assert backward.value == pytest.approx(-forward.value, abs=1e-14)


def test_non_integrable_singularity_is_detected():
    with pytest.raises(IntegralDivergenceError):
        integrate_1d(lambda x: 1.0 / np.abs(x), 0.0, 1.0, [0.0])


def test_two_dimensional_iterated_integral():
    res = integrate_2d(
        lambda x1, x2: np.abs(x1) ** -0.5 * np.abs(x2) ** -0.5,
        (-1.0, 1.0),
        (0.0, 1.0),
        lambda x2: [0.0],
        [0.0],
        tol=1e-8,
    )
    assert res.value == pytest.approx(8.0, rel=1e-7)


def test_cosine_table_of_flat_density():
    values, error = cosine_transform_table(lambda x: np.ones_like(x), 5)
    assert values[0] == pytest.approx(2 * math.pi, abs=1e-9)
    np.testing.assert_allclose(values[1:], 0.0, atol=1e-9)
    assert error <= 1e-8


def test_cosine_table_matches_single_lag_quadrature():
    density = lambda x: np.abs(x) ** -0.6
    values, _ = cosine_transform_table(density, 8)
    assert values[0] == pytest.approx(2 * math.pi**0.4 / 0.4, rel=1e-8)
    for h in (1, 3, 8):
        single = integrate_1d(lambda x, h=h: np.cos(h * x) * density(x), 0.0, math.pi, [0.0], frequency=h)
        assert values[h] == pytest.approx(2 * single.value, abs=1e-7)
