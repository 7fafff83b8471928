import math

import numpy as np
import pytest
from scipy.special import gamma

from lrd_quadforms.covariance import (
    CovarianceTable,
    covariance,
    covariance_one_direction,
    covariance_table,
    fourier_integral,
    sinc,
    spectral_density,
    tail_constant,
)
from lrd_quadforms.errors import IntegralDivergenceError, ParameterError
from lrd_quadforms.models import Isotropic, OneDirection, Product, TwoLines, WhiteNoise
from lrd_quadforms.quadrature import integrate_2d


@pytest.mark.parametrize("d", [1, 2])
def test_white_noise_covariance(d):
    model = WhiteNoise(d)
    assert covariance(model, (0,) * d) == pytest.approx(1.0, abs=1e-14)
    assert covariance(model, (1,) + (0,) * (d - 1)) == 0.0


def test_isotropic_variance_closed_form():
    value = covariance(Isotropic(1, -0.3), 0)
    assert value == pytest.approx(2 * math.pi**0.4 / 0.4, abs=1e-8)


def test_isotropic_covariance_is_even_and_bounded():
    model = Isotropic(1, -0.3)
    r0 = covariance(model, 0)
    for h in range(1, 6):
        r = covariance(model, h)
        assert r == covariance(model, -h)
        assert abs(r) <= r0


def test_one_direction_off_line_lags_vanish():
    model = OneDirection(-0.3, 1.0)
    assert covariance(model, (1, 0)) == 0.0
    assert covariance(model, (2, 3)) == 0.0
    assert covariance(model, (2, 2)) > 0.0


def test_sinc():
    assert sinc(0) == 1.0
    assert sinc(3.0) == 0.0
    assert sinc(0.5) == pytest.approx(2 / math.pi)


def test_one_direction_closed_form_cases():
    f_tilde = lambda u: np.abs(u) ** -0.6
    assert covariance_one_direction(0.0, f_tilde, (3, 2)) == 0.0
    on_line = covariance_one_direction(1.0, f_tilde, (2, 2))
    assert on_line == pytest.approx(covariance(Isotropic(1, -0.3), 2), abs=1e-8)
    assert covariance_one_direction(2.5, f_tilde, (2, 1), sigma_tilde=3.0) == pytest.approx(
        np.sinc(-4.0) * 3.0
    )
    assert covariance_one_direction(2.5, f_tilde, (1, 1), sigma_tilde=3.0) == pytest.approx(
        np.sinc(-1.5) * 3.0
    )


@pytest.mark.slow
@pytest.mark.parametrize("alpha", [-0.1, -0.35])
@pytest.mark.parametrize("p", [0.0, 1.0, 2.0, 2.5])
def test_one_direction_closed_form_matches_2d_quadrature(alpha, p):
    model = OneDirection(alpha, p)

    def integrand(x1, x2, h):
        pts = np.stack([x1, np.full_like(x1, x2)], axis=-1)
        return np.cos(h[0] * x1 + h[1] * x2) * model.density(pts)

    for h in [(0, 0), (1, 0), (1, 1), (-2, 3), (3, -3), (2, 1)]:
        direct = integrate_2d(
            lambda x1, x2: integrand(x1, x2, h),
            (-math.pi, math.pi),
            (-math.pi, math.pi),
            model.inner_singular_points,
            tol=1e-8,
            frequency=(abs(h[0]), abs(h[1])),
        ).value
        closed = covariance_one_direction(p, model.tilde_density, h)
        assert closed == pytest.approx(direct, abs=1e-6)


def test_fourier_integral_of_squared_density():
    model = Isotropic(1, -0.1)
    assert fourier_integral(model, 0, power=2) == pytest.approx(2 * math.pi**0.6 / 0.6, rel=1e-8)


def test_fourier_integral_detects_non_square_integrable_density():
    with pytest.raises(IntegralDivergenceError):
        fourier_integral(Isotropic(1, -0.25), 0, power=2)


def test_tail_constant_values():
    assert tail_constant(-0.25, 1.0) == pytest.approx(2 * gamma(0.5) * math.cos(math.pi / 4))
    assert tail_constant(-0.25, 1.0) == pytest.approx(2.5066, abs=1e-4)
    assert abs(tail_constant(-1e-9, 1.0)) < 1e-8
    with pytest.raises(ParameterError):
        tail_constant(-0.5, 1.0)
    with pytest.raises(ParameterError):
        tail_constant(-0.3, 0.0)


@pytest.mark.slow
def test_tail_constant_matches_covariance_decay():
    model = Isotropic(1, -0.35)
    h = 5000
    ratio = covariance(model, h) * h**0.3
    assert ratio == pytest.approx(tail_constant(-0.35, 1.0), rel=0.02)


def test_covariance_table_1d_matches_single_lags():
    model = Isotropic(1, -0.3)
    table = covariance_table(model, 6)
    assert table.values.shape == (13,)
    for h in (0, 1, 4, -6):
        assert table(h) == pytest.approx(covariance(model, h), abs=1e-7)
    assert table.variance == table(0)


def test_covariance_table_one_direction():
    model = OneDirection(-0.3, 1.0)
    table = covariance_table(model, 3)
    assert table((1, 1)) == pytest.approx(covariance(model, (1, 1)), abs=1e-7)
    assert table((1, 0)) == 0.0
    np.testing.assert_allclose(table.values, table.values[::-1, ::-1], atol=1e-15)


def test_covariance_table_2d_uses_symmetry():
    model = TwoLines(-0.1, -0.1, 0.0, 1.0)
    table = covariance_table(model, 1, n_jobs=2)
    assert table((1, 0)) == pytest.approx(table((-1, 0)), abs=1e-15)
    assert abs(table((1, 1))) <= table.variance


def test_covariance_table_lookup_and_bounds():
    table = covariance_table(WhiteNoise(2), 2)
    lags = np.array([[0, 0], [1, -1], [2, 2]])
    np.testing.assert_array_equal(table.lookup(lags), [1.0, 0.0, 0.0])
    with pytest.raises(ParameterError):
        table((3, 0))
    with pytest.raises(ParameterError):
        covariance_table(WhiteNoise(1), -1)


def test_covariance_table_csv_round_trip(tmp_path):
    table = covariance_table(Isotropic(1, -0.2), 4)
    path = tmp_path / "cov.csv"
    table.write_csv(str(path))
    assert path.read_text().splitlines()[0] == "h1,r"
    loaded = CovarianceTable.read_csv(str(path))
    np.testing.assert_array_equal(loaded.values, table.values)


def test_spectral_density_accepts_scalars():
    assert spectral_density(Isotropic(1, -0.3), 0.5) == pytest.approx(0.5**-0.6)


@pytest.mark.parametrize("alpha", [-0.4, -0.2])
def test_product_variance_closed_form(alpha):
    one_axis = 2 * math.pi ** (1 + alpha) / (1 + alpha)
    assert covariance(Product(2, alpha), (0, 0)) == pytest.approx(one_axis**2, rel=1e-6)


def test_product_covariance_factorizes():
    model = Product(2, -0.4)
    axis = Isotropic(1, -0.2)
    for h in [(1, 0), (2, 1), (-1, 3)]:
        expected = covariance(axis, h[0]) * covariance(axis, h[1])
        assert covariance(model, h) == pytest.approx(expected, rel=1e-6, abs=1e-6)


def test_isotropic_2d_variance_is_positive():
    assert covariance(Isotropic(2, -0.4), (0, 0)) == pytest.approx(23.78, rel=2e-3)


def test_one_direction_table_at_large_radius():
    model = OneDirection(-0.35, 1.0)
    table = covariance_table(model, 32)
    for h in [(0, 0), (5, 5), (32, 32), (-17, -17)]:
        assert table(h) == pytest.approx(covariance(model, h), rel=1e-6, abs=1e-8)
    assert table((3, 1)) == 0.0
    assert table((32, 32)) > 0.0
