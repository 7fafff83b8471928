import math

import numpy as np
import pytest

from lrd_quadforms.config import LimitLawSettings, Settings, use_settings
from lrd_quadforms.errors import AdmissibilityError, ParameterError
from lrd_quadforms.kernels import kernel_H
from lrd_quadforms.limit_laws import (
    DoubleItoGrid,
    clt_variance,
    coordinate_kernel,
    double_ito_nodes,
    empirical_cov_clt_variance,
    fourier_coeff_fsq,
    gaussian_variance,
    sample_double_ito,
    sample_grid,
    sigma2_one_direction,
    truncation_tail_bound,
)
from lrd_quadforms.models import Isotropic, TwoLines, WhiteNoise
from lrd_quadforms.quadratic_forms import QuadraticFormSpec
from lrd_quadforms.rng import RngStream

DELTA0 = QuadraticFormSpec.delta([0])


def test_white_noise_clt_variance():
    assert clt_variance(WhiteNoise(1), DELTA0) == pytest.approx(2.0, rel=1e-10)
    assert clt_variance(WhiteNoise(2), QuadraticFormSpec.delta([0, 0])) == pytest.approx(2.0, rel=1e-10)


def test_fourier_coefficient_of_squared_density():
    model = Isotropic(1, -0.1)
    assert fourier_coeff_fsq(model, 0) == pytest.approx(2 * math.pi**0.6 / 0.6, rel=1e-8)
    assert abs(fourier_coeff_fsq(model, 3)) < fourier_coeff_fsq(model, 0)


@pytest.mark.parametrize("h", [0, 1, 3])
def test_delta_form_matches_empirical_cov_variance(h):
    model = Isotropic(1, -0.1)
    assert clt_variance(model, QuadraticFormSpec.delta([h])) == pytest.approx(
        empirical_cov_clt_variance(model, h), rel=1e-8
    )


def test_symmetrized_form_has_the_same_variance():
    model = Isotropic(1, -0.15)
    assert clt_variance(model, QuadraticFormSpec.delta([2])) == pytest.approx(
        clt_variance(model, QuadraticFormSpec.symmetric_delta([2])), rel=1e-10
    )


def test_clt_variance_rejects_non_square_integrable_density():
    with pytest.raises(AdmissibilityError) as excinfo:
        clt_variance(Isotropic(1, -0.25), DELTA0)
    assert "not in CLT regime" in str(excinfo.value)
    assert excinfo.value.inequality == "4 alpha > -d"


def test_gaussian_variance_estimate():
    estimate = gaussian_variance(WhiteNoise(1), DELTA0)
    assert estimate.kind == "GaussianVariance"
    assert estimate.value == pytest.approx(2.0)
    assert estimate.to_dict()["model"]["kind"] == "WhiteNoise"


def test_grid_nodes_are_mirror_symmetric():
    nodes = double_ito_nodes(8, 2.0)
    np.testing.assert_allclose(nodes, -nodes[::-1], atol=1e-15)
    assert nodes[0] == pytest.approx(-1.75)


def _grid(amplitude, resolution=8, radius=2.0):
    nodes = double_ito_nodes(resolution, radius)
    factor = 2 * math.pi * kernel_H((nodes[:, None] + nodes[None, :])[..., None])
    return DoubleItoGrid(1, resolution, radius, amplitude, factor, 1.0, -0.35)


def test_zero_amplitude_grid_is_degenerate():
    grid = _grid(np.zeros(8))
    noise = grid.draw_noise(np.random.default_rng(0), 5)
    np.testing.assert_array_equal(grid.evaluate(noise), np.zeros(5))
    assert grid.second_moment() == 0.0
    assert truncation_tail_bound(grid) == 0.0


def test_double_ito_is_even_in_the_noise():
    grid = _grid(np.abs(double_ito_nodes(8, 2.0)) ** -0.35)
    noise = grid.draw_noise(np.random.default_rng(1), 20)
    np.testing.assert_allclose(grid.evaluate(noise), grid.evaluate(-noise), rtol=1e-12, atol=1e-14)


def test_closed_form_kernel_matches_quadrature():
    nodes = double_ito_nodes(8, 2.0)
    closed = 2 * math.pi * kernel_H((nodes[:, None] + nodes[None, :])[..., None])
    numeric = coordinate_kernel(nodes, 0.0, 200.0)
    np.testing.assert_allclose(numeric, closed, atol=0.05)


def test_grid_build_validation():
    model = Isotropic(1, -0.35)
    with pytest.raises(ParameterError):
        DoubleItoGrid.build(model, DELTA0, resolution=63, radius=10.0)
    with pytest.raises(ParameterError):
        DoubleItoGrid.build(model, DELTA0, resolution=64, radius=-1.0)
    with pytest.raises(ParameterError):
        DoubleItoGrid.build(model, DELTA0, resolution=64, radius=10.0, kernel="spline")
    with pytest.raises(ParameterError):
        DoubleItoGrid.build(model, QuadraticFormSpec(1, (((0,), 1.0),), beta=0.1, l2_zero=1.0), 64, 10.0, "closed-form")


def test_grid_handles_nodes_on_singular_lines():
    grid = DoubleItoGrid.build(TwoLines(-0.3, -0.3, 1.0, -1.0), QuadraticFormSpec.delta([0, 0]), 16, 4.0)
    assert np.all(np.isfinite(grid.amplitude))
    assert grid.second_moment() > 0


def test_small_grid_variance_matches_second_moment():
    estimate = sample_double_ito(Isotropic(1, -0.35), DELTA0, resolution=64, radius=20.0, count=4000, rng=RngStream(2))
    assert estimate.kind == "DoubleIto"
    assert estimate.count == 4000
    assert not estimate.samples.flags.writeable
    assert abs(estimate.sample_variance() - estimate.second_moment) < 4 * estimate.variance_stderr()
    assert abs(float(np.mean(estimate.samples))) < 4 * estimate.mean_stderr()
    assert estimate.to_dict()["verdict"]["verdict"] == "HoldsByLemma"


def test_double_ito_refused_when_condition_fails():
    with pytest.raises(AdmissibilityError) as excinfo:
        sample_double_ito(Isotropic(1, -0.1), DELTA0, resolution=64, radius=20.0, count=10)
    assert excinfo.value.inequality.startswith("alpha + beta < -d/4")


def test_sample_count_must_be_positive():
    with pytest.raises(ParameterError):
        sample_double_ito(Isotropic(1, -0.35), DELTA0, count=0)


def test_samples_do_not_depend_on_worker_count():
    use_settings(Settings(limit_laws=LimitLawSettings(chunk_size=100)))
    grid = DoubleItoGrid.build(Isotropic(1, -0.35), DELTA0, 32, 10.0)
    one = sample_grid(grid, 450, RngStream(9), n_jobs=1)
    two = sample_grid(grid, 450, RngStream(9), n_jobs=2)
    assert one.shape == (450,)
    np.testing.assert_array_equal(one, two)


def test_quadrature_kernel_path_for_nonzero_beta():
    spec = QuadraticFormSpec(1, (((0,), 1.0),), beta=0.05, l2_zero=1.0 / (2 * math.pi))
    grid = DoubleItoGrid.build(Isotropic(1, -0.4), spec, 16, 4.0)
    assert grid.kernel_path == "quadrature"
    assert grid.second_moment() > 0


def test_sigma2_parameter_errors():
    with pytest.raises(ParameterError):
        sigma2_one_direction(-0.2, 1)
    with pytest.raises(ParameterError):
        sigma2_one_direction(-0.35, 1.5)
    with pytest.raises(ParameterError):
        sigma2_one_direction(-0.35, 1, h=(1, 1))
    with pytest.raises(ParameterError):
        sigma2_one_direction(-0.35, 1, L0=0.0)
    with pytest.raises(ParameterError):
        sigma2_one_direction(-0.35, 1, ladder=(64,))


def test_sigma2_scales_with_spectral_level_squared():
    base = sigma2_one_direction(-0.35, 1, ladder=(8, 16))
    scaled = sigma2_one_direction(-0.35, 1, L0=2.0, ladder=(8, 16))
    assert scaled.value == pytest.approx(4 * base.value, rel=1e-6)
    assert base.ladder == (8, 16)
    assert len(base.extrapolated) == 1
    assert base.to_dict()["sigma2"] == base.value


@pytest.mark.slow
def test_sigma2_ladder_is_consistent():
    estimate = sigma2_one_direction(-0.35, 1)
    assert estimate.value > 0
    assert len(estimate.scaled) == 4



@pytest.mark.slow
def test_grid_second_moment_is_stable_when_resolution_and_radius_double():
    model = Isotropic(1, -0.4)
    coarse = DoubleItoGrid.build(model, DELTA0, 512, 200.0).second_moment()
    fine = DoubleItoGrid.build(model, DELTA0, 1024, 400.0).second_moment()
    assert fine == pytest.approx(coarse, rel=0.02)
