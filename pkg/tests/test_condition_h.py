import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st

from lrd_quadforms.condition_h import (
    PRODUCT_BOUND,
    TWO_LINE,
    FailsLemmaRegion,
    HoldsByLemma,
    NumericFinite,
    NumericUnstable,
    analytic_verdict,
    check_condition_h,
    numeric_verdict,
    sample_proposal,
)
from lrd_quadforms.config import ConditionHSettings, Settings, use_settings
from lrd_quadforms.errors import AdmissibilityError, DimensionMismatchError, ParameterError
from lrd_quadforms.models import Isotropic, OneDirection, Product, TwoLines, WhiteNoise
from lrd_quadforms.quadratic_forms import QuadraticFormSpec
from lrd_quadforms.rng import RngStream

DELTA0 = QuadraticFormSpec.delta([0])


def form_with_beta(beta, d=1):
    return QuadraticFormSpec(d, (((0,) * d, 1.0),), beta=beta, l2_zero=1.0)


def test_isotropic_inside_region_holds():
    verdict = check_condition_h(Isotropic(1, -0.35), DELTA0)
    assert isinstance(verdict, HoldsByLemma)
    assert verdict.holds
    assert verdict.region == PRODUCT_BOUND


def test_isotropic_outside_region_names_the_inequality():
    verdict = check_condition_h(Isotropic(1, -0.1), DELTA0)
    assert isinstance(verdict, FailsLemmaRegion)
    assert not verdict.holds
    assert verdict.violated.startswith("alpha + beta < -d/4")


def test_two_lines_region():
    spec = QuadraticFormSpec.delta([0, 0])
    verdict = check_condition_h(TwoLines(-0.3, -0.3, 0.0, 1.0), spec)
    assert isinstance(verdict, HoldsByLemma)
    assert verdict.region == TWO_LINE
    failing = check_condition_h(TwoLines(-0.2, -0.2, 0.0, 1.0), spec)
    assert isinstance(failing, FailsLemmaRegion)
    assert "alpha_p + alpha_q + beta < -1/2" in failing.violated


def test_product_model_region_in_two_dimensions():
    spec = QuadraticFormSpec.delta([0, 0])
    assert check_condition_h(Product(2, -0.6), spec).holds
    assert not check_condition_h(Product(2, -0.4), spec).holds


@settings(max_examples=60, deadline=None)
@given(
    alpha=st.floats(min_value=-0.49, max_value=-0.01),
    beta=st.floats(min_value=-0.45, max_value=0.45),
    step=st.floats(min_value=0.0, max_value=0.3),
)
def test_verdict_is_monotone_in_alpha(alpha, beta, step):
    smaller = alpha - step
    assume(smaller > -0.5)
    spec = form_with_beta(beta)
    if analytic_verdict(Isotropic(1, alpha), spec).holds:
        assert analytic_verdict(Isotropic(1, smaller), spec).holds


@pytest.mark.parametrize("alpha", np.linspace(-0.45, -0.05, 5))
@pytest.mark.parametrize("beta", np.linspace(-0.45, -0.05, 5))
def test_region_grid(alpha, beta):
    verdict = analytic_verdict(Isotropic(1, float(alpha)), form_with_beta(float(beta)))
    assert verdict.holds == (alpha + beta < -0.25)


def test_power_count_reports_worst_exponent():
    verdict = check_condition_h(Isotropic(1, -0.35), DELTA0, power_count=True)
    assert verdict.worst_d_inf == pytest.approx(-0.4)
    assert verdict.to_dict()["worst_d_inf"] == pytest.approx(-0.4)


def test_verdict_dicts():
    holds = check_condition_h(Isotropic(1, -0.35), DELTA0).to_dict()
    assert holds["verdict"] == "HoldsByLemma"
    assert "worst_d_inf" not in holds
    fails = check_condition_h(Isotropic(1, -0.1), DELTA0).to_dict()
    assert fails == {"verdict": "FailsLemmaRegion", "region": PRODUCT_BOUND, "violated": fails["violated"]}


def test_analytic_method_without_region():
    spec = QuadraticFormSpec.delta([1, 0])
    with pytest.raises(AdmissibilityError):
        check_condition_h(OneDirection(-0.3, 1.0), spec, method="analytic")


def test_unknown_method_and_dimension_mismatch():
    with pytest.raises(ParameterError):
        check_condition_h(Isotropic(1, -0.3), DELTA0, method="guess")
    with pytest.raises(DimensionMismatchError):
        check_condition_h(Isotropic(2, -0.6), DELTA0)


def test_proposal_log_density_matches_draws():
    generator = np.random.default_rng(3)
    theta = np.array([-0.6, 0.0])
    u, log_q = sample_proposal(generator, theta, 2000)
    assert u.shape == (2000, 2)
    assert np.all(np.isfinite(log_q[np.all(u != 0, axis=1)]))
    # P(|U| <= 1) = 2^-(theta + 1) for this proposal
    for column, th in enumerate(theta):
        share = np.mean(np.abs(u[:, column]) <= 1.0)
        assert share == pytest.approx(2.0 ** -(th + 1.0), abs=0.05)


def test_numeric_path_is_used_without_analytic_region():
    use_settings(Settings(condition_h=ConditionHSettings(base_samples=512, doublings=1)))
    verdict = check_condition_h(WhiteNoise(1), DELTA0, rng=RngStream(11))
    assert isinstance(verdict, (NumericFinite, NumericUnstable))
    assert verdict.note == "no analytic region; numeric only"
    assert len(verdict.to_dict()["estimates"]) == 2


def test_numeric_verdict_is_deterministic():
    model, spec = OneDirection(-0.4, 1.0), QuadraticFormSpec.delta([1, 0])
    a = numeric_verdict(model, spec, RngStream(5), base_samples=256, doublings=2)
    b = numeric_verdict(model, spec, RngStream(5), base_samples=256, doublings=2)
    assert a == b
    assert len(a.estimates) == 3


@pytest.mark.slow
def test_numeric_estimate_is_stable_deep_inside_region():
    verdict = check_condition_h(Isotropic(1, -0.45), QuadraticFormSpec.delta([0]), method="numeric", rng=RngStream(1))
    assert isinstance(verdict, NumericFinite)
    assert verdict.estimate > 0


@pytest.mark.slow
def test_two_line_power_count():
    verdict = check_condition_h(TwoLines(-0.3, -0.3, 0.0, 1.0), QuadraticFormSpec.delta([0, 0]), power_count=True)
    assert verdict.worst_d_inf < 0


@pytest.mark.slow
@pytest.mark.parametrize("alpha,beta", [(-0.45, -0.05), (-0.35, -0.15), (-0.25, -0.25)])
def test_numeric_estimate_stabilizes_inside_region(alpha, beta):
    form = form_with_beta(beta)
    assert analytic_verdict(Isotropic(1, alpha), form).holds
    verdict = numeric_verdict(Isotropic(1, alpha), form, rng=RngStream(8))
    assert isinstance(verdict, NumericFinite)


@pytest.mark.slow
@pytest.mark.parametrize("alpha,beta", [(-0.05, -0.05), (-0.15, -0.05), (-0.05, -0.15)])
def test_numeric_estimate_does_not_stabilize_outside_region(alpha, beta):
    form = form_with_beta(beta)
    assert not analytic_verdict(Isotropic(1, alpha), form).holds
    verdict = numeric_verdict(Isotropic(1, alpha), form, rng=RngStream(8))
    assert isinstance(verdict, NumericUnstable)
