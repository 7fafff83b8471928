import json
import math
from dataclasses import replace
from pathlib import Path

import pytest

from lrd_quadforms.covariance import covariance_table
from lrd_quadforms.diagnostics import estimate_scaling_exponent
from lrd_quadforms.errors import AdmissibilityError, InvalidConfigError
from lrd_quadforms.harness import ExperimentConfig, regime_guard, run_experiment
from lrd_quadforms.limit_laws import empirical_cov_clt_variance
from lrd_quadforms.models import Isotropic, OneDirection, WhiteNoise
from lrd_quadforms.quadratic_forms import QuadraticFormSpec
from lrd_quadforms.wick import wick_variance_empirical_cov

DELTA0 = QuadraticFormSpec.delta([0])
CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def white_noise_config(**overrides):
    params = dict(model=WhiteNoise(1), ladder=(64, 128, 256), replicates=400, nu=0.5, spec=DELTA0, seed=3)
    params.update(overrides)
    return ExperimentConfig(**params)


@pytest.mark.parametrize("overrides", [
    {"ladder": ()},
    {"ladder": (128, 64)},
    {"ladder": (0, 8)},
    {"statistic": "median"},
    {"sampler": "mcmc"},
    {"replicates": 1},
    {"oversample": 0},
    {"spec": None},
    {"spec": QuadraticFormSpec.delta([0, 0])},
    {"statistic": "empirical_cov", "spec": None},
    {"statistic": "empirical_cov", "spec": None, "lag": (2,), "margin": 1},
    {"sampler": "exact", "ladder": (8, 5000)},
])
def test_invalid_configs_are_rejected(overrides):
    with pytest.raises(InvalidConfigError):
        white_noise_config(**overrides)


def test_margin_defaults_to_the_lag():
    config = white_noise_config(statistic="empirical_cov", spec=None, lag=(3,))
    assert config.margin == 3
    assert config.form == QuadraticFormSpec.delta([3])


def test_config_dict_round_trip_and_digest():
    config = white_noise_config()
    again = ExperimentConfig.from_dict(json.loads(json.dumps(config.to_dict())))
    assert again.to_dict() == config.to_dict()
    assert again.digest() == config.digest()
    assert white_noise_config(seed=4).digest() != config.digest()


def test_from_dict_errors(tmp_path):
    raw = white_noise_config().to_dict()
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_dict(dict(raw, colour="blue"))
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_dict({k: v for k, v in raw.items() if k != "nu"})
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_dict(dict(raw, model={"kind": "isotropic", "dimension": 1, "alpha": -0.7}))
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_json(str(tmp_path / "missing.json"))
    broken = tmp_path / "broken.json"
    broken.write_text("{ladder: ")
    with pytest.raises(InvalidConfigError):
        ExperimentConfig.from_json(str(broken))


def test_from_dict_infers_statistic_from_lag():
    config = ExperimentConfig.from_dict({
        "model": {"kind": "isotropic", "dimension": 1, "alpha": -0.1},
        "lag": 2, "ladder": [32, 64], "replicates": 10, "nu": 0.5,
    })
    assert config.statistic == "empirical_cov"
    assert config.lag == (2,)


def test_white_noise_has_no_analytic_region_and_is_central():
    assert regime_guard(white_noise_config())["regime"] == "central"


def test_gaussian_rate_refused_inside_non_central_region():
    config = white_noise_config(model=Isotropic(1, -0.35))
    with pytest.raises(AdmissibilityError) as excinfo:
        regime_guard(config)
    assert excinfo.value.inequality == "alpha + beta < -d/4"
    assert excinfo.value.exit_code == 2


def test_non_central_rate_accepted_inside_region():
    regime = regime_guard(white_noise_config(model=Isotropic(1, -0.35), nu=0.3))
    assert regime["regime"] == "non-central"
    assert regime["expected_nu"] == pytest.approx(0.3)


def test_non_central_rate_refused_outside_region():
    with pytest.raises(AdmissibilityError) as excinfo:
        regime_guard(white_noise_config(model=Isotropic(1, -0.1), nu=0.8))
    assert excinfo.value.inequality.startswith("alpha + beta < -d/4")


def test_one_direction_regimes():
    base = dict(model=OneDirection(-0.35, 1.0), statistic="empirical_cov", spec=None, lag=(1, 0), ladder=(8, 16))
    with pytest.raises(AdmissibilityError) as excinfo:
        regime_guard(white_noise_config(nu=1.0, **base))
    assert excinfo.value.inequality == "alpha < -1/4"
    regime = regime_guard(white_noise_config(nu=0.8, **base))
    assert regime["regime"] == "one-direction-anomalous"
    assert regime["expected_nu"] == pytest.approx(0.8)
    mild = dict(base, model=OneDirection(-0.2, 1.0))
    assert regime_guard(white_noise_config(nu=1.0, **mild))["regime"] == "central"


def test_white_noise_experiment_recovers_variance():
    report = run_experiment(white_noise_config())
    assert report.complete
    assert [entry["n"] for entry in report.per_n] == [64, 128, 256]
    for entry in report.per_n:
        moments = entry["normalized"]
        assert abs(moments["variance"] - 2.0) < 4 * moments["variance_se"]
        assert abs(moments["mean"]) < 4 * moments["mean_se"]
    assert report.regression["slope"] == pytest.approx(-1.0, abs=0.25)
    assert report.references["clt_variance"] == pytest.approx(2.0)
    assert report.regime["regime"] == "central"


def test_report_does_not_depend_on_worker_count():
    config = white_noise_config(ladder=(16, 32), replicates=50)
    one = run_experiment(config, n_jobs=1)
    two = run_experiment(config, n_jobs=2)
    assert one.to_json() == two.to_json()
    assert any("indicative" in note for note in one.notes)
    assert one.variance_claims is False
    assert json.loads(one.to_json())["variance_claims"] is False


def test_exact_sampler_reports_wick_z_scores():
    config = white_noise_config(
        model=Isotropic(1, -0.1),
        sampler="exact",
        statistic="empirical_cov",
        spec=None,
        lag=(1,),
        ladder=(16, 32),
        replicates=300,
    )
    report = run_experiment(config)
    for entry in report.per_n:
        assert entry["wick_variance"] > 0
        assert abs(entry["wick_z"]) < 4.5


def test_statistics_dump_and_normality():
    report = run_experiment(white_noise_config(ladder=(32,), replicates=500, dump_statistics=True))
    assert len(report.statistics) == 500
    assert report.statistics[0][:3] == (0, 32, "quadratic_form")
    assert "normality" in report.per_n[0]
    assert report.regression is None


@pytest.mark.slow
def test_kappa_refinement_is_stable_for_white_noise():
    report = run_experiment(white_noise_config(ladder=(32, 64), replicates=300, kappa_check=True))
    assert report.kappa["refined_kappa"] == 8
    assert report.kappa["drift"] >= 0


def test_kappa_check_is_never_acceptance_ready_below_minimum_replicates():
    report = run_experiment(white_noise_config(ladder=(16, 32), replicates=40, kappa_check=True))
    assert not report.variance_claims
    assert report.kappa["acceptance_ready"] is False


def load_config(name, **overrides):
    config = ExperimentConfig.from_json(str(CONFIGS / f"{name}.json"))
    return replace(config, **overrides) if overrides else config


@pytest.mark.parametrize("name,regime", [
    ("clt_isotropic", "central"),
    ("noncentral_isotropic", "non-central"),
    ("one_direction", "one-direction-anomalous"),
])
def test_shipped_configs_declare_their_regime_rate(name, regime):
    config = load_config(name)
    guard = regime_guard(config)
    assert guard["regime"] == regime
    assert math.isclose(config.nu, guard["expected_nu"])
    assert config.replicates >= 2000
    assert config.kappa_check


@pytest.mark.slow
def test_clt_variance_of_the_empirical_variance():
    config = load_config("clt_isotropic", ladder=(4096,), kappa_check=False)
    report = run_experiment(config, n_jobs=2)
    moments = report.per_n[0]["normalized"]
    reference = empirical_cov_clt_variance(config.model, (0,))
    assert report.references["clt_variance"] == pytest.approx(reference)
    assert abs(moments["variance"] - reference) <= max(4 * moments["variance_se"], 0.1 * reference)


@pytest.mark.slow
def test_noncentral_rate_from_exact_variances():
    config = load_config("noncentral_isotropic")
    ladder = (512, 1024, 2048, 4096, 8192)
    table = covariance_table(config.model, ladder[-1])
    pairs = [(n, wick_variance_empirical_cov(config.model, config.lag, n, table)) for n in ladder]
    assert estimate_scaling_exponent(pairs).slope == pytest.approx(-0.6, abs=0.1)


@pytest.mark.slow
def test_noncentral_limit_is_heavy_tailed_and_matches_double_ito():
    config = load_config("noncentral_isotropic", ladder=(4096,), kappa_check=False)
    report = run_experiment(config, n_jobs=2)
    entry = report.per_n[0]
    normality = entry["normality"]
    assert normality["excess_kurtosis"] >= 4 * normality["kurtosis_se"]
    second_moment = report.references["double_ito_second_moment"]
    assert entry["normalized"]["variance"] == pytest.approx(second_moment, rel=0.15)


@pytest.mark.slow
def test_one_direction_anomalous_rate_from_exact_variances():
    config = load_config("one_direction")
    table = covariance_table(config.model, config.ladder[-1])
    pairs = [(n, wick_variance_empirical_cov(config.model, config.lag, n, table)) for n in config.ladder]
    assert estimate_scaling_exponent(pairs).slope == pytest.approx(-1.6, abs=0.15)


@pytest.mark.slow
def test_one_direction_limit_is_gaussian():
    config = load_config("one_direction", ladder=(128,), kappa_check=False, references=False)
    report = run_experiment(config, n_jobs=2)
    normality = report.per_n[0]["normality"]
    assert abs(normality["excess_kurtosis"]) <= 4 * normality["kurtosis_se"]
