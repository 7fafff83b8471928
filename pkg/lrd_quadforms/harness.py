"""Replicated Monte Carlo experiments over an n-ladder"""

import hashlib
import json
import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import scipy
from joblib import Parallel, delayed

from . import __version__
from .condition_h import HoldsByLemma, analytic_verdict, check_condition_h
from .config import get_settings
from .covariance import CovarianceTable, as_lag, covariance_table
from .diagnostics import estimate_scaling_exponent, moment_summary, normality_diagnostics
from .errors import AdmissibilityError, InvalidConfigError, QuadformsError, ResourceBudgetError
from .limit_laws import DoubleItoGrid, clt_variance, empirical_cov_clt_variance, sigma2_one_direction
from .models import OneDirection, SpectralModel, model_from_dict
from .quadratic_forms import (
    QuadraticFormSpec,
    empirical_cov,
    empirical_cov_centered,
    expected_q,
    quadratic_form,
)
from .rng import RngStream
from .simulator import simulate_exact, simulate_spectral
from .wick import wick_variance_empirical_cov, wick_variance_qn

logger = logging.getLogger(__name__)

STATISTICS = ("quadratic_form", "empirical_cov", "empirical_cov_centered")
SAMPLERS = ("spectral", "exact")


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One replicated experiment.

    The statistic is Q_n - E[Q_n] for "quadratic_form", or r̂(h) - r(h) for
    the empirical covariances, scaled by n^nu.
    """

    model: SpectralModel
    ladder: Tuple[int, ...]
    replicates: int
    nu: float
    statistic: str = "quadratic_form"
    spec: Optional[QuadraticFormSpec] = None
    lag: Optional[Tuple[int, ...]] = None
    margin: Optional[int] = None
    oversample: int = 4
    sampler: str = "spectral"
    seed: int = 0
    output: Optional[str] = None
    kappa_check: bool = False
    dump_statistics: bool = False
    references: bool = True

    def __post_init__(self):
        d = self.model.dimension
        object.__setattr__(self, "ladder", tuple(int(n) for n in self.ladder))
        if not self.ladder or any(n < 1 for n in self.ladder):
            raise InvalidConfigError(f"ladder must hold positive sizes, got {list(self.ladder)}")
        if any(b <= a for a, b in zip(self.ladder, self.ladder[1:])):
            raise InvalidConfigError(f"ladder must be strictly increasing, got {list(self.ladder)}")
        if self.statistic not in STATISTICS:
            raise InvalidConfigError(f"unknown statistic '{self.statistic}', expected one of {', '.join(STATISTICS)}")
        if self.sampler not in SAMPLERS:
            raise InvalidConfigError(f"unknown sampler '{self.sampler}', expected one of {', '.join(SAMPLERS)}")
        if self.replicates < 2:
            raise InvalidConfigError(f"need at least 2 replicates, got {self.replicates}")
        if int(self.oversample) != self.oversample or self.oversample < 1:
            raise InvalidConfigError(f"oversample must be a positive integer, got {self.oversample}")

        if self.statistic == "quadratic_form":
            if self.spec is None:
                raise InvalidConfigError("statistic 'quadratic_form' needs a spec")
            if self.spec.dimension != d:
                raise InvalidConfigError(f"spec dimension {self.spec.dimension} != model dimension {d}")
        else:
            if self.lag is None:
                raise InvalidConfigError(f"statistic '{self.statistic}' needs a lag")
            object.__setattr__(self, "lag", as_lag(self.lag, d))
        margin = self.margin
        if margin is None:
            margin = max(abs(v) for v in self.lag) if self.lag is not None else 0
        if self.lag is not None and margin < max(abs(v) for v in self.lag):
            raise InvalidConfigError(f"margin {margin} is smaller than the lag {self.lag}")
        object.__setattr__(self, "margin", int(margin))

        if self.sampler == "exact":
            bound = get_settings().simulation.exact_max_points
            side = self.ladder[-1] + 2 * self.margin
            if side**d > bound:
                raise InvalidConfigError(f"exact sampler needs (n + 2m)^d <= {bound}, got {side**d}")

    @property
    def form(self) -> QuadraticFormSpec:
        """Quadratic form whose symbol governs the limit (δ_h for empirical covariances)"""
        if self.spec is not None:
            return self.spec
        return QuadraticFormSpec.delta(self.lag)

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "model": self.model.to_dict(),
            "statistic": self.statistic,
            "ladder": list(self.ladder),
            "replicates": self.replicates,
            "nu": self.nu,
            "margin": self.margin,
            "oversample": int(self.oversample),
            "sampler": self.sampler,
            "seed": self.seed,
            "kappa_check": self.kappa_check,
            "dump_statistics": self.dump_statistics,
            "references": self.references,
        }
        if self.spec is not None:
            out["spec"] = self.spec.to_dict()
        if self.lag is not None:
            out["lag"] = list(self.lag)
        if self.output is not None:
            out["output"] = self.output
        return out

    @classmethod
    def from_dict(cls, raw: Dict[str, Any]) -> "ExperimentConfig":
        known = {
            "model", "statistic", "spec", "lag", "ladder", "replicates", "nu", "margin",
            "oversample", "sampler", "seed", "output", "kappa_check", "dump_statistics", "references",
        }
        unknown = set(raw) - known
        if unknown:
            raise InvalidConfigError(f"unknown experiment keys: {', '.join(sorted(unknown))}")
        try:
            model = model_from_dict(raw["model"])
            spec = QuadraticFormSpec.from_dict(raw["spec"]) if raw.get("spec") is not None else None
            lag = raw.get("lag")
            return cls(
                model=model,
                ladder=tuple(raw["ladder"]),
                replicates=int(raw["replicates"]),
                nu=float(raw["nu"]),
                statistic=raw.get("statistic", "quadratic_form" if spec is not None else "empirical_cov"),
                spec=spec,
                lag=tuple(np.atleast_1d(lag).tolist()) if lag is not None else None,
                margin=raw.get("margin"),
                oversample=int(raw.get("oversample", get_settings().simulation.oversample)),
                sampler=raw.get("sampler", "spectral"),
                seed=int(raw.get("seed", 0)),
                output=raw.get("output"),
                kappa_check=bool(raw.get("kappa_check", False)),
                dump_statistics=bool(raw.get("dump_statistics", False)),
                references=bool(raw.get("references", True)),
            )
        except KeyError as e:
            raise InvalidConfigError(f"experiment config is missing {e.args[0]}") from e
        except (TypeError, ValueError) as e:
            if isinstance(e, QuadformsError):
                raise InvalidConfigError(str(e)) from e
            raise InvalidConfigError(f"invalid experiment config: {e}") from e

    @classmethod
    def from_json(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path, "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except FileNotFoundError as e:
            raise InvalidConfigError(f"experiment file not found: {path}") from e
        except json.JSONDecodeError as e:
            raise InvalidConfigError(f"cannot parse {path}: {e}") from e
        return cls.from_dict(raw)

    def digest(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(payload.encode("utf-8")).hexdigest()


@dataclass
class ExperimentReport:
    config: Dict[str, Any]
    config_hash: str
    regime: Dict[str, Any]
    per_n: List[Dict[str, Any]] = field(default_factory=list)
    regression: Optional[Dict[str, Any]] = None
    references: Dict[str, Any] = field(default_factory=dict)
    kappa: Optional[Dict[str, Any]] = None
    complete: bool = True
    variance_claims: bool = True
    notes: List[str] = field(default_factory=list)
    provenance: Dict[str, Any] = field(default_factory=dict)
    statistics: List[Tuple[int, int, str, float]] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "config": self.config,
            "config_hash": self.config_hash,
            "regime": self.regime,
            "per_n": self.per_n,
            "regression": self.regression,
            "references": self.references,
            "kappa": self.kappa,
            "complete": self.complete,
            "variance_claims": self.variance_claims,
            "notes": self.notes,
            "provenance": self.provenance,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)


def _region_inequality(verdict) -> str:
    if isinstance(verdict, HoldsByLemma) and "two-line" in verdict.region:
        return "alpha_p + alpha_q + beta < -1/2"
    return "alpha + beta < -d/4"


def regime_guard(config: ExperimentConfig, rng: Optional[RngStream] = None) -> Dict[str, Any]:
    """
    Check that the declared normalization matches the limit regime.

    nu = d/2 is refused inside the non-central region, and any other nu is
    refused unless condition (H) holds; one-direction models use the
    anomalous rate (4 alpha + 3) / 2 for alpha < -1/4.

    Raises:
        AdmissibilityError: with the violated inequality named
    """
    model, form = config.model, config.form
    d = model.dimension
    central_nu = d / 2
    is_central = math.isclose(config.nu, central_nu)

    if isinstance(model, OneDirection):
        anomalous = model.alpha < -0.25
        expected = (4 * model.alpha + 3) / 2 if anomalous else central_nu
        if anomalous and is_central:
            raise AdmissibilityError(
                "nu = d/2 requests the Gaussian rate, but alpha < -1/4 gives the anomalous rate (4 alpha + 3) / 2",
                "alpha < -1/4",
            )
        if not math.isclose(config.nu, expected):
            logger.warning("⚠ nu = %g differs from the one-direction rate %g", config.nu, expected)
        return {"regime": "one-direction-anomalous" if anomalous else "central", "expected_nu": expected}

    try:
        verdict = analytic_verdict(model, form)
    except AdmissibilityError:
        verdict = None

    if verdict is not None:
        if isinstance(verdict, HoldsByLemma):
            inequality = _region_inequality(verdict)
            if is_central:
                raise AdmissibilityError(
                    f"nu = d/2 requests the Gaussian limit, but {inequality} holds ({verdict.region}): "
                    "the limit is non-central",
                    inequality,
                )
            return {
                "regime": "non-central",
                "expected_nu": d + 2 * model.alpha_total + 2 * form.beta,
                "verdict": verdict.to_dict(),
            }
        if not is_central:
            raise AdmissibilityError(
                f"nu = {config.nu:g} requests the non-central limit, but condition (H) fails: {verdict.violated}",
                verdict.violated,
            )
        return {"regime": "central", "expected_nu": central_nu, "verdict": verdict.to_dict()}

    if is_central:
        return {"regime": "central", "expected_nu": central_nu}
    numeric = check_condition_h(model, form, method="numeric", rng=rng)
    if not numeric.holds:
        raise AdmissibilityError(
            f"nu = {config.nu:g} requests the non-central limit, but the condition (H) integral did not stabilize",
            "condition (H) integral finite",
        )
    return {
        "regime": "non-central",
        "expected_nu": d + 2 * model.alpha_total + 2 * form.beta,
        "verdict": numeric.to_dict(),
    }


class ExperimentRunner:
    """Runs one ExperimentConfig across its ladder and collects the report"""

    def __init__(self, config: ExperimentConfig, n_jobs: int = 1, verbose: bool = True):
        self.config = config
        self.n_jobs = n_jobs
        self.verbose = verbose
        self.settings = get_settings()
        self.root = RngStream(config.seed)
        self.report = ExperimentReport(config.to_dict(), config.digest(), {})
        self._support_table: Optional[CovarianceTable] = None

    def _say(self, message: str, end: str = "\n") -> None:
        if self.verbose:
            print(message, end=end, flush=True)

    def _simulate(self, n: int, rng: RngStream, oversample: int):
        cfg = self.config
        if cfg.sampler == "exact":
            return simulate_exact(cfg.model, n, cfg.margin, rng)
        return simulate_spectral(cfg.model, n, cfg.margin, oversample, rng)

    def _raw_statistic(self, field) -> float:
        cfg = self.config
        if cfg.statistic == "quadratic_form":
            return quadratic_form(field, cfg.spec)
        if cfg.statistic == "empirical_cov":
            return empirical_cov(field, cfg.lag)
        return empirical_cov_centered(field, cfg.lag)

    def _center(self, n: int, table: CovarianceTable) -> float:
        cfg = self.config
        if cfg.statistic == "quadratic_form":
            return expected_q(cfg.model, cfg.spec, n, table)
        return table(cfg.lag)

    def _replicate(self, n: int, level: int, index: int, oversample: int) -> float:
        field = self._simulate(n, self.root.stream(index).at(level), oversample)
        return self._raw_statistic(field)

    def _replicates(self, n: int, level: int, oversample: int) -> np.ndarray:
        values = Parallel(n_jobs=self.n_jobs, prefer="threads")(
            delayed(self._replicate)(n, level, r, oversample) for r in range(self.config.replicates)
        )
        return np.asarray(values, dtype=float)

    def _table(self) -> CovarianceTable:
        """Covariances over the support of the statistic, shared by every ladder point"""
        if self._support_table is None:
            cfg = self.config
            radius = cfg.spec.radius if cfg.spec is not None else max(abs(v) for v in cfg.lag)
            self._support_table = covariance_table(cfg.model, radius, n_jobs=self.n_jobs)
        return self._support_table

    def _wick_variance(self, n: int) -> float:
        cfg = self.config
        if cfg.statistic == "quadratic_form":
            return wick_variance_qn(cfg.model, cfg.spec, n)
        return wick_variance_empirical_cov(cfg.model, cfg.lag, n)

    def run_level(self, level: int, n: int) -> Dict[str, Any]:
        cfg = self.config
        self._say(f"[{level + 1}/{len(cfg.ladder)}] n = {n}:", end=" ")
        table = self._table()
        center = self._center(n, table)
        raw = self._replicates(n, level, int(cfg.oversample))
        scale = float(n) ** cfg.nu
        normalized = scale * (raw - center)
        moments = moment_summary(normalized)
        entry: Dict[str, Any] = {
            "n": n,
            "center": center,
            "normalized": moments.to_dict(),
            "raw_variance": moments.variance / scale**2,
            "raw_variance_se": moments.variance_se / scale**2,
        }
        if cfg.replicates >= 500:
            entry["normality"] = normality_diagnostics(normalized).to_dict()
        if cfg.sampler == "exact":
            wick = self._wick_variance(n)
            se = entry["raw_variance_se"]
            entry["wick_variance"] = wick
            entry["wick_z"] = (entry["raw_variance"] - wick) / se if se > 0 else 0.0
        if cfg.dump_statistics:
            self.report.statistics.extend(
                (r, n, cfg.statistic, float(v)) for r, v in enumerate(normalized)
            )
        status = "✓"
        if "wick_z" in entry and abs(entry["wick_z"]) > self.settings.harness.se_multiplier:
            status = "⚠"
        self._say(f"{status} var = {moments.variance:.6g} ± {moments.variance_se:.2g}")
        return entry

    def _references(self) -> Dict[str, Any]:
        cfg = self.config
        regime = self.report.regime.get("regime")
        refs: Dict[str, Any] = {}
        try:
            if regime == "central":
                if cfg.statistic == "quadratic_form":
                    refs["clt_variance"] = clt_variance(cfg.model, cfg.spec)
                else:
                    refs["clt_variance"] = empirical_cov_clt_variance(cfg.model, cfg.lag)
            elif regime == "non-central":
                grid = DoubleItoGrid.build(cfg.model, cfg.form)
                refs["double_ito_second_moment"] = grid.second_moment()
            elif regime == "one-direction-anomalous":
                model = cfg.model
                refs["sigma2"] = sigma2_one_direction(
                    model.alpha, int(model.p), model.l1.at_zero**2, cfg.lag
                ).to_dict()
        except QuadformsError as e:
            refs["unavailable"] = str(e)
            logger.warning("⚠ reference value unavailable: %s", e)
        return refs

    def _kappa_check(self) -> Dict[str, Any]:
        cfg = self.config
        level, n = len(cfg.ladder) - 1, cfg.ladder[-1]
        base = self.report.per_n[-1]["normalized"]["variance"]
        doubled_kappa = 2 * int(cfg.oversample)
        self._say(f"🔍 κ-refinement at n = {n}: κ = {cfg.oversample} → {doubled_kappa}")
        table = self._table()
        raw = self._replicates(n, level, doubled_kappa)
        refined = moment_summary(float(n) ** cfg.nu * (raw - self._center(n, table))).variance
        drift = abs(refined - base) / base if base > 0 else math.inf
        ready = bool(drift <= self.settings.harness.kappa_drift) and self.report.variance_claims
        self._say(f"{'✓' if ready else '⚠'} κ drift {100 * drift:.2f}%")
        return {"kappa": int(cfg.oversample), "refined_kappa": doubled_kappa, "drift": drift, "acceptance_ready": ready}

    def run(self) -> ExperimentReport:
        cfg = self.config
        report = self.report
        report.regime = regime_guard(cfg, self.root.stream(2**63))
        report.provenance = {
            "seed": cfg.seed,
            "streams": "philox(seed, replicate) jumped by ladder index",
            "versions": {"lrd_quadforms": __version__, "numpy": np.__version__, "scipy": scipy.__version__},
        }
        if cfg.replicates < self.settings.harness.min_replicates:
            report.variance_claims = False
            report.notes.append(
                f"{cfg.replicates} replicates is below {self.settings.harness.min_replicates}; variances are indicative only"
            )
        self._say(f"🔬 {cfg.model.model_id}, statistic {cfg.statistic}, regime {report.regime['regime']}")

        for level, n in enumerate(cfg.ladder):
            try:
                report.per_n.append(self.run_level(level, n))
            except ResourceBudgetError as e:
                self._say(f"✗ {e}")
                report.complete = False
                report.notes.append(f"stopped at n = {n}: {e}")
                break

        pairs = [(e["n"], e["raw_variance"]) for e in report.per_n if e["raw_variance"] > 0]
        if len(pairs) >= 3:
            report.regression = estimate_scaling_exponent(pairs).to_dict()
        if cfg.references:
            report.references = self._references()
        if cfg.kappa_check and cfg.sampler == "spectral" and report.per_n and report.complete:
            try:
                report.kappa = self._kappa_check()
            except ResourceBudgetError as e:
                report.notes.append(f"κ-refinement skipped: {e}")
        return report


def run_experiment(config: ExperimentConfig, n_jobs: int = 1, verbose: bool = False) -> ExperimentReport:
    """
    Run a replicated experiment and return its report.

    Replicate r at ladder position k always draws from stream (seed, r)
    jumped by k, so the report depends only on the config.

    Raises:
        AdmissibilityError: the declared nu does not match the limit regime
    """
    return ExperimentRunner(config, n_jobs, verbose).run()
