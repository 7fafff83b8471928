"""Condition (H): analytic lemma regions and an importance-sampled numeric check"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from .config import get_settings
from .errors import AdmissibilityError, DimensionMismatchError, ParameterError
from .models import Isotropic, OneDirection, Product, SpectralModel, TwoLines, WhiteNoise
from .power_counting import max_d_inf, product_bound_problem, two_line_problem
from .quadratic_forms import QuadraticFormSpec
from .rng import RngStream

logger = logging.getLogger(__name__)

PRODUCT_BOUND = "product-bound region"
TWO_LINE = "two-line power-counting region"


class Verdict:
    """Outcome of a condition (H) check"""

    holds: bool = False

    def to_dict(self) -> Dict:
        raise NotImplementedError


@dataclass(frozen=True)
class HoldsByLemma(Verdict):
    region: str
    inequality: str
    worst_d_inf: Optional[float] = None

    holds = True

    def to_dict(self) -> Dict:
        out = {"verdict": "HoldsByLemma", "region": self.region, "inequality": self.inequality}
        if self.worst_d_inf is not None:
            out["worst_d_inf"] = self.worst_d_inf
        return out


@dataclass(frozen=True)
class FailsLemmaRegion(Verdict):
    region: str
    violated: str

    def to_dict(self) -> Dict:
        return {"verdict": "FailsLemmaRegion", "region": self.region, "violated": self.violated}


@dataclass(frozen=True)
class NumericFinite(Verdict):
    estimate: float
    stderr: float
    estimates: Tuple[float, ...] = ()
    note: str = ""

    holds = True

    def to_dict(self) -> Dict:
        return {
            "verdict": "NumericFinite",
            "estimate": self.estimate,
            "stderr": self.stderr,
            "estimates": list(self.estimates),
            "note": self.note,
        }


@dataclass(frozen=True)
class NumericUnstable(Verdict):
    estimates: Tuple[float, ...]
    changes: Tuple[float, ...]
    note: str = ""

    def to_dict(self) -> Dict:
        return {
            "verdict": "NumericUnstable",
            "estimates": list(self.estimates),
            "changes": list(self.changes),
            "note": self.note,
        }


def _product_bound_applies(model: SpectralModel, form: QuadraticFormSpec) -> bool:
    d = model.dimension
    if isinstance(model, Product):
        model_ok = True
    elif isinstance(model, Isotropic):
        model_ok = d == 1 or model.alpha <= 0
    else:
        return False
    form_ok = d == 1 or form.homogeneous == "product" or form.beta <= 0
    return model_ok and form_ok


def _fmt(value: float) -> str:
    return f"{value:.6g}"


def _product_bound_verdict(model: SpectralModel, form: QuadraticFormSpec, power_count: bool) -> Verdict:
    d = model.dimension
    alpha, beta = model.alpha_total, form.beta
    checks = [
        (alpha > -d / 2, f"alpha > -d/2 (alpha = {_fmt(alpha)}, -d/2 = {_fmt(-d / 2)})"),
        (beta > -d / 2, f"beta > -d/2 (beta = {_fmt(beta)}, -d/2 = {_fmt(-d / 2)})"),
        (alpha + beta < -d / 4, f"alpha + beta < -d/4 (alpha + beta = {_fmt(alpha + beta)}, -d/4 = {_fmt(-d / 4)})"),
    ]
    for ok, text in checks:
        if not ok:
            return FailsLemmaRegion(PRODUCT_BOUND, text)
    worst = None
    if power_count:
        _, value = max_d_inf(product_bound_problem(d), {"alpha": alpha, "beta": beta})
        worst = float(value)
    return HoldsByLemma(PRODUCT_BOUND, "alpha > -d/2, beta > -d/2, alpha + beta < -d/4", worst)


def _two_line_verdict(model: TwoLines, form: QuadraticFormSpec, power_count: bool) -> Verdict:
    ap, aq, beta = model.alpha_p, model.alpha_q, form.beta
    checks = [
        (ap > -0.5, f"alpha_p > -1/2 (alpha_p = {_fmt(ap)})"),
        (aq > -0.5, f"alpha_q > -1/2 (alpha_q = {_fmt(aq)})"),
        (beta > -1, f"beta > -1 (beta = {_fmt(beta)})"),
        (ap + aq + beta < -0.5, f"alpha_p + alpha_q + beta < -1/2 (sum = {_fmt(ap + aq + beta)})"),
    ]
    for ok, text in checks:
        if not ok:
            return FailsLemmaRegion(TWO_LINE, text)
    worst = None
    if power_count:
        _, value = max_d_inf(two_line_problem(model.p, model.q), {"alpha_p": ap, "alpha_q": aq, "beta": beta})
        worst = float(value)
    return HoldsByLemma(TWO_LINE, "alpha_p, alpha_q > -1/2, beta > -1, alpha_p + alpha_q + beta < -1/2", worst)


def analytic_verdict(model: SpectralModel, form: QuadraticFormSpec, power_count: bool = False) -> Verdict:
    """
    Decide condition (H) from the lemma regions.

    Raises:
        AdmissibilityError: the model has no analytic region
    """
    if isinstance(model, TwoLines) and (form.homogeneous == "product" or form.beta <= 0):
        return _two_line_verdict(model, form, power_count)
    if _product_bound_applies(model, form):
        return _product_bound_verdict(model, form, power_count)
    raise AdmissibilityError(f"{model.kind} model with this symbol has no analytic region; numeric only")


def sample_proposal(generator: np.random.Generator, theta: np.ndarray, size: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Draws and log-densities of q(u) = (theta+1)/2 |u|^theta (1+|u|)^(-2-theta), per column.

    |U| = Z / (1 - Z) with Z = V^(1/(theta+1)) and a random sign.
    """
    v = generator.random((size, theta.size))
    z = np.power(v, 1.0 / (theta + 1.0))
    with np.errstate(divide="ignore"):
        magnitude = z / (1.0 - z)
    sign = np.where(generator.random((size, theta.size)) < 0.5, -1.0, 1.0)
    u = sign * magnitude
    with np.errstate(divide="ignore"):
        log_q = (
            np.log((theta + 1.0) / 2.0)
            + theta * np.log(magnitude)
            - (2.0 + theta) * np.log1p(magnitude)
        )
    return u, np.sum(log_q, axis=1)


def _block_coordinates(model: SpectralModel) -> Tuple[np.ndarray, np.ndarray]:
    """Linear map M with u = M x along which ã factorizes, and per-coordinate theta"""
    d = model.dimension
    if isinstance(model, TwoLines):
        return np.array([[1.0, model.p], [1.0, model.q]]), np.array([2 * model.alpha_p, 2 * model.alpha_q])
    if isinstance(model, OneDirection):
        return np.array([[1.0, model.p], [0.0, 1.0]]), np.array([2 * model.alpha, 0.0])
    if isinstance(model, WhiteNoise):
        return np.eye(d), np.zeros(d)
    theta = np.full(d, 2 * model.alpha_total / d)
    return np.eye(d), np.maximum(theta, -0.95)


def _h_log_integrand(
    model: SpectralModel, form: QuadraticFormSpec, x: np.ndarray, y: np.ndarray, t: np.ndarray, s: np.ndarray
) -> np.ndarray:
    with np.errstate(divide="ignore"):
        log_f = (
            2 * np.log(np.abs(model.homogeneous_part(x)))
            + 2 * np.log(np.abs(model.homogeneous_part(y)))
            + np.log(np.abs(form.homogeneous_part(t)))
            + np.log(np.abs(form.homogeneous_part(s)))
        )
    damping = (
        np.log1p(np.abs(x + t)) + np.log1p(np.abs(y - t)) + np.log1p(np.abs(x + s)) + np.log1p(np.abs(y - s))
    )
    return log_f - np.sum(damping, axis=-1)


def _is_estimate(
    model: SpectralModel, form: QuadraticFormSpec, size: int, rng: RngStream
) -> Tuple[float, float]:
    d = model.dimension
    generator = rng.generator()
    matrix, theta_x = _block_coordinates(model)
    inverse = np.linalg.inv(matrix)
    log_jacobian = math.log(abs(np.linalg.det(matrix)))
    theta_t = np.full(d, max(2 * form.beta / d, -0.95))

    u_x, lq_x = sample_proposal(generator, theta_x, size)
    u_y, lq_y = sample_proposal(generator, theta_x, size)
    t, lq_t = sample_proposal(generator, theta_t, size)
    s, lq_s = sample_proposal(generator, theta_t, size)
    x = u_x @ inverse.T
    y = u_y @ inverse.T
    # density of x = M^-1 u is q(u) |det M|
    log_q = lq_x + lq_y + 2 * log_jacobian + lq_t + lq_s
    log_w = _h_log_integrand(model, form, x, y, t, s) - log_q
    weights = np.exp(np.where(np.isfinite(log_w), log_w, -np.inf))
    return float(np.mean(weights)), float(np.std(weights, ddof=1) / math.sqrt(size))


def numeric_verdict(
    model: SpectralModel,
    form: QuadraticFormSpec,
    rng: Optional[RngStream] = None,
    base_samples: Optional[int] = None,
    doublings: Optional[int] = None,
) -> Verdict:
    """
    Importance-sampled (H) integral over R^{4d} at base_samples * 2^k, k = 0..doublings.

    The proposal matches the homogeneous singularity of ã along its model
    coordinates so weights stay bounded near the origin. The estimate is
    stable when every successive relative change is below the configured
    threshold.
    """
    settings = get_settings().condition_h
    base = base_samples or settings.base_samples
    doublings = settings.doublings if doublings is None else doublings
    rng = rng or RngStream(0)

    estimates, errors = [], []
    for k in range(doublings + 1):
        mean, err = _is_estimate(model, form, base * 2**k, rng.substream(k))
        estimates.append(mean)
        errors.append(err)
        logger.debug("(H) estimate with %d samples: %.6g +- %.3g", base * 2**k, mean, err)

    changes = tuple(
        abs(b - a) / abs(a) if a != 0 else math.inf for a, b in zip(estimates[:-1], estimates[1:])
    )
    if all(math.isfinite(e) for e in estimates) and max(changes, default=0.0) < settings.stability_threshold:
        return NumericFinite(estimates[-1], errors[-1], tuple(estimates))
    return NumericUnstable(tuple(estimates), changes)


def check_condition_h(
    model: SpectralModel,
    form: QuadraticFormSpec,
    method: str = "auto",
    rng: Optional[RngStream] = None,
    power_count: bool = False,
) -> Verdict:
    """
    Verdict on condition (H) for a model and quadratic form.

    method "auto" uses the lemma regions where they apply and the numeric
    check otherwise; "analytic" and "numeric" force one path.

    Raises:
        DimensionMismatchError: model and form dimensions differ
        AdmissibilityError: method "analytic" for a model with no region
    """
    if model.dimension != form.dimension:
        raise DimensionMismatchError(f"model dimension {model.dimension} != form dimension {form.dimension}")
    if method not in ("auto", "analytic", "numeric"):
        raise ParameterError(f"unknown method '{method}'")
    if method == "numeric":
        return numeric_verdict(model, form, rng)
    try:
        return analytic_verdict(model, form, power_count)
    except AdmissibilityError as e:
        if method == "analytic":
            raise
        logger.info("%s", e)
        verdict = numeric_verdict(model, form, rng)
        return _with_note(verdict, "no analytic region; numeric only")


def _with_note(verdict: Verdict, note: str) -> Verdict:
    if isinstance(verdict, NumericFinite):
        return NumericFinite(verdict.estimate, verdict.stderr, verdict.estimates, note)
    if isinstance(verdict, NumericUnstable):
        return NumericUnstable(verdict.estimates, verdict.changes, note)
    return verdict
