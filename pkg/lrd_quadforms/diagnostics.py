"""Scaling-exponent regression, moment summaries and normality diagnostics"""

import math
from dataclasses import dataclass, asdict
from typing import Dict, Iterable, Sequence, Tuple

import numpy as np
from scipy import stats

from .errors import ParameterError

MIN_NORMALITY_SAMPLES = 500


@dataclass(frozen=True)
class ScalingFit:
    slope: float
    half_width: float
    intercept: float
    points: int

    def __iter__(self):
        return iter((self.slope, self.half_width))

    def to_dict(self) -> Dict:
        return asdict(self)


def estimate_scaling_exponent(pairs: Iterable[Tuple[float, float]], confidence: float = 0.95) -> ScalingFit:
    """
    OLS of log Var on log n with a residual-based confidence half-width.

    Raises:
        ParameterError: fewer than 3 points, or a non-positive n or variance
    """
    data = sorted((float(n), float(v)) for n, v in pairs)
    if len(data) < 3:
        raise ParameterError(f"scaling regression needs at least 3 ladder points, got {len(data)}")
    if any(n <= 0 or v <= 0 for n, v in data):
        raise ParameterError("scaling regression needs positive n and variances")
    x = np.log([n for n, _ in data])
    y = np.log([v for _, v in data])
    fit = stats.linregress(x, y)
    t = stats.t.ppf(0.5 + confidence / 2, len(data) - 2)
    return ScalingFit(float(fit.slope), float(t * fit.stderr), float(fit.intercept), len(data))


@dataclass(frozen=True)
class MomentSummary:
    count: int
    mean: float
    mean_se: float
    variance: float
    variance_se: float
    skewness: float
    excess_kurtosis: float

    def to_dict(self) -> Dict:
        return asdict(self)


def _central_moments(x: np.ndarray) -> Tuple[float, np.ndarray, float, float, float]:
    mean = math.fsum(x) / x.size
    c = x - mean
    m2 = math.fsum(c**2) / x.size
    m3 = math.fsum(c**3) / x.size
    m4 = math.fsum(c**4) / x.size
    return mean, c, m2, m3, m4


def moment_summary(values: Sequence[float]) -> MomentSummary:
    """Sample moments with plug-in standard errors; compensated sums keep the result order independent"""
    x = np.asarray(values, dtype=float)
    if x.size < 2:
        raise ParameterError(f"moment summary needs at least 2 values, got {x.size}")
    mean, _, m2, m3, m4 = _central_moments(x)
    variance = m2 * x.size / (x.size - 1)
    skew = m3 / m2**1.5 if m2 > 0 else 0.0
    kurt = m4 / m2**2 - 3.0 if m2 > 0 else 0.0
    return MomentSummary(
        count=int(x.size),
        mean=mean,
        mean_se=math.sqrt(variance / x.size),
        variance=variance,
        variance_se=math.sqrt(max(m4 - m2**2, 0.0) / x.size),
        skewness=skew,
        excess_kurtosis=kurt,
    )


@dataclass(frozen=True)
class NormalityDiagnostics:
    count: int
    skewness: float
    skewness_se: float
    excess_kurtosis: float
    kurtosis_se: float
    ks_distance: float

    def to_dict(self) -> Dict:
        return asdict(self)


def normality_diagnostics(samples: Sequence[float]) -> NormalityDiagnostics:
    """
    Skewness and excess kurtosis with influence-function SEs, and the KS
    distance to the normal with the sample mean and variance.

    The SEs reduce to sqrt(6/N) and sqrt(24/N) for Gaussian data and stay
    valid for heavy-tailed limits.

    Raises:
        ParameterError: fewer than 500 samples or zero variance
    """
    x = np.asarray(samples, dtype=float)
    if x.size < MIN_NORMALITY_SAMPLES:
        raise ParameterError(f"normality diagnostics need at least {MIN_NORMALITY_SAMPLES} samples, got {x.size}")
    mean, c, m2, m3, m4 = _central_moments(x)
    if m2 <= 0:
        raise ParameterError("normality diagnostics need a sample with positive variance")

    skew = m3 / m2**1.5
    kurt = m4 / m2**2
    inf_m2 = c**2 - m2
    inf_m3 = c**3 - m3 - 3 * m2 * c
    inf_m4 = c**4 - m4 - 4 * m3 * c
    inf_skew = inf_m3 / m2**1.5 - 1.5 * skew * inf_m2 / m2
    inf_kurt = inf_m4 / m2**2 - 2 * kurt * inf_m2 / m2

    ks = stats.kstest(x, "norm", args=(mean, math.sqrt(m2))).statistic
    return NormalityDiagnostics(
        count=int(x.size),
        skewness=skew,
        skewness_se=float(np.std(inf_skew) / math.sqrt(x.size)),
        excess_kurtosis=kurt - 3.0,
        kurtosis_se=float(np.std(inf_kurt) / math.sqrt(x.size)),
        ks_distance=float(ks),
    )
