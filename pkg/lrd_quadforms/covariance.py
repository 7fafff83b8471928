"""Covariances r(h) as Fourier coefficients of the spectral density"""

import csv
import itertools
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from scipy.special import gamma

from .errors import ParameterError
from .models import OneDirection, SpectralModel, WhiteNoise
from .models.base import as_points
from .quadrature import cosine_transform_table, integrate_1d, integrate_2d

logger = logging.getLogger(__name__)

Lag = Tuple[int, ...]


def as_lag(h, dimension: int) -> Lag:
    lag = tuple(int(v) for v in np.atleast_1d(h))
    if len(lag) != dimension:
        raise ParameterError(f"lag {h} does not have dimension {dimension}")
    return lag


def _canonical_sign(lag: Lag) -> Lag:
    """Representative of {h, -h}; both give the same cosine integral"""
    neg = tuple(-v for v in lag)
    return max(lag, neg)


def sinc(x: float) -> float:
    """sin(pi x) / (pi x) with sinc(0) = 1 and exact zeros at non-zero integers"""
    if x == 0:
        return 1.0
    if float(x).is_integer():
        return 0.0
    return float(np.sinc(x))


def _tilde_transform(f_tilde: Callable[[np.ndarray], np.ndarray], h1: int, tol: Optional[float]) -> float:
    """σ̃(h1) = integral over [-pi, pi] of cos(h1 u) f̃(u) du"""
    res = integrate_1d(
        lambda u: np.cos(h1 * u) * f_tilde(u), 0.0, math.pi, [0.0], tol, frequency=abs(h1)
    )
    return 2.0 * res.value


def covariance_one_direction(
    p: float,
    f_tilde: Callable[[np.ndarray], np.ndarray],
    h: Sequence[int],
    tol: Optional[float] = None,
    sigma_tilde: Optional[float] = None,
) -> float:
    """
    Closed-form covariance of the one-direction model.

    Integrating x1 over a full period of f̃ first gives
    σ(h1, h2) = sinc(h2 - p h1) σ̃(h1), for any real slope p.

    Args:
        p: slope of the memory direction
        f_tilde: even, non-negative, 2 pi periodic density
        h: lag (h1, h2)
        sigma_tilde: precomputed σ̃(h1), skips the quadrature
    """
    h1, h2 = as_lag(h, 2)
    offset = h2 - p * h1
    if offset != 0 and float(offset).is_integer():
        return 0.0
    if sigma_tilde is None:
        sigma_tilde = _tilde_transform(f_tilde, abs(h1), tol)
    return sinc(offset) * sigma_tilde


def fourier_integral(model: SpectralModel, h, power: float = 1.0, tol: Optional[float] = None) -> float:
    """
    Integral over E of cos(<h, x>) f(x)^power.

    power=1 is the covariance r(h); power=2 gives the Fourier coefficients
    of f² used by the CLT variances.

    Raises:
        IntegralDivergenceError: f^power is not integrable
        QuadratureBudgetError: tolerance not reached within the panel budget
    """
    lag = _canonical_sign(as_lag(h, model.dimension))
    d = model.dimension

    if isinstance(model, WhiteNoise) and model.l1.is_constant:
        if any(lag):
            return 0.0
        level = model.l1.value ** 2 * (2 * math.pi) ** (-d)
        return (2 * math.pi) ** d * level**power

    if isinstance(model, OneDirection):
        h1, h2 = lag
        offset = h2 - model.p * h1
        if offset != 0 and float(offset).is_integer():
            return 0.0
        tilde = _tilde_transform(lambda u: model.tilde_density(u) ** power, abs(h1), tol)
        return (2 * math.pi) ** (1.0 - power) * sinc(offset) * tilde

    if d == 1:
        (k,) = lag
        res = integrate_1d(
            lambda x: np.cos(k * x) * model.density(x[:, None]) ** power,
            0.0,
            math.pi,
            model.singular_points(),
            tol,
            frequency=abs(k),
        )
        return 2.0 * res.value

    h1, h2 = lag

    def integrand(x1: np.ndarray, x2: float) -> np.ndarray:
        pts = np.stack([x1, np.full_like(x1, x2)], axis=-1)
        return np.cos(h1 * x1 + h2 * x2) * model.density(pts) ** power

    # f is even, fold x2 onto [0, pi]
    res = integrate_2d(
        integrand,
        (-math.pi, math.pi),
        (0.0, math.pi),
        model.inner_singular_points,
        model.outer_singular_points(),
        tol,
        frequency=(abs(h1), abs(h2)),
    )
    return 2.0 * res.value


def covariance(model: SpectralModel, h, tol: Optional[float] = None) -> float:
    """r(h) = integral over E of e^{i<h,x>} f(x) dx, computed from the even part"""
    return fourier_integral(model, h, 1.0, tol)


def tail_constant(alpha: float, L0: float) -> float:
    """
    Constant c_alpha of the covariance tail r̃(h) ~ c_alpha h^(-2 alpha - 1).

    Valid for f̃(u) = L0 |u|^(2 alpha) near the origin with -1/2 < alpha < 0.
    """
    if not -0.5 < alpha < 0:
        raise ParameterError(f"tail constant needs -1/2 < alpha < 0, got {alpha}")
    if L0 == 0:
        raise ParameterError("tail constant needs L0 != 0")
    return float(2.0 * L0 * gamma(2 * alpha + 1) * math.cos(math.pi * (2 * alpha + 1) / 2))


@dataclass(frozen=True, eq=False)
class CovarianceTable:
    """
    Covariances r(h) for all lags with |h|_inf <= radius.

    values[h + radius] holds r(h).
    """

    dimension: int
    radius: int
    values: np.ndarray
    error: float = 0.0
    model_id: str = ""
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        shape = (2 * self.radius + 1,) * self.dimension
        if self.values.shape != shape:
            raise ParameterError(f"table shape {self.values.shape} does not match radius {self.radius}")
        self.values.setflags(write=False)
        if not self.values[(self.radius,) * self.dimension] > 0:
            raise ParameterError("covariance table has r(0) <= 0")

    def __call__(self, h) -> float:
        lag = as_lag(h, self.dimension)
        if max(abs(v) for v in lag) > self.radius:
            raise ParameterError(f"lag {lag} is outside the table radius {self.radius}")
        return float(self.values[tuple(v + self.radius for v in lag)])

    def lookup(self, lags: np.ndarray) -> np.ndarray:
        """Vectorized r at integer lags of shape (..., d)"""
        lags = np.asarray(lags, dtype=int)
        if lags.size and np.max(np.abs(lags)) > self.radius:
            raise ParameterError(f"lags up to {np.max(np.abs(lags))} exceed table radius {self.radius}")
        idx = tuple(np.moveaxis(lags + self.radius, -1, 0))
        return self.values[idx]

    @property
    def variance(self) -> float:
        return self((0,) * self.dimension)

    def lags(self) -> Iterable[Lag]:
        return itertools.product(range(-self.radius, self.radius + 1), repeat=self.dimension)

    def to_rows(self) -> List[Tuple]:
        return [lag + (self(lag),) for lag in self.lags()]

    def write_csv(self, path: str) -> None:
        """CSV with columns h1[,h2],r"""
        header = [f"h{k + 1}" for k in range(self.dimension)] + ["r"]
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in self.to_rows():
                writer.writerow(list(row[:-1]) + [repr(float(row[-1]))])

    @classmethod
    def read_csv(cls, path: str) -> "CovarianceTable":
        with open(path, "r", newline="", encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            rows = [row for row in reader if row]
        dimension = len(header) - 1
        radius = max(abs(int(v)) for row in rows for v in row[:-1])
        values = np.zeros((2 * radius + 1,) * dimension)
        for row in rows:
            values[tuple(int(v) + radius for v in row[:-1])] = float(row[-1])
        return cls(dimension, radius, values)


def _symmetric_key(model: SpectralModel, lag: Lag) -> Lag:
    """Canonical lag under the symmetries of the density"""
    kind = model.kind
    if kind in ("Isotropic", "Product") and model.l1.is_constant:
        return tuple(sorted(abs(v) for v in lag))
    return _canonical_sign(lag)


def covariance_table(
    model: SpectralModel,
    radius: int,
    tol: Optional[float] = None,
    n_jobs: int = 1,
) -> CovarianceTable:
    """
    Covariances for every lag with |h|_inf <= radius.

    d=1 tables use one batched cosine rule for all lags. OneDirection uses the
    closed form with a batched σ̃ table. Other 2-d models fall back to one
    2-d quadrature per lag orbit, optionally in parallel.
    """
    if radius < 0:
        raise ParameterError(f"table radius must be >= 0, got {radius}")
    d = model.dimension
    shape = (2 * radius + 1,) * d
    error = 0.0

    if isinstance(model, WhiteNoise) and model.l1.is_constant:
        values = np.zeros(shape)
        values[(radius,) * d] = model.l1.value ** 2
    elif d == 1:
        half, error = cosine_transform_table(lambda x: model.density(x[:, None]), radius, tol)
        values = np.concatenate([half[:0:-1], half])
    elif isinstance(model, OneDirection):
        half, error = cosine_transform_table(model.tilde_density, radius, tol)
        h1, h2 = np.meshgrid(np.arange(-radius, radius + 1), np.arange(-radius, radius + 1), indexing="ij")
        offset = h2 - model.p * h1
        weight = np.sinc(offset)
        weight[(offset != 0) & (offset == np.round(offset))] = 0.0
        values = weight * half[np.abs(h1)]
    else:
        lags = list(itertools.product(range(-radius, radius + 1), repeat=d))
        keys = sorted({_symmetric_key(model, lag) for lag in lags})
        logger.debug("2-d table of radius %d: %d quadratures for %d lags", radius, len(keys), len(lags))
        computed = Parallel(n_jobs=n_jobs, prefer="threads")(
            delayed(covariance)(model, key, tol) for key in keys
        )
        by_key = dict(zip(keys, computed))
        values = np.zeros(shape)
        for lag in lags:
            values[tuple(v + radius for v in lag)] = by_key[_symmetric_key(model, lag)]

    return CovarianceTable(d, radius, values, error=error, model_id=model.model_id)


def spectral_density(model: SpectralModel, points) -> np.ndarray:
    """f at points of shape (..., d), inf on singular sets"""
    return model.density(as_points(points, model.dimension))


def homogeneous_part(model: SpectralModel, points) -> np.ndarray:
    """ã at points of shape (..., d)"""
    return model.homogeneous_part(as_points(points, model.dimension))
