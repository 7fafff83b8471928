"""Quadratic forms, empirical covariances and periodograms of a field sample"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .covariance import CovarianceTable, as_lag, covariance
from .errors import DimensionMismatchError, MarginError, ParameterError
from .models import SpectralModel
from .simulator import FieldSample

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QuadraticFormSpec:
    """
    Finite-support real weights g_j defining Q_n and the symbol
    g(t) = (2 pi)^-d sum_j g_j e^{-i<j,t>}.

    Real weights make g conjugate-symmetric. beta, l2_zero and homogeneous
    describe the factorization g = g̃ L₂ near the origin, with g̃ of degree
    2 beta either isotropic |t|^(2 beta) or a product prod |t_k|^(2 beta / d).
    """

    dimension: int
    weights: Tuple[Tuple[Tuple[int, ...], float], ...]
    beta: float = 0.0
    l2_zero: Optional[float] = None
    homogeneous: str = "isotropic"

    def __post_init__(self):
        merged: Dict[Tuple[int, ...], float] = {}
        for lag, value in self.weights:
            lag = as_lag(lag, self.dimension)
            if isinstance(value, complex) or not math.isfinite(float(value)):
                raise ParameterError(f"weight g_{lag} must be a finite real number, got {value}")
            merged[lag] = merged.get(lag, 0.0) + float(value)
        if not merged:
            raise ParameterError("quadratic form needs at least one weight")
        object.__setattr__(self, "weights", tuple(sorted(merged.items())))
        if self.homogeneous not in ("isotropic", "product"):
            raise ParameterError(f"homogeneous part must be 'isotropic' or 'product', got {self.homogeneous}")
        if not self.beta > -self.dimension / 2:
            raise ParameterError(f"symbol degree needs beta > -d/2, got {self.beta}")
        if self.l2_zero is not None and self.l2_zero == 0:
            raise ParameterError("declared L2(0) must be non-zero")

    @classmethod
    def from_weights(cls, dimension: int, weights: Dict, **symbol) -> "QuadraticFormSpec":
        return cls(dimension, tuple((as_lag(k, dimension), v) for k, v in weights.items()), **symbol)

    @classmethod
    def delta(cls, h: Sequence[int], weight: float = 1.0) -> "QuadraticFormSpec":
        """g = weight at lag h, zero elsewhere"""
        lag = tuple(int(v) for v in np.atleast_1d(h))
        return cls(len(lag), ((lag, weight),))

    @classmethod
    def symmetric_delta(cls, h: Sequence[int]) -> "QuadraticFormSpec":
        """g = (δ_h + δ_-h) / 2, the even spec with the same Q_n as δ_h"""
        lag = tuple(int(v) for v in np.atleast_1d(h))
        neg = tuple(-v for v in lag)
        if lag == neg:
            return cls.delta(lag)
        return cls(len(lag), ((lag, 0.5), (neg, 0.5)))

    @property
    def lags(self) -> np.ndarray:
        return np.array([lag for lag, _ in self.weights], dtype=int).reshape(-1, self.dimension)

    @property
    def values(self) -> np.ndarray:
        return np.array([v for _, v in self.weights])

    @property
    def radius(self) -> int:
        return int(np.max(np.abs(self.lags)))

    def scaled(self, c: float) -> "QuadraticFormSpec":
        return QuadraticFormSpec(
            self.dimension,
            tuple((lag, c * v) for lag, v in self.weights),
            self.beta,
            None if self.l2_zero is None else c * self.l2_zero,
            self.homogeneous,
        )

    def symbol(self, t) -> np.ndarray:
        """g(t) at points of shape (..., d)"""
        pts = np.asarray(t, dtype=float)
        if self.dimension == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        phase = pts @ self.lags.T.astype(float)
        return (2 * math.pi) ** (-self.dimension) * (np.exp(-1j * phase) @ self.values)

    def symmetric_symbol(self, t) -> np.ndarray:
        """(g(t) + g(-t)) / 2 = Re g(t); yields the same Q_n as g"""
        return np.real(self.symbol(t))

    @property
    def l2_at_zero(self) -> float:
        if self.l2_zero is not None:
            return float(self.l2_zero)
        value = float(np.sum(self.values)) * (2 * math.pi) ** (-self.dimension)
        if self.beta != 0 or value == 0:
            raise ParameterError("L2(0) must be declared when g(0) = 0 or beta != 0")
        return value

    def homogeneous_part(self, t) -> np.ndarray:
        """g̃(t) at points of shape (..., d)"""
        pts = np.asarray(t, dtype=float)
        if self.dimension == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
            pts = pts[..., None]
        with np.errstate(divide="ignore"):
            if self.beta == 0:
                return np.ones(pts.shape[:-1])
            if self.homogeneous == "product":
                return np.prod(np.power(np.abs(pts), 2 * self.beta / self.dimension), axis=-1)
            return np.power(np.sqrt(np.sum(pts**2, axis=-1)), 2 * self.beta)

    def to_dict(self) -> Dict:
        support: List = [
            [list(lag) if self.dimension > 1 else lag[0], value] for lag, value in self.weights
        ]
        out = {"dimension": self.dimension, "support": support, "beta": self.beta}
        if self.l2_zero is not None:
            out["l2_zero"] = self.l2_zero
        if self.homogeneous != "isotropic":
            out["homogeneous"] = self.homogeneous
        return out

    @classmethod
    def from_dict(cls, raw: Dict) -> "QuadraticFormSpec":
        dimension = int(raw["dimension"])
        weights = tuple((as_lag(j, dimension), float(g)) for j, g in raw["support"])
        return cls(
            dimension,
            weights,
            float(raw.get("beta", 0.0)),
            raw.get("l2_zero"),
            raw.get("homogeneous", "isotropic"),
        )


def _check_dimension(field: FieldSample, dimension: int) -> None:
    if field.dimension != dimension:
        raise DimensionMismatchError(
            f"field has dimension {field.dimension}, quadratic form has dimension {dimension}"
        )


def _overlap(n: int, lag: Sequence[int]) -> Optional[Tuple[Tuple[slice, ...], Tuple[slice, ...]]]:
    """Slices of A_n holding i and i + lag when both lie in A_n"""
    first, second = [], []
    for m in lag:
        if abs(m) >= n:
            return None
        if m >= 0:
            first.append(slice(0, n - m))
            second.append(slice(m, n))
        else:
            first.append(slice(-m, n))
            second.append(slice(0, n + m))
    return tuple(first), tuple(second)


def lag_products(window: np.ndarray, lag: Sequence[int]) -> float:
    """sum over i with i, i + lag in A_n of X_i X_{i+lag}"""
    cut = _overlap(window.shape[0], lag)
    if cut is None:
        return 0.0
    return float(np.sum(window[cut[0]] * window[cut[1]]))


def quadratic_form(field: FieldSample, spec: QuadraticFormSpec) -> float:
    """Q_n = n^-d sum_{i,j in A_n} g_{i-j} X_i X_j, summed lag by lag"""
    _check_dimension(field, spec.dimension)
    window = field.window
    total = math.fsum(g * lag_products(window, lag) for lag, g in spec.weights)
    return total / field.n**field.dimension


def autocorrelation_sums(window: np.ndarray) -> np.ndarray:
    """S(m) = sum_i X_i X_{i+m} for every m, indexed modulo 2n per axis"""
    n = window.shape[0]
    shape = (2 * n,) * window.ndim
    spectrum = np.fft.rfftn(window, s=shape)
    return np.fft.irfftn(np.abs(spectrum) ** 2, s=shape)


def quadratic_form_fft(field: FieldSample, spec: QuadraticFormSpec) -> float:
    """Q_n from the zero-padded FFT autocorrelation of the window"""
    _check_dimension(field, spec.dimension)
    n = field.n
    sums = autocorrelation_sums(field.window)
    total = 0.0
    for lag, g in spec.weights:
        if max(abs(m) for m in lag) >= n:
            continue
        total += g * sums[tuple(m % (2 * n) for m in lag)]
    return float(total) / n**field.dimension


def expected_q(
    model: SpectralModel,
    spec: QuadraticFormSpec,
    n: int,
    table: Optional[CovarianceTable] = None,
) -> float:
    """E[Q_n] = sum_m g_m r(m) prod_k (1 - |m_k| / n)"""
    if model.dimension != spec.dimension:
        raise DimensionMismatchError(f"model dimension {model.dimension} != form dimension {spec.dimension}")
    terms = []
    for lag, g in spec.weights:
        overlap = np.prod([max(0.0, 1.0 - abs(m) / n) for m in lag])
        if overlap == 0:
            continue
        r = table(lag) if table is not None else covariance(model, lag)
        terms.append(g * r * overlap)
    return math.fsum(terms)


def _shifted_window(field: FieldSample, h: Sequence[int]) -> np.ndarray:
    lag = as_lag(h, field.dimension)
    need = max(abs(v) for v in lag)
    if need > field.margin:
        raise MarginError(need, field.margin)
    m, n = field.margin, field.n
    return field.values[tuple(slice(m + v, m + v + n) for v in lag)]


def empirical_cov(field: FieldSample, h) -> float:
    """r̂(h) = n^-d sum_{i in A_n} X_i X_{i+h}, reading X_{i+h} from the margin"""
    shifted = _shifted_window(field, h)
    return float(np.sum(field.window * shifted)) / field.n**field.dimension


def empirical_cov_centered(field: FieldSample, h) -> float:
    """Centered version of r̂(h), with the window mean subtracted from both factors"""
    shifted = _shifted_window(field, h)
    mean = float(np.mean(field.window))
    return float(np.sum((field.window - mean) * (shifted - mean))) / field.n**field.dimension


def periodogram(field: FieldSample, t) -> np.ndarray:
    """I_n(t) = (2 pi n)^-d |sum_{k in A_n} X_k e^{i<k,t>}|² at points of shape (..., d)"""
    d, n = field.dimension, field.n
    pts = np.asarray(t, dtype=float)
    if d == 1 and (pts.ndim == 0 or pts.shape[-1] != 1):
        pts = pts[..., None]
    if pts.shape[-1] != d:
        raise DimensionMismatchError(f"frequency of dimension {pts.shape[-1]} for a {d}-d field")
    k = np.arange(1, n + 1)
    transform = field.window.astype(complex)
    # contract one axis at a time: sum_k X_k prod_j e^{i k_j t_j}
    flat = pts.reshape(-1, d)
    out = np.empty(flat.shape[0])
    for row, freq in enumerate(flat):
        acc = transform
        for axis in range(d):
            acc = np.tensordot(acc, np.exp(1j * k * freq[axis]), axes=([0], [0]))
        out[row] = abs(complex(acc)) ** 2
    return (out / (2 * math.pi * n) ** d).reshape(pts.shape[:-1])
