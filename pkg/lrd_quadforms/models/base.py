"""Base class for spectral models"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from ..errors import ParameterError, SingularPointError


@dataclass(frozen=True)
class SlowFactor:
    """
    Bounded factor L multiplying the homogeneous part of a filter or symbol.

    Either a constant, or a user closure together with its declared value at
    the origin. Closures must be real, even and continuous at 0 so that the
    filter keeps its conjugate symmetry.
    """

    value: float = 1.0
    func: Optional[Callable[[np.ndarray], np.ndarray]] = None

    def __post_init__(self):
        if not math.isfinite(self.value) or self.value == 0.0:
            raise ParameterError(f"slow factor needs a finite non-zero value at 0, got {self.value}")

    @property
    def at_zero(self) -> float:
        return float(self.value)

    @property
    def is_constant(self) -> bool:
        return self.func is None

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.func is None:
            return np.full(np.shape(x), self.value, dtype=float)
        return np.asarray(self.func(x), dtype=float)

    def to_dict(self) -> Dict:
        if self.func is not None:
            raise ParameterError("closure slow factors cannot be serialized")
        return {"type": "const", "value": self.value}

    @classmethod
    def from_dict(cls, raw: Optional[Dict]) -> "SlowFactor":
        if raw is None:
            return cls()
        if raw.get("type", "const") != "const":
            raise ParameterError(f"unsupported slow factor type: {raw.get('type')}")
        return cls(float(raw.get("value", 1.0)))


CONSTANT_ONE = SlowFactor()


def as_points(x, dimension: int) -> np.ndarray:
    """Coerce x to an array whose last axis has length `dimension`"""
    arr = np.asarray(x, dtype=float)
    if dimension == 1 and (arr.ndim == 0 or arr.shape[-1] != 1):
        arr = arr[..., None]
    if arr.shape[-1] != dimension:
        raise ParameterError(f"expected points of dimension {dimension}, got shape {arr.shape}")
    return arr


class SpectralModel:
    """
    Base class for spectral models.

    A model defines the filter a = ã L₁ on E = [-pi, pi]^d and the density
    f = |a|², so that r(h) is the h-th Fourier coefficient of f.
    """

    kind: str = "base"
    dimension: int
    l1: SlowFactor

    @property
    def alpha_total(self) -> float:
        """Homogeneity degree of ã"""
        raise NotImplementedError

    def homogeneous_part(self, points: np.ndarray) -> np.ndarray:
        """ã at points of shape (..., d)"""
        raise NotImplementedError

    def slow_factor(self, points: np.ndarray) -> np.ndarray:
        """L₁ at points of shape (..., d)"""
        if self.l1.is_constant:
            return np.full(points.shape[:-1], self.l1.value, dtype=float)
        return self.l1(points)

    def filter(self, points: np.ndarray) -> np.ndarray:
        """a = ã L₁ at points of shape (..., d); inf where ã blows up"""
        pts = as_points(points, self.dimension)
        with np.errstate(divide="ignore"):
            return self.homogeneous_part(pts) * self.slow_factor(pts)

    def density(self, points: np.ndarray) -> np.ndarray:
        """f = |a|² at points of shape (..., d)"""
        return np.abs(self.filter(points)) ** 2

    def singular_points(self) -> List[float]:
        """Singular points of the 1-d density in [-pi, pi]"""
        return []

    def inner_singular_points(self, x2: float) -> List[float]:
        """Values of x1 in [-pi, pi] where f(., x2) is singular"""
        return []

    def outer_singular_points(self) -> List[float]:
        """Values of x2 where the inner singular points collide"""
        return []

    def integrability_limits(self) -> Dict[str, float]:
        """Lower bounds each exponent must exceed for f to be integrable"""
        return {}

    def to_dict(self) -> Dict:
        raise NotImplementedError

    @property
    def model_id(self) -> str:
        params = ",".join(f"{k}={v}" for k, v in self.to_dict().items() if k not in ("kind", "l1"))
        return f"{self.kind}({params})"


def eval_filter(model: SpectralModel, x: Sequence[float]) -> complex:
    """
    Filter amplitude a(x) at a single point of E = [-pi, pi)^d.

    Raises:
        ParameterError: x lies outside E
        SingularPointError: x lies on a singular set where |a| is infinite
    """
    point = as_points(x, model.dimension)
    if np.any(point < -math.pi) or np.any(point >= math.pi):
        raise ParameterError(f"filter point {tuple(np.ravel(x))} is outside [-pi, pi)^{model.dimension}")
    value = complex(np.ravel(model.filter(point))[0])
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise SingularPointError(f"{model.kind} filter is singular at {tuple(np.ravel(x))}")
    return value


def check_dimension(dimension: int) -> None:
    if dimension not in (1, 2):
        raise ParameterError(f"catalog models support d in {{1, 2}}, got {dimension}")
