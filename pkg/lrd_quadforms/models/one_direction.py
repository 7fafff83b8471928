"""Memory along a single direction: f(x1, x2) = f̃(x1 + p x2) / (2 pi)"""

import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..errors import ParameterError
from .base import CONSTANT_ONE, SlowFactor, SpectralModel


def wrap(u: np.ndarray) -> np.ndarray:
    """Reduce u modulo 2 pi into [-pi, pi); values already there are returned unchanged"""
    u = np.asarray(u, dtype=float)
    inside = (u >= -math.pi) & (u < math.pi)
    return np.where(inside, u, np.mod(u + math.pi, 2 * math.pi) - math.pi)


@dataclass(frozen=True)
class OneDirection(SpectralModel):
    """
    One-direction memory model on Z^2.

    The 1-d density f̃(u) = L₁(u)² |u|^(2 alpha) is even and 2 pi periodic;
    L₁ acts on the scalar u = x1 + p x2 reduced to [-pi, pi). The slope p may
    be any real number; integer p makes f periodic in both coordinates.
    """

    alpha: float
    p: float
    l1: SlowFactor = field(default=CONSTANT_ONE)
    dimension: int = 2

    kind = "OneDirection"

    def __post_init__(self):
        if self.dimension != 2:
            raise ParameterError(f"OneDirection is defined on Z^2 only, got d={self.dimension}")
        if not self.alpha > -0.5:
            raise ParameterError(f"OneDirection density is not integrable: need alpha > -1/2, got {self.alpha}")

    @property
    def alpha_total(self) -> float:
        return self.alpha

    @property
    def integer_slope(self) -> bool:
        return float(self.p).is_integer()

    def homogeneous_part(self, points: np.ndarray) -> np.ndarray:
        u = points[..., 0] + self.p * points[..., 1]
        with np.errstate(divide="ignore"):
            return (2 * math.pi) ** -0.5 * np.power(np.abs(u), self.alpha)

    def filter(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        if pts.shape[-1] != 2:
            raise ParameterError(f"expected points of dimension 2, got shape {pts.shape}")
        u = wrap(pts[..., 0] + self.p * pts[..., 1])
        with np.errstate(divide="ignore"):
            return (2 * math.pi) ** -0.5 * np.power(np.abs(u), self.alpha) * self.l1(u)

    def tilde_density(self, u: np.ndarray) -> np.ndarray:
        """f̃(u), the even 2 pi periodic density along the memory direction"""
        w = wrap(u)
        with np.errstate(divide="ignore"):
            return np.square(self.l1(w)) * np.power(np.abs(w), 2 * self.alpha)

    def inner_singular_points(self, x2: float) -> List[float]:
        if self.alpha == 0:
            return []
        shift = self.p * x2
        k_lo = math.ceil((shift - math.pi) / (2 * math.pi) - 1e-12)
        k_hi = math.floor((shift + math.pi) / (2 * math.pi) + 1e-12)
        return [2 * math.pi * k - shift for k in range(k_lo, k_hi + 1)]

    def integrability_limits(self) -> Dict[str, float]:
        return {"alpha": -0.5}

    def to_dict(self) -> Dict:
        return {"dimension": 2, "kind": self.kind, "alpha": self.alpha, "p": self.p, "l1": self.l1.to_dict()}
