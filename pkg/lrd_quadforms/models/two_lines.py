"""Anisotropic filter singular on two lines through the origin"""

import math
from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..errors import ParameterError
from .base import CONSTANT_ONE, SlowFactor, SpectralModel


@dataclass(frozen=True)
class TwoLines(SpectralModel):
    """ã(x) = |x1 + p x2|^alpha_p |x1 + q x2|^alpha_q on Z^2"""

    alpha_p: float
    alpha_q: float
    p: float
    q: float
    l1: SlowFactor = field(default=CONSTANT_ONE)
    dimension: int = 2

    kind = "TwoLines"

    def __post_init__(self):
        if self.dimension != 2:
            raise ParameterError(f"TwoLines is defined on Z^2 only, got d={self.dimension}")
        if self.p == self.q:
            raise ParameterError(f"TwoLines needs distinct slopes, got p = q = {self.p}")
        for name, value in (("alpha_p", self.alpha_p), ("alpha_q", self.alpha_q)):
            if not value > -0.5:
                raise ParameterError(f"TwoLines density is not integrable: need {name} > -1/2, got {value}")

    @property
    def alpha_total(self) -> float:
        return self.alpha_p + self.alpha_q

    def homogeneous_part(self, points: np.ndarray) -> np.ndarray:
        x1, x2 = points[..., 0], points[..., 1]
        with np.errstate(divide="ignore"):
            return np.power(np.abs(x1 + self.p * x2), self.alpha_p) * np.power(
                np.abs(x1 + self.q * x2), self.alpha_q
            )

    def inner_singular_points(self, x2: float) -> List[float]:
        points = []
        for slope, exponent in ((self.p, self.alpha_p), (self.q, self.alpha_q)):
            x1 = -slope * x2
            if exponent != 0 and -math.pi <= x1 <= math.pi:
                points.append(x1)
        return points

    def outer_singular_points(self) -> List[float]:
        return [0.0]

    def integrability_limits(self) -> Dict[str, float]:
        return {"alpha_p": -0.5, "alpha_q": -0.5}

    def to_dict(self) -> Dict:
        return {
            "dimension": 2,
            "kind": self.kind,
            "alpha_p": self.alpha_p,
            "alpha_q": self.alpha_q,
            "p": self.p,
            "q": self.q,
            "l1": self.l1.to_dict(),
        }
