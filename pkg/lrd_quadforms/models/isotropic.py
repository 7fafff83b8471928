"""Isotropic power-law filter |x|^alpha"""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..errors import ParameterError
from .base import CONSTANT_ONE, SlowFactor, SpectralModel, check_dimension


@dataclass(frozen=True)
class Isotropic(SpectralModel):
    """ã(x) = |x|^alpha with the Euclidean norm; f is integrable iff alpha > -d/2"""

    dimension: int
    alpha: float
    l1: SlowFactor = field(default=CONSTANT_ONE)

    kind = "Isotropic"

    def __post_init__(self):
        check_dimension(self.dimension)
        if not self.alpha > -self.dimension / 2:
            raise ParameterError(
                f"Isotropic density is not integrable: need alpha > -d/2 = {-self.dimension / 2}, "
                f"got {self.alpha}"
            )

    @property
    def alpha_total(self) -> float:
        return self.alpha

    def homogeneous_part(self, points: np.ndarray) -> np.ndarray:
        radius = np.sqrt(np.sum(np.square(points), axis=-1))
        with np.errstate(divide="ignore"):
            return np.power(radius, self.alpha)

    def singular_points(self) -> List[float]:
        return [0.0] if self.alpha != 0 else []

    def inner_singular_points(self, x2: float) -> List[float]:
        return [0.0] if self.alpha != 0 else []

    def outer_singular_points(self) -> List[float]:
        return [0.0] if self.alpha != 0 else []

    def integrability_limits(self) -> Dict[str, float]:
        return {"alpha": -self.dimension / 2}

    def to_dict(self) -> Dict:
        return {"dimension": self.dimension, "kind": self.kind, "alpha": self.alpha, "l1": self.l1.to_dict()}
