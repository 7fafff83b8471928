"""Product power-law filter prod |x_i|^(alpha/d)"""

from dataclasses import dataclass, field
from typing import Dict, List

import numpy as np

from ..errors import ParameterError
from .base import CONSTANT_ONE, SlowFactor, SpectralModel, check_dimension


@dataclass(frozen=True)
class Product(SpectralModel):
    """ã(x) = prod_i |x_i|^(alpha/d), singular on the coordinate axes"""

    dimension: int
    alpha: float
    l1: SlowFactor = field(default=CONSTANT_ONE)

    kind = "Product"

    def __post_init__(self):
        check_dimension(self.dimension)
        if not self.alpha > -self.dimension / 2:
            raise ParameterError(
                f"Product density is not integrable: need alpha > -d/2 = {-self.dimension / 2}, "
                f"got {self.alpha}"
            )

    @property
    def alpha_total(self) -> float:
        return self.alpha

    @property
    def coordinate_alpha(self) -> float:
        return self.alpha / self.dimension

    def homogeneous_part(self, points: np.ndarray) -> np.ndarray:
        with np.errstate(divide="ignore"):
            return np.prod(np.power(np.abs(points), self.coordinate_alpha), axis=-1)

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
