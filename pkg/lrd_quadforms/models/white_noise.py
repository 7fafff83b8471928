"""Flat spectrum"""

import math
from dataclasses import dataclass, field
from typing import Dict

import numpy as np

from .base import CONSTANT_ONE, SlowFactor, SpectralModel, check_dimension


@dataclass(frozen=True)
class WhiteNoise(SpectralModel):
    """a = (2 pi)^(-d/2), so r(0) = 1 and r(h) = 0 otherwise"""

    dimension: int
    l1: SlowFactor = field(default=CONSTANT_ONE)

    kind = "WhiteNoise"

    def __post_init__(self):
        check_dimension(self.dimension)

    @property
    def alpha_total(self) -> float:
        return 0.0

    def homogeneous_part(self, points: np.ndarray) -> np.ndarray:
        return np.full(points.shape[:-1], (2 * math.pi) ** (-self.dimension / 2))

    def to_dict(self) -> Dict:
        return {"dimension": self.dimension, "kind": self.kind, "l1": self.l1.to_dict()}
