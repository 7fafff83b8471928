"""Counter-based random streams"""

from dataclasses import dataclass, replace
from typing import Dict

import numpy as np

from .errors import ParameterError

_U64 = 2**64
_SUB_BITS = 32


@dataclass(frozen=True)
class RngStream:
    """
    Philox stream keyed by (seed, index) and positioned by counter.

    Replicate r always uses index r, so its draws do not depend on which
    worker runs it or in which order. The counter selects a ladder position
    and sub selects a chunk within it; each (counter, sub) pair is a separate
    block of 2^128 draws.
    """

    seed: int
    index: int = 0
    counter: int = 0
    sub: int = 0

    def __post_init__(self):
        for name in ("seed", "index"):
            value = getattr(self, name)
            if not 0 <= value < _U64:
                raise ParameterError(f"{name} must be an unsigned 64-bit integer, got {value}")
        if self.counter < 0 or not 0 <= self.sub < 2**_SUB_BITS:
            raise ParameterError(f"invalid stream position counter={self.counter}, sub={self.sub}")

    def generator(self) -> np.random.Generator:
        bits = np.random.Philox(key=np.array([self.seed, self.index], dtype=np.uint64))
        jumps = (self.counter << _SUB_BITS) | self.sub
        if jumps:
            bits = bits.jumped(jumps)
        return np.random.Generator(bits)

    def stream(self, index: int) -> "RngStream":
        return replace(self, index=index, counter=0, sub=0)

    def at(self, counter: int) -> "RngStream":
        return replace(self, counter=counter, sub=0)

    def substream(self, k: int) -> "RngStream":
        return replace(self, sub=k)

    def to_dict(self) -> Dict[str, int]:
        return {"seed": self.seed, "index": self.index, "counter": self.counter, "sub": self.sub}
