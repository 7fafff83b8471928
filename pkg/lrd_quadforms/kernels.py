"""Dirichlet-type kernels H_n, their limit H and the Fejér kernel"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import KernelDomainError, ParameterError
from .models.one_direction import wrap


def _points(z) -> np.ndarray:
    arr = np.asarray(z, dtype=float)
    return arr[..., None] if arr.ndim == 0 else arr


def kernel_H(z) -> np.ndarray:
    """H(z) = prod_j (e^{i z_j} - 1) / (i z_j), equal to 1 at z_j = 0; points of shape (..., d)"""
    pts = _points(z)
    factors = np.exp(0.5j * pts) * np.sinc(pts / (2 * math.pi))
    return np.prod(factors, axis=-1)


def kernel_Hn(n: int, t) -> np.ndarray:
    """H_n(t) = sum_{k in A_n} e^{i<k,t>} for any real t (2 pi periodic per axis)"""
    if n < 1:
        raise ParameterError(f"kernel needs n >= 1, got {n}")
    w = wrap(_points(t))
    factors = np.exp(0.5j * (n + 1) * w) * n * np.sinc(n * w / (2 * math.pi)) / np.sinc(w / (2 * math.pi))
    return np.prod(factors, axis=-1)


def kernel_Hn_scaled(n: int, z) -> np.ndarray:
    """
    n^-d H_n(z / n) for z in nE.

    Raises:
        KernelDomainError: some |z_j| > n pi
    """
    if n < 1:
        raise ParameterError(f"kernel needs n >= 1, got {n}")
    pts = _points(z)
    if np.any(np.abs(pts) > n * math.pi):
        raise KernelDomainError(f"kernel_Hn_scaled needs |z_j| <= n pi = {n * math.pi:.6g}")
    factors = (
        np.exp(0.5j * pts * (n + 1) / n)
        * np.sinc(pts / (2 * math.pi))
        / np.sinc(pts / (2 * math.pi * n))
    )
    return np.prod(factors, axis=-1)


def fejer(n: int, x) -> np.ndarray:
    """F_n(x) = n^-1 |sum_{k=1}^n e^{ikx}|², integrating to 2 pi over [-pi, pi]"""
    if n < 1:
        raise ParameterError(f"kernel needs n >= 1, got {n}")
    w = wrap(np.asarray(x, dtype=float))
    return n * (np.sinc(n * w / (2 * math.pi)) / np.sinc(w / (2 * math.pi))) ** 2


@dataclass(frozen=True)
class KernelPoint:
    """H(z) and, for a given n, n^-d H_n(z/n) at one point z"""

    z: tuple
    H: complex
    n: Optional[int] = None
    Hn_scaled: Optional[complex] = None

    @property
    def dimension(self) -> int:
        return len(self.z)

    @classmethod
    def at(cls, z, n: Optional[int] = None) -> "KernelPoint":
        pts = tuple(float(v) for v in np.atleast_1d(z))
        scaled = complex(kernel_Hn_scaled(n, pts)) if n is not None else None
        return cls(pts, complex(kernel_H(pts)), n, scaled)
