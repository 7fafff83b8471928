"""Exact variances of Gaussian quadratic statistics by the Wick/Isserlis formula"""

import logging
from typing import Optional, Sequence

import numpy as np

from .config import get_settings
from .covariance import CovarianceTable, as_lag, covariance_table
from .errors import DimensionMismatchError, ResourceBudgetError
from .models import SpectralModel
from .quadratic_forms import QuadraticFormSpec

logger = logging.getLogger(__name__)


def _offset_grid(n: int, d: int) -> np.ndarray:
    """All u with |u_k| < n, shape (2n-1, ..., 2n-1, d)"""
    axis = np.arange(-(n - 1), n)
    return np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)


def _interval(n: int, m: int):
    """Indices i in 1..n with i + m also in 1..n"""
    return max(1, 1 - m), min(n, n - m)


def _pair_counts(n: int, m: Sequence[int], m2: Sequence[int], u: np.ndarray) -> np.ndarray:
    """#{(i, i'): i + m, i in A_n, i' + m2, i' in A_n, i' - i = u}"""
    counts = np.ones(u.shape[:-1])
    for k in range(u.shape[-1]):
        lo, hi = _interval(n, m[k])
        lo2, hi2 = _interval(n, m2[k])
        uk = u[..., k]
        counts = counts * np.clip(np.minimum(hi + uk, hi2) - np.maximum(lo + uk, lo2) + 1, 0, None)
    return counts


def _table_for(model: SpectralModel, radius: int, table: Optional[CovarianceTable]) -> CovarianceTable:
    if table is not None and table.radius >= radius:
        return table
    return covariance_table(model, radius)


def _check_budget(cost: int) -> None:
    budget = get_settings().limit_laws.wick_budget
    if cost > budget:
        raise ResourceBudgetError(f"Wick sum needs {cost} terms, budget is {budget}")


def wick_variance_qn(
    model: SpectralModel,
    spec: QuadraticFormSpec,
    n: int,
    table: Optional[CovarianceTable] = None,
) -> float:
    """
    Var(Q_n) for Q_n = n^-d sum_m g_m sum_i X_i X_{i+m}.

    Each pair of lags (m, m') contributes
    sum_u c(u) [r(u) r(u + m' - m) + r(u + m') r(u - m)] where c(u) counts
    the index pairs at offset u = i' - i.
    """
    if model.dimension != spec.dimension:
        raise DimensionMismatchError(f"model dimension {model.dimension} != form dimension {spec.dimension}")
    d = model.dimension
    active = [(lag, g) for lag, g in spec.weights if max(abs(v) for v in lag) < n]
    _check_budget(len(active) ** 2 * (2 * n - 1) ** d)
    if not active:
        return 0.0
    radius = n - 1 + 2 * max(max(abs(v) for v in lag) for lag, _ in active)
    table = _table_for(model, radius, table)
    u = _offset_grid(n, d)

    total = 0.0
    for m, g in active:
        m_arr = np.array(m)
        for m2, g2 in active:
            m2_arr = np.array(m2)
            counts = _pair_counts(n, m, m2, u)
            terms = table.lookup(u) * table.lookup(u + m2_arr - m_arr) + table.lookup(u + m2_arr) * table.lookup(
                u - m_arr
            )
            total += g * g2 * float(np.sum(counts * terms))
    return total / float(n) ** (2 * d)


def wick_variance_empirical_cov(
    model: SpectralModel,
    h: Sequence[int],
    n: int,
    table: Optional[CovarianceTable] = None,
) -> float:
    """Var(r̂(h)) = n^-2d sum_u prod_k (n - |u_k|) [r(u)² + r(u + h) r(u - h)]"""
    d = model.dimension
    lag = np.array(as_lag(h, d))
    _check_budget((2 * n - 1) ** d)
    radius = n - 1 + int(np.max(np.abs(lag)))
    table = _table_for(model, radius, table)
    u = _offset_grid(n, d)
    counts = np.prod(n - np.abs(u), axis=-1).astype(float)
    terms = table.lookup(u) ** 2 + table.lookup(u + lag) * table.lookup(u - lag)
    return float(np.sum(counts * terms)) / float(n) ** (2 * d)
