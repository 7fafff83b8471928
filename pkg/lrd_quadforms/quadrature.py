"""Composite Gauss-Legendre quadrature with dyadic refinement toward singular points"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .config import get_settings
from .errors import IntegralDivergenceError, QuadratureBudgetError

logger = logging.getLogger(__name__)

Integrand = Callable[[np.ndarray], np.ndarray]

# Levels are evaluated in blocks so cheap integrands stay vectorized and
# expensive ones (iterated 2-d integrals) stop early.
_LEVEL_BLOCK = 8
_DIVERGENCE_RATIO = 0.999
_PHASE_PER_PANEL = 4.0


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    error: float
    evaluations: int = 0


@lru_cache(maxsize=None)
def gauss_legendre_rule(order: int) -> Tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights mapped to [0, 1]"""
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return 0.5 * (nodes + 1.0), 0.5 * weights


def composite_gauss(func: Integrand, a: float, b: float, panels: int, order: int) -> float:
    """Uniform composite Gauss-Legendre rule on [a, b]"""
    xi, w = gauss_legendre_rule(order)
    width = (b - a) / panels
    starts = a + width * np.arange(panels)
    x = (starts[:, None] + width * xi[None, :]).ravel()
    values = np.asarray(func(x), dtype=float).reshape(panels, order)
    return float(width * np.sum(values @ w))


def _panels_for(width: float, frequency: float) -> int:
    return max(1, int(math.ceil(abs(width) * frequency / _PHASE_PER_PANEL)))


def integrate_regular(
    func: Integrand,
    a: float,
    b: float,
    tol: float,
    frequency: float = 0.0,
    order: Optional[int] = None,
) -> QuadratureResult:
    """Integrate a smooth function on [a, b] by panel doubling until two rules agree"""
    settings = get_settings().quadrature
    order = order or settings.order
    if b == a:
        return QuadratureResult(0.0, 0.0, 0)
    panels = _panels_for(b - a, frequency)
    previous = composite_gauss(func, a, b, panels, order)
    current = previous
    evaluations = panels * order
    while True:
        panels *= 2
        if panels > settings.max_panels:
            raise QuadratureBudgetError(
                f"regular panel budget exceeded on [{a:.6g}, {b:.6g}]", abs(current - previous)
            )
        current = composite_gauss(func, a, b, panels, order)
        evaluations += panels * order
        error = abs(current - previous)
        if error <= tol:
            return QuadratureResult(current, error, evaluations)
        previous = current


def _dyadic_level_nodes(
    s: float, w: float, levels: Sequence[int], frequency: float, order: int
) -> Tuple[np.ndarray, np.ndarray, List[int]]:
    """Nodes and weights of the dyadic pieces [s + w 2^-(k+1), s + w 2^-k]"""
    xi, wt = gauss_legendre_rule(order)
    xs, ws, counts = [], [], []
    for k in levels:
        lo = w * 2.0 ** (-k - 1)
        hi = w * 2.0**-k
        m = _panels_for(hi - lo, frequency)
        width = (hi - lo) / m
        starts = lo + width * np.arange(m)
        x = (starts[:, None] + width * xi[None, :]).ravel()
        xs.append(s + x)
        ws.append(np.tile(wt * abs(width), m))
        counts.append(m * order)
    return np.concatenate(xs), np.concatenate(ws), counts


def integrate_singular_end(
    func: Integrand,
    s: float,
    w: float,
    tol: float,
    frequency: float = 0.0,
    order: Optional[int] = None,
    max_depth: Optional[int] = None,
) -> QuadratureResult:
    """
    Integrate over the interval between s and s + w when func may blow up at s.

    The interval is split into geometric pieces shrinking toward s. Once the
    piece integrals decay geometrically the remainder is summed in closed form
    from the last ratio, which is exact for a power singularity times a
    constant.

    Args:
        func: vectorized integrand
        s: singular endpoint
        w: signed width (negative integrates to the left of s); the result
            is the integral over the interval in increasing order either way
        tol: absolute tolerance
        frequency: oscillation hint, sets the sub-panel count of each piece

    Returns:
        QuadratureResult with the extrapolated value and error estimate
    """
    settings = get_settings().quadrature
    order = order or settings.order
    max_depth = max_depth or settings.max_depth
    if w == 0:
        return QuadratureResult(0.0, 0.0, 0)

    pieces: List[float] = []
    evaluations = 0
    estimate = 0.0
    error = math.inf
    ratio = math.nan

    for start in range(0, max_depth, _LEVEL_BLOCK):
        levels = list(range(start, min(start + _LEVEL_BLOCK, max_depth)))
        x, weights, counts = _dyadic_level_nodes(s, w, levels, frequency, order)
        values = np.asarray(func(x), dtype=float) * weights
        evaluations += x.size
        offsets = np.cumsum([0] + counts)
        for i in range(len(levels)):
            pieces.append(float(values[offsets[i]:offsets[i + 1]].sum()))

            k = len(pieces) - 1
            partial = math.fsum(pieces)
            if abs(pieces[k]) <= 1e-3 * tol and k >= 2:
                logger.debug("dyadic pieces vanished at level %d near %.6g", k, s)
                return QuadratureResult(partial, abs(pieces[k]), evaluations)
            if k < 2 or pieces[k - 1] == 0.0:
                continue
            ratio = pieces[k] / pieces[k - 1]
            if ratio >= _DIVERGENCE_RATIO and k >= 4:
                last = pieces[k - 3:k + 1]
                ratios = [last[j + 1] / last[j] for j in range(3) if last[j] != 0.0]
                if len(ratios) == 3 and min(ratios) >= _DIVERGENCE_RATIO and abs(pieces[k]) > tol:
                    raise IntegralDivergenceError(
                        f"integrand is not integrable at {s:.6g}", ratio
                    )
            if abs(ratio) >= 1.0:
                error = math.inf
                continue
            current = partial + pieces[k] * ratio / (1.0 - ratio)
            error = abs(current - estimate)
            estimate = current
            if error <= tol and k >= 3:
                return QuadratureResult(estimate, error, evaluations)

    raise QuadratureBudgetError(
        f"dyadic refinement toward {s:.6g} did not converge in {max_depth} levels (ratio {ratio:.4f})",
        error if math.isfinite(error) else abs(pieces[-1]),
    )


def _breakpoints(a: float, b: float, singular_points: Iterable[float]) -> Tuple[List[float], set]:
    eps = 1e-14 * max(1.0, abs(a), abs(b))
    inside = sorted({float(p) for p in singular_points if a - eps <= p <= b + eps})
    interior = [p for p in inside if a + eps < p < b - eps]
    singular = set(interior)
    if any(abs(p - a) <= eps for p in inside):
        singular.add(a)
    if any(abs(p - b) <= eps for p in inside):
        singular.add(b)
    return [a] + interior + [b], singular


def integrate_1d(
    func: Integrand,
    a: float,
    b: float,
    singular_points: Iterable[float] = (),
    tol: Optional[float] = None,
    frequency: float = 0.0,
) -> QuadratureResult:
    """
    Integrate func over [a, b], refining dyadically toward the given points.

    Every sub-interval between breakpoints is handled by the dyadic rule at
    its singular end(s) and by panel doubling otherwise.
    """
    tol = tol if tol is not None else get_settings().quadrature.tolerance
    if b < a:
        res = integrate_1d(func, b, a, singular_points, tol, frequency)
        return QuadratureResult(-res.value, res.error, res.evaluations)
    points, singular = _breakpoints(a, b, singular_points)
    pieces_count = max(1, 2 * (len(points) - 1))
    piece_tol = tol / pieces_count

    values: List[float] = []
    error = 0.0
    evaluations = 0
    for lo, hi in zip(points[:-1], points[1:]):
        if hi <= lo:
            continue
        left, right = lo in singular, hi in singular
        if left and right:
            mid = 0.5 * (lo + hi)
            parts = [
                integrate_singular_end(func, lo, mid - lo, piece_tol, frequency),
                integrate_singular_end(func, hi, mid - hi, piece_tol, frequency),
            ]
        elif left:
            parts = [integrate_singular_end(func, lo, hi - lo, piece_tol, frequency)]
        elif right:
            parts = [integrate_singular_end(func, hi, lo - hi, piece_tol, frequency)]
        else:
            parts = [integrate_regular(func, lo, hi, piece_tol, frequency)]
        for part in parts:
            values.append(part.value)
            error += part.error
            evaluations += part.evaluations
    return QuadratureResult(math.fsum(values), error, evaluations)


def integrate_2d(
    func: Callable[[np.ndarray, float], np.ndarray],
    x1_range: Tuple[float, float],
    x2_range: Tuple[float, float],
    inner_singular: Callable[[float], Sequence[float]] = lambda x2: (),
    outer_singular: Iterable[float] = (),
    tol: Optional[float] = None,
    frequency: Tuple[float, float] = (0.0, 0.0),
) -> QuadratureResult:
    """
    Iterated integral of func(x1, x2) over a rectangle.

    The inner integral over x1 sees the singular points inner_singular(x2);
    the outer integral over x2 refines toward outer_singular, where the inner
    singular points collide. The inner tolerance is a hundredth of the outer.
    """
    tol = tol if tol is not None else get_settings().quadrature.tolerance
    inner_tol = 1e-2 * tol
    a1, b1 = x1_range
    count = [0]

    def outer(x2_values: np.ndarray) -> np.ndarray:
        out = np.empty(len(x2_values))
        for i, x2 in enumerate(np.asarray(x2_values, dtype=float)):
            res = integrate_1d(
                lambda x1, x2=x2: func(x1, x2),
                a1,
                b1,
                inner_singular(x2),
                inner_tol,
                frequency[0],
            )
            out[i] = res.value
            count[0] += res.evaluations
        return out

    res = integrate_1d(outer, x2_range[0], x2_range[1], outer_singular, tol, frequency[1])
    logger.debug("2-d quadrature used %d integrand evaluations", count[0])
    return QuadratureResult(res.value, res.error, count[0])


def cosine_transform_table(
    density: Integrand,
    max_lag: int,
    tol: Optional[float] = None,
    order: Optional[int] = None,
) -> Tuple[np.ndarray, float]:
    """
    Compute c(h) = 2 * integral over [0, pi] of cos(h x) density(x) dx for h = 0..max_lag.

    density must be even on [-pi, pi] and may only be singular at 0. Uniform
    panels of width pi/P with P >= 2 max_lag are summed for every lag at once
    by one FFT per node offset; the first panel is refined dyadically toward
    the origin with per-lag tail extrapolation. The rule is repeated with 2P
    panels and the difference is the error estimate.

    Returns:
        (values for h = 0..max_lag, error estimate)
    """
    settings = get_settings().quadrature
    tol = tol if tol is not None else settings.tolerance
    order = order or settings.order
    panels = 64
    while panels < 2 * max(max_lag, 1):
        panels *= 2

    previous = _cosine_table_once(density, max_lag, panels, order, settings.max_depth)
    while True:
        panels *= 2
        current = _cosine_table_once(density, max_lag, panels, order, settings.max_depth)
        error = float(np.max(np.abs(current - previous)))
        logger.debug("cosine table with %d panels: error %.3e", panels, error)
        if error <= tol:
            return current, error
        if 2 * panels > settings.max_panels:
            raise QuadratureBudgetError(
                f"cosine table up to lag {max_lag} exceeded the panel budget", error
            )
        previous = current


def _cosine_table_once(
    density: Integrand, max_lag: int, panels: int, order: int, depth: int
) -> np.ndarray:
    xi, w = gauss_legendre_rule(order)
    delta = math.pi / panels
    lags = np.arange(max_lag + 1)

    # panels 1..P-1: one FFT over the panel index per node offset
    j = np.arange(1, panels)
    x = (j[:, None] + xi[None, :]) * delta
    weighted = np.zeros((2 * panels, order))
    weighted[1:panels, :] = density(x.ravel()).reshape(panels - 1, order) * (w * delta)[None, :]
    sums = np.fft.ifft(weighted, axis=0)[: max_lag + 1, :] * (2 * panels)
    phase = np.exp(1j * np.outer(lags, xi * delta))
    body = np.real(np.sum(sums * phase, axis=1))

    # panel 0: dyadic levels toward the origin
    levels = np.arange(depth)
    lo = delta * 2.0 ** (-levels - 1)
    width = lo
    nodes = lo[:, None] + width[:, None] * xi[None, :]
    weights = width[:, None] * w[None, :]
    fw = density(nodes.ravel()).reshape(depth, order) * weights

    head = np.empty(max_lag + 1)
    chunk = max(1, 4_000_000 // (depth * order))
    for start in range(0, max_lag + 1, chunk):
        h = lags[start:start + chunk]
        cos = np.cos(h[:, None, None] * nodes[None, :, :])
        piece = np.einsum("hko,ko->hk", cos, fw)
        last, before = piece[:, -1], piece[:, -2]
        with np.errstate(divide="ignore", invalid="ignore"):
            ratio = np.where(before != 0.0, last / before, 0.0)
        ratio = np.where(np.abs(ratio) < 1.0, ratio, 0.0)
        head[start:start + chunk] = piece.sum(axis=1) + last * ratio / (1.0 - ratio)

    return 2.0 * (body + head)
