"""Field synthesis: spectral FFT sampler and exact dense sampler"""

import logging
import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Dict, Optional, Tuple

import numpy as np

from .config import get_settings
from .covariance import covariance_table
from .errors import FactorizationError, ParameterError, ResourceBudgetError, SymmetryError
from .models import OneDirection, SpectralModel, TwoLines
from .models.one_direction import wrap
from .quadrature import integrate_2d
from .rng import RngStream

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FieldSample:
    """
    Realization on the lattice box {1-m, ..., n+m}^d.

    values[k + m - 1] holds X_k, so the observation window A_n = {1..n}^d
    is values[m:m+n] along every axis.
    """

    values: np.ndarray
    n: int
    margin: int = 0
    metadata: Dict = field(default_factory=dict)

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        side = self.n + 2 * self.margin
        if self.n < 1 or self.margin < 0:
            raise ParameterError(f"invalid window n={self.n}, margin={self.margin}")
        if values.ndim < 1 or any(s != side for s in values.shape):
            raise ParameterError(f"values of shape {values.shape} do not cover side {side}")
        if not np.all(np.isfinite(values)):
            raise ParameterError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def dimension(self) -> int:
        return self.values.ndim

    @property
    def window(self) -> np.ndarray:
        m, n = self.margin, self.n
        return self.values[(slice(m, m + n),) * self.dimension]

    def at(self, k) -> float:
        """X_k for a lattice point k"""
        idx = tuple(int(v) + self.margin - 1 for v in np.atleast_1d(k))
        if any(i < 0 or i >= self.values.shape[0] for i in idx):
            raise IndexError(f"lattice point {k} is outside the sampled box")
        return float(self.values[idx])


def sample_mean(field: FieldSample) -> float:
    """X̄_n over A_n, margins excluded"""
    return float(np.mean(field.window))


def _grid_size(side: int, oversample: int) -> int:
    size = oversample * side
    return size + (size % 2)


def frequency_grid(size: int) -> np.ndarray:
    """Half-cell offset midpoints of [-pi, pi]; x_{N-1-k} = -x_k and 0 is never a node"""
    step = 2 * math.pi / size
    return -math.pi + (np.arange(size) + 0.5) * step


@lru_cache(maxsize=None)
def _line_cell_factor(exponent: float, slope: float) -> float:
    """Mean of |s1 + slope s2|^exponent over the unit square centred at 0"""
    res = integrate_2d(
        lambda s1, s2: np.power(np.abs(s1 + slope * s2), exponent),
        (-0.5, 0.5),
        (-0.5, 0.5),
        lambda s2: [-slope * s2] if abs(slope * s2) <= 0.5 else [],
        [0.0] + ([0.5 / slope, -0.5 / slope] if abs(slope) > 1 else []),
        tol=1e-9,
    )
    return res.value


@lru_cache(maxsize=16)
def _amplitude_grid(model: SpectralModel, size: int) -> np.ndarray:
    """|a| on the offset grid; cells centred on a singular line get the cell-averaged density"""
    x = frequency_grid(size)
    mesh = np.stack(np.meshgrid(*([x] * model.dimension), indexing="ij"), axis=-1)
    density = model.density(mesh)
    on_line = ~np.isfinite(density)
    if np.any(on_line):
        if not isinstance(model, (TwoLines, OneDirection)):
            raise SymmetryError(f"{model.kind} density is infinite at a grid node")
        step = 2 * math.pi / size
        density = density.copy()
        pts = mesh[on_line]
        if isinstance(model, TwoLines):
            hit_p = np.abs(pts[:, 0] + model.p * pts[:, 1]) < np.abs(pts[:, 0] + model.q * pts[:, 1])
            for slope, exponent, other_slope, other_exp, mask in (
                (model.p, model.alpha_p, model.q, model.alpha_q, hit_p),
                (model.q, model.alpha_q, model.p, model.alpha_p, ~hit_p),
            ):
                if not np.any(mask):
                    continue
                factor = _line_cell_factor(2 * exponent, slope) * step ** (2 * exponent)
                rest = np.abs(pts[mask, 0] + other_slope * pts[mask, 1]) ** (2 * other_exp)
                cells = density[on_line]
                cells[mask] = factor * rest * model.slow_factor(pts[mask]) ** 2
                density[on_line] = cells
        else:
            factor = _line_cell_factor(2 * model.alpha, model.p) * step ** (2 * model.alpha)
            u = wrap(pts[:, 0] + model.p * pts[:, 1])
            density[on_line] = factor * model.l1(u) ** 2 / (2 * math.pi)
        logger.debug("%d grid cells lie on singular lines, using cell averages", int(on_line.sum()))
    amplitude = np.sqrt(density)
    amplitude.setflags(write=False)
    return amplitude


def _hermitian_noise(
    generator: np.random.Generator, shape: Tuple[int, ...], cell: float, grid_ndim: int
) -> np.ndarray:
    """Complex Gaussian increments with W[mirror(k)] = conj(W[k]) and E|W|² = cell on the last grid_ndim axes"""
    z = math.sqrt(cell / 2) * (
        generator.standard_normal(shape) + 1j * generator.standard_normal(shape)
    )
    grid_axes = tuple(range(len(shape) - grid_ndim, len(shape)))
    mirrored = np.conj(np.flip(z, axis=grid_axes))
    return (z + mirrored) / math.sqrt(2)


def _synthesize(
    amplitude: np.ndarray,
    noise: np.ndarray,
    side: int,
    dimension: int,
    residue_limit: float,
) -> np.ndarray:
    """X_j = sum_k A_k W_k e^{i<j,x_k>} for j in {0..side-1}^d via one inverse FFT"""
    size = amplitude.shape[-1]
    axes = tuple(range(noise.ndim - dimension, noise.ndim))
    spectrum = np.fft.ifftn(amplitude * noise, axes=axes) * size**dimension
    spectrum = spectrum[(Ellipsis,) + (slice(0, side),) * dimension]
    j = np.arange(side)
    phase = np.exp(1j * j * (-math.pi + math.pi / size))
    for axis in range(dimension):
        shape = [1] * spectrum.ndim
        shape[spectrum.ndim - dimension + axis] = side
        spectrum = spectrum * phase.reshape(shape)
    rms = math.sqrt(float(np.mean(spectrum.real**2))) or 1.0
    residue = float(np.max(np.abs(spectrum.imag))) / rms
    if residue > residue_limit:
        raise SymmetryError(f"imaginary residue {residue:.3e} exceeds {residue_limit:.1e} of the field RMS")
    return spectrum.real


def simulate_spectral(
    model: SpectralModel,
    n: int,
    margin: int = 0,
    oversample: Optional[int] = None,
    rng: Optional[RngStream] = None,
) -> FieldSample:
    """
    Spectral synthesis on a Hermitian-symmetric frequency grid of
    oversample * (n + 2 margin) points per axis (rounded up to even).

    Integer-slope one-direction models are built from independent 1-d
    series along the memory direction, which keeps the singular lines off
    the grid.

    Raises:
        ResourceBudgetError: grid larger than the configured memory budget
        SymmetryError: imaginary residue above the configured threshold
    """
    settings = get_settings().simulation
    oversample = settings.oversample if oversample is None else oversample
    rng = rng or RngStream(0)
    if oversample < 1 or int(oversample) != oversample:
        raise ParameterError(f"oversample must be a positive integer, got {oversample}")
    side = n + 2 * margin
    size = _grid_size(side, int(oversample))
    d = model.dimension

    metadata = {
        "model": model.model_id,
        "n": n,
        "margin": margin,
        "oversample": int(oversample),
        "grid": size,
        "method": "spectral",
        **rng.to_dict(),
    }

    if isinstance(model, OneDirection) and model.integer_slope:
        return _simulate_sheared(model, n, margin, size, rng, settings, metadata)

    if size**d > settings.memory_budget_points:
        raise ResourceBudgetError(
            f"frequency grid of {size}^{d} points exceeds the budget of {settings.memory_budget_points}"
        )
    amplitude = _amplitude_grid(model, size)
    cell = (2 * math.pi / size) ** d
    noise = _hermitian_noise(rng.generator(), (size,) * d, cell, d)
    values = _synthesize(amplitude, noise, side, d, settings.imaginary_residue)
    return FieldSample(values, n, margin, metadata)


def _simulate_sheared(
    model: OneDirection,
    n: int,
    margin: int,
    size: int,
    rng: RngStream,
    settings,
    metadata: Dict,
) -> FieldSample:
    """X[i, j] = Y_{j - p i}[i] with independent 1-d series Y_c of density f̃"""
    side = n + 2 * margin
    p = int(model.p)
    offsets = np.arange(side)[:, None] * p
    labels = np.arange(side)[None, :] - offsets
    lowest = int(labels.min())
    count = int(labels.max()) - lowest + 1
    if count * size > settings.memory_budget_points:
        raise ResourceBudgetError(
            f"{count} line series of {size} frequencies exceed the budget of {settings.memory_budget_points}"
        )
    x = frequency_grid(size)
    amplitude = np.sqrt(model.tilde_density(x))
    noise = _hermitian_noise(rng.generator(), (count, size), 2 * math.pi / size, 1)
    lines = _synthesize(amplitude, noise, side, 1, settings.imaginary_residue)
    rows = np.arange(side)[:, None]
    values = lines[labels - lowest, np.broadcast_to(rows, labels.shape)]
    metadata = dict(metadata, method="spectral-sheared", lines=count)
    return FieldSample(values, n, margin, metadata)


@lru_cache(maxsize=8)
def _cholesky_factor(model: SpectralModel, side: int) -> np.ndarray:
    settings = get_settings().simulation
    d = model.dimension
    table = covariance_table(model, side - 1)
    points = np.stack(np.meshgrid(*([np.arange(side)] * d), indexing="ij"), axis=-1).reshape(-1, d)
    lags = points[:, None, :] - points[None, :, :]
    matrix = table.lookup(lags)
    try:
        return np.linalg.cholesky(matrix)
    except np.linalg.LinAlgError:
        jitter = settings.jitter * table.variance
        logger.debug("covariance matrix of size %d needs jitter %.3e", matrix.shape[0], jitter)
    try:
        return np.linalg.cholesky(matrix + jitter * np.eye(matrix.shape[0]))
    except np.linalg.LinAlgError as e:
        raise FactorizationError(
            f"covariance matrix for {model.model_id} is not positive semi-definite within jitter {jitter:.1e}"
        ) from e


def simulate_exact(
    model: SpectralModel,
    n: int,
    margin: int = 0,
    rng: Optional[RngStream] = None,
) -> FieldSample:
    """
    Exact Gaussian draw with covariance [r(i - j)] by Cholesky factorization.

    Raises:
        ResourceBudgetError: (n + 2 margin)^d above the dense bound
        FactorizationError: covariance matrix not PSD within jitter
    """
    settings = get_settings().simulation
    rng = rng or RngStream(0)
    side = n + 2 * margin
    d = model.dimension
    if side**d > settings.exact_max_points:
        raise ResourceBudgetError(
            f"exact sampler needs (n + 2m)^d <= {settings.exact_max_points}, got {side**d}"
        )
    factor = _cholesky_factor(model, side)
    z = rng.generator().standard_normal(factor.shape[0])
    values = (factor @ z).reshape((side,) * d)
    metadata = {"model": model.model_id, "n": n, "margin": margin, "method": "exact", **rng.to_dict()}
    return FieldSample(values, n, margin, metadata)
