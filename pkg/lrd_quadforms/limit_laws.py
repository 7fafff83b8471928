"""Limiting variances and limit-law samplers for normalized quadratic forms"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed

from .condition_h import FailsLemmaRegion, check_condition_h
from .config import get_settings
from .covariance import as_lag, fourier_integral
from .errors import (
    AdmissibilityError,
    DimensionMismatchError,
    IntegralDivergenceError,
    ParameterError,
)
from .kernels import kernel_H
from .models import Isotropic, OneDirection, Product, SpectralModel, TwoLines
from .models.base import SlowFactor
from .quadrature import gauss_legendre_rule
from .quadratic_forms import QuadraticFormSpec
from .rng import RngStream
from .simulator import _hermitian_noise, _line_cell_factor
from .wick import wick_variance_empirical_cov

logger = logging.getLogger(__name__)

_KERNEL_REACH = 4.0
_KERNEL_ORDER = 8
_KERNEL_LEVELS = 40
_KERNEL_BLOCK = 2048
_EVAL_POINTS = 2**22
SIGMA2_LADDER = (64, 128, 256, 512)


@dataclass(frozen=True, eq=False)
class LimitLawEstimate:
    """
    Result of a limit-law computation.

    kind is "GaussianVariance" (value set) or "DoubleIto" (samples, grid and
    second moment set).
    """

    kind: str
    value: Optional[float] = None
    samples: Optional[np.ndarray] = None
    resolution: Optional[int] = None
    radius: Optional[float] = None
    second_moment: Optional[float] = None
    tail_bound: Optional[float] = None
    metadata: Dict = field(default_factory=dict)

    @property
    def count(self) -> int:
        return 0 if self.samples is None else int(self.samples.size)

    def sample_variance(self) -> float:
        x = np.asarray(self.samples, dtype=float)
        return float(np.mean((x - x.mean()) ** 2))

    def variance_stderr(self) -> float:
        """Plug-in SE of the sample variance, sqrt((m4 - m2²) / N)"""
        x = np.asarray(self.samples, dtype=float)
        c = x - x.mean()
        m2, m4 = float(np.mean(c**2)), float(np.mean(c**4))
        return math.sqrt(max(m4 - m2**2, 0.0) / x.size)

    def mean_stderr(self) -> float:
        x = np.asarray(self.samples, dtype=float)
        return float(np.std(x, ddof=1) / math.sqrt(x.size))

    def to_dict(self) -> Dict:
        out = {"kind": self.kind, **self.metadata}
        if self.value is not None:
            out["value"] = self.value
        if self.samples is not None:
            out.update(
                count=self.count,
                resolution=self.resolution,
                radius=self.radius,
                second_moment=self.second_moment,
                tail_bound=self.tail_bound,
                sample_variance=self.sample_variance() if self.count > 1 else None,
            )
        return out


def _provenance(model: SpectralModel, spec: Optional[QuadraticFormSpec] = None, **extra) -> Dict:
    out = {"model": model.to_dict()}
    if spec is not None:
        out["spec"] = spec.to_dict()
    out.update(extra)
    return out


def _check_l2(model: SpectralModel, spec: QuadraticFormSpec) -> None:
    """Reject models whose f is known not to be square integrable"""
    d = model.dimension
    if isinstance(model, (Isotropic, Product)):
        if 4 * model.alpha_total <= -d:
            raise AdmissibilityError(
                f"not in CLT regime: f is not square integrable (4 alpha = {4 * model.alpha_total:.6g} <= -d)",
                "4 alpha > -d",
            )
    elif isinstance(model, TwoLines):
        for name, value in (("alpha_p", model.alpha_p), ("alpha_q", model.alpha_q)):
            if 4 * value <= -1:
                raise AdmissibilityError(
                    f"not in CLT regime: f is not square integrable near a line (4 {name} <= -1)",
                    f"4 {name} > -1",
                )
    elif isinstance(model, OneDirection) and 4 * model.alpha <= -1:
        raise AdmissibilityError(
            "not in CLT regime: f̃ is not square integrable (4 alpha <= -1)", "4 alpha > -1"
        )


def _fsq(model: SpectralModel, h, tol: Optional[float]) -> float:
    try:
        return fourier_integral(model, h, 2.0, tol)
    except IntegralDivergenceError as e:
        raise AdmissibilityError(f"not in CLT regime: f² g² is not integrable ({e})") from e


def fourier_coeff_fsq(model: SpectralModel, h, tol: Optional[float] = None) -> float:
    """
    Integral over E of e^{i<2h, x>} f(x)².

    Raises:
        AdmissibilityError: f is not square integrable
    """
    lag = as_lag(h, model.dimension)
    return _fsq(model, tuple(2 * v for v in lag), tol)


def clt_variance(model: SpectralModel, spec: QuadraticFormSpec, tol: Optional[float] = None) -> float:
    """
    Limiting variance 2 (2 pi)^{3d} of the integral of f² g_s² over E.

    g_s = Re g is the symmetrized symbol, which leaves Q_n unchanged. Its
    square expands into cosines, so the integral is a finite combination of
    Fourier coefficients of f²:
    (2 pi)^{2d} g_s² = sum_{j, j'} g_j g_j' (cos<j - j', t> + cos<j + j', t>) / 2.

    Raises:
        AdmissibilityError: f² g² is not integrable ("not in CLT regime")
    """
    if model.dimension != spec.dimension:
        raise DimensionMismatchError(f"model dimension {model.dimension} != form dimension {spec.dimension}")
    _check_l2(model, spec)
    d = model.dimension
    coefficients: Dict[Tuple[int, ...], float] = {}
    for j, g in spec.weights:
        for j2, g2 in spec.weights:
            for lag in (tuple(a - b for a, b in zip(j, j2)), tuple(a + b for a, b in zip(j, j2))):
                key = max(lag, tuple(-v for v in lag))
                coefficients[key] = coefficients.get(key, 0.0) + 0.5 * g * g2
    terms = [c * _fsq(model, lag, tol) for lag, c in coefficients.items() if c != 0]
    value = 2.0 * (2 * math.pi) ** d * math.fsum(terms)
    logger.debug("CLT variance from %d Fourier coefficients of f²: %.8g", len(terms), value)
    return value


def empirical_cov_clt_variance(model: SpectralModel, h, tol: Optional[float] = None) -> float:
    """Limiting variance of n^{d/2}(r̂(h) - r(h)): (2 pi)^d [f²̂_0 + f²̂_{2h}]"""
    lag = as_lag(h, model.dimension)
    zero = (0,) * model.dimension
    if not any(lag):
        return 2.0 * (2 * math.pi) ** model.dimension * fourier_coeff_fsq(model, zero, tol)
    return (2 * math.pi) ** model.dimension * (
        fourier_coeff_fsq(model, zero, tol) + fourier_coeff_fsq(model, lag, tol)
    )


def gaussian_variance(model: SpectralModel, spec: QuadraticFormSpec, tol: Optional[float] = None) -> LimitLawEstimate:
    return LimitLawEstimate("GaussianVariance", value=clt_variance(model, spec, tol), metadata=_provenance(model, spec))


def double_ito_nodes(resolution: int, radius: float) -> np.ndarray:
    """Half-cell offset midpoints of [-R, R]; x_{M-1-k} = -x_k"""
    step = 2 * radius / resolution
    return -radius + (np.arange(resolution) + 0.5) * step


def _grid_amplitude(model: SpectralModel, nodes: np.ndarray) -> np.ndarray:
    """ã on the grid; nodes on a singular line get the root of the cell-averaged |ã|²"""
    d = model.dimension
    mesh = np.stack(np.meshgrid(*([nodes] * d), indexing="ij"), axis=-1)
    values = np.abs(model.homogeneous_part(mesh)).astype(float)
    bad = ~np.isfinite(values)
    if not np.any(bad):
        return values
    step = float(nodes[1] - nodes[0])
    pts = mesh[bad]
    if isinstance(model, OneDirection):
        mean_sq = step ** (2 * model.alpha) * _line_cell_factor(2 * model.alpha, model.p) / (2 * math.pi)
        values[bad] = math.sqrt(mean_sq)
    elif isinstance(model, TwoLines):
        hit_p = np.abs(pts[:, 0] + model.p * pts[:, 1]) < np.abs(pts[:, 0] + model.q * pts[:, 1])
        fixed = np.empty(len(pts))
        for slope, exponent, other, other_exp, mask in (
            (model.p, model.alpha_p, model.q, model.alpha_q, hit_p),
            (model.q, model.alpha_q, model.p, model.alpha_p, ~hit_p),
        ):
            rest = np.abs(pts[mask, 0] + other * pts[mask, 1]) ** (2 * other_exp)
            fixed[mask] = np.sqrt(step ** (2 * exponent) * _line_cell_factor(2 * exponent, slope) * rest)
        values[bad] = fixed
    else:
        raise ParameterError(f"{model.kind} homogeneous part is infinite at a grid node")
    logger.debug("%d limit-law grid nodes lie on singular lines", int(bad.sum()))
    return values


def _h1(z: np.ndarray) -> np.ndarray:
    return kernel_H(z[..., None])


def _t_rule(exponent: float, reach: float) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes and weights for the integral over [-reach, reach] of |t|^exponent (.) dt"""
    xi, w = gauss_legendre_rule(_KERNEL_ORDER)
    edges = [2.0**-k for k in range(_KERNEL_LEVELS, -1, -1)]
    edges += list(np.arange(2.0, math.ceil(reach) + 1.0))
    lo, hi = np.array(edges[:-1]), np.array(edges[1:])
    width = hi - lo
    t = (lo[:, None] + width[:, None] * xi[None, :]).ravel()
    weights = (width[:, None] * w[None, :]).ravel() * np.power(t, exponent)
    return np.concatenate([-t[::-1], t]), np.concatenate([weights[::-1], weights])


def coordinate_kernel(nodes: np.ndarray, exponent: float, reach: float) -> np.ndarray:
    """K(x, y) = integral of |t|^exponent h(x + t) h(y - t) dt, truncated to |t| <= reach, per grid pair"""
    t, w = _t_rule(exponent, reach)
    out = np.zeros((nodes.size, nodes.size), dtype=complex)
    for start in range(0, t.size, _KERNEL_BLOCK):
        tb, wb = t[start:start + _KERNEL_BLOCK], w[start:start + _KERNEL_BLOCK]
        left = _h1(nodes[:, None] + tb[None, :]) * wb[None, :]
        right = _h1(nodes[:, None] - tb[None, :])
        out += left @ right.T
    return out


def _kron_sum(weights: np.ndarray, matrix: np.ndarray) -> complex:
    """sum_{k, l} w_k w_l prod_j matrix[k_j, l_j] for w on a d-dimensional grid"""
    if weights.ndim == 1:
        return complex(weights @ matrix @ weights)
    return complex(np.sum(weights * (matrix @ weights @ matrix.T)))


@dataclass(frozen=True, eq=False)
class DoubleItoGrid:
    """
    Discretized double Wiener-Itô integral
    Z = C sum_{k, l} ã_k ã_l K(x_k, x_l) [W_k W_l - cell 1{l = -k}]
    on M^d half-cell offset nodes over [-R, R]^d.

    K factorizes over coordinates, K = factor ⊗ ... ⊗ factor, so d=2 never
    forms the M² x M² matrix.
    """

    dimension: int
    resolution: int
    radius: float
    amplitude: np.ndarray
    factor: np.ndarray
    constant: float
    alpha_total: float = 0.0
    kernel_path: str = "closed-form"

    @property
    def nodes(self) -> np.ndarray:
        return double_ito_nodes(self.resolution, self.radius)

    @property
    def cell(self) -> float:
        return (2 * self.radius / self.resolution) ** self.dimension

    @classmethod
    def build(
        cls,
        model: SpectralModel,
        spec: QuadraticFormSpec,
        resolution: Optional[int] = None,
        radius: Optional[float] = None,
        kernel: str = "auto",
    ) -> "DoubleItoGrid":
        """
        Raises:
            ParameterError: odd resolution, unknown kernel path, or an isotropic
                symbol with beta != 0 in d=2
        """
        if model.dimension != spec.dimension:
            raise DimensionMismatchError(
                f"model dimension {model.dimension} != form dimension {spec.dimension}"
            )
        d = model.dimension
        settings = get_settings().limit_laws
        resolution = resolution or (settings.resolution_1d if d == 1 else settings.resolution_2d)
        radius = radius or (settings.radius_1d if d == 1 else settings.radius_2d)
        if resolution < 2 or resolution % 2:
            raise ParameterError(f"grid resolution must be a positive even number, got {resolution}")
        if radius <= 0:
            raise ParameterError(f"grid radius must be positive, got {radius}")
        if kernel not in ("auto", "closed-form", "quadrature"):
            raise ParameterError(f"unknown kernel path '{kernel}'")
        if spec.beta != 0 and d > 1 and spec.homogeneous != "product":
            raise ParameterError("limit kernel for beta != 0 in d=2 needs a product-type symbol")

        nodes = double_ito_nodes(resolution, radius)
        amplitude = _grid_amplitude(model, nodes)
        path = kernel
        if path == "auto":
            path = "closed-form" if spec.beta == 0 else "quadrature"
        if path == "closed-form":
            if spec.beta != 0:
                raise ParameterError("closed-form limit kernel needs beta = 0")
            factor = 2 * math.pi * _h1(nodes[:, None] + nodes[None, :])
        else:
            factor = coordinate_kernel(nodes, 2 * spec.beta / d, _KERNEL_REACH * radius * d)
        constant = model.l1.at_zero**2 * spec.l2_at_zero
        logger.debug(
            "double Itô grid: d=%d, M=%d, R=%g, kernel %s, C=%.6g", d, resolution, radius, path, constant
        )
        return cls(d, resolution, float(radius), amplitude, factor, constant, model.alpha_total, path)

    def draw_noise(self, generator: np.random.Generator, count: int) -> np.ndarray:
        """Hermitian Gaussian increments, shape (count, M, ..., M)"""
        shape = (count,) + (self.resolution,) * self.dimension
        return _hermitian_noise(generator, shape, self.cell, self.dimension)

    def _trace(self) -> complex:
        mirror = np.flip(self.amplitude)
        diag = self.factor[np.arange(self.resolution), np.arange(self.resolution)[::-1]]
        weights = diag
        for _ in range(self.dimension - 1):
            weights = np.multiply.outer(weights, diag)
        return self.cell * complex(np.sum(self.amplitude * mirror * weights))

    def evaluate(self, noise: np.ndarray) -> np.ndarray:
        """Z for a batch of noise arrays of shape (count, M, ..., M)"""
        v = self.amplitude * noise
        k = self.factor
        if self.dimension == 1:
            quad = np.einsum("bk,bk->b", v, v @ k.T)
        else:
            mixed = np.einsum("ik,bkl,jl->bij", k, v, k)
            quad = np.sum(v * mixed, axis=(1, 2))
        z = self.constant * (quad - self._trace())
        rms = float(np.sqrt(np.mean(z.real**2))) or 1.0
        residue = float(np.max(np.abs(z.imag))) / rms if z.size else 0.0
        if residue > 1e-6:
            logger.debug("double Itô imaginary residue %.3e", residue)
        return z.real

    def second_moment(self, amplitude: Optional[np.ndarray] = None) -> float:
        """
        E[Z²] on the grid, 2 cell² sum |sym B|² with B_kl = C ã_k ã_l K_kl.

        Expands to C² cell² sum ã_k² ã_l² (|K_kl|² + K_kl conj(K_lk)).
        """
        amp = self.amplitude if amplitude is None else amplitude
        a2 = amp**2
        direct = _kron_sum(a2, np.abs(self.factor) ** 2).real
        crossed = _kron_sum(a2, self.factor * np.conj(self.factor.T)).real
        return float(self.constant**2 * self.cell**2 * (direct + crossed))


def truncation_tail_bound(grid: DoubleItoGrid) -> float:
    """
    Relative second-moment mass beyond the grid radius.

    The shell R/2 < |x|_inf <= R carries the grid moment minus the moment of
    the inner half; successive dyadic shells shrink by rho = 2^(d + 4 alpha),
    so the tail is shell * rho / (1 - rho), relative to the grid moment.
    """
    total = grid.second_moment()
    if total <= 0:
        return 0.0
    rho = 2.0 ** (grid.dimension + 4 * grid.alpha_total)
    if rho >= 1:
        return math.inf
    inner_mask = np.abs(grid.nodes) <= grid.radius / 2
    mask = inner_mask
    for _ in range(grid.dimension - 1):
        mask = np.logical_and.outer(mask, inner_mask)
    inner = grid.second_moment(np.where(mask, grid.amplitude, 0.0))
    shell = max(total - inner, 0.0)
    return shell * rho / (1 - rho) / total


def _sample_chunk(grid: DoubleItoGrid, rng: RngStream, size: int) -> np.ndarray:
    generator = rng.generator()
    batch = max(1, _EVAL_POINTS // grid.resolution**grid.dimension)
    out: List[np.ndarray] = []
    done = 0
    while done < size:
        step = min(batch, size - done)
        out.append(grid.evaluate(grid.draw_noise(generator, step)))
        done += step
    return np.concatenate(out) if out else np.zeros(0)


def sample_grid(grid: DoubleItoGrid, count: int, rng: RngStream, n_jobs: int = 1) -> np.ndarray:
    """
    count draws of Z; chunk c uses substream c, so the draws depend only on
    (rng, count, chunk size) and not on n_jobs.
    """
    chunk = get_settings().limit_laws.chunk_size
    sizes = [min(chunk, count - start) for start in range(0, count, chunk)]
    parts = Parallel(n_jobs=n_jobs, prefer="threads")(
        delayed(_sample_chunk)(grid, rng.substream(c), size) for c, size in enumerate(sizes)
    )
    return np.concatenate(parts) if parts else np.zeros(0)


def sample_double_ito(
    model: SpectralModel,
    spec: QuadraticFormSpec,
    resolution: Optional[int] = None,
    radius: Optional[float] = None,
    count: int = 10000,
    rng: Optional[RngStream] = None,
    n_jobs: int = 1,
    kernel: str = "auto",
) -> LimitLawEstimate:
    """
    Samples of the non-central limit Z with the grid second moment and tail bound.

    Raises:
        AdmissibilityError: condition (H) does not hold for (model, spec)
    """
    rng = rng or RngStream(0)
    if count < 1:
        raise ParameterError(f"sample count must be >= 1, got {count}")
    verdict = check_condition_h(model, spec, rng=rng.stream(2**63))
    if not verdict.holds:
        violated = verdict.violated if isinstance(verdict, FailsLemmaRegion) else "condition (H) integral finite"
        raise AdmissibilityError(f"condition (H) does not hold: {violated}", violated)

    grid = DoubleItoGrid.build(model, spec, resolution, radius, kernel)
    moment = grid.second_moment()
    tail = truncation_tail_bound(grid)
    target = get_settings().limit_laws.tail_target
    if tail > target:
        logger.warning(
            "⚠ truncation tail bound %.3g exceeds target %.3g at M=%d, R=%g",
            tail, target, grid.resolution, grid.radius,
        )
    samples = sample_grid(grid, count, rng, n_jobs)
    samples.setflags(write=False)
    return LimitLawEstimate(
        "DoubleIto",
        samples=samples,
        resolution=grid.resolution,
        radius=grid.radius,
        second_moment=moment,
        tail_bound=tail,
        metadata=_provenance(model, spec, kernel=grid.kernel_path, verdict=verdict.to_dict(), **rng.to_dict()),
    )


@dataclass(frozen=True)
class Sigma2Estimate:
    """Extrapolated lim n^{4 alpha + 3} Var(r̂(h)) with its ladder"""

    value: float
    spread: float
    ladder: Tuple[int, ...]
    scaled: Tuple[float, ...]
    extrapolated: Tuple[float, ...]
    flagged: bool = False

    def __float__(self) -> float:
        return self.value

    def to_dict(self) -> Dict:
        return {
            "sigma2": self.value,
            "spread": self.spread,
            "ladder": list(self.ladder),
            "scaled": list(self.scaled),
            "extrapolated": list(self.extrapolated),
            "flagged": self.flagged,
        }


def sigma2_one_direction(
    alpha: float,
    p: int,
    L0: float = 1.0,
    h: Sequence[int] = (1, 0),
    ladder: Sequence[int] = SIGMA2_LADDER,
) -> Sigma2Estimate:
    """
    σ²_{alpha,p} for f̃(u) = L0 |u|^(2 alpha) from exact Wick variances.

    n^{4 alpha + 3} Var(r̂(h)) approaches its limit with a correction of
    order n^{4 alpha + 1}; successive ladder pairs are Richardson-combined
    and the spread of the combined values is the uncertainty.

    Raises:
        ParameterError: alpha outside (-1/2, -1/4), p not a positive integer,
            h on the memory line, or L0 <= 0
    """
    if not -0.5 < alpha < -0.25:
        raise ParameterError(f"one-direction anomaly needs -1/2 < alpha < -1/4, got {alpha}")
    if int(p) != p or p < 1:
        raise ParameterError(f"slope p must be a positive integer, got {p}")
    if L0 <= 0:
        raise ParameterError(f"f̃ scale must be positive, got {L0}")
    lag = as_lag(h, 2)
    if lag[1] == p * lag[0]:
        raise ParameterError(f"lag {lag} lies on the memory line h2 = p h1")
    ladder = tuple(sorted(int(n) for n in ladder))
    if len(ladder) < 2:
        raise ParameterError("extrapolation needs at least two ladder points")

    model = OneDirection(alpha, float(p), SlowFactor(math.sqrt(L0)))
    rate = 4 * alpha + 3
    scaled = tuple(n**rate * wick_variance_empirical_cov(model, lag, n) for n in ladder)
    correction = 4 * alpha + 1
    extrapolated = []
    for (n1, s1), (n2, s2) in zip(zip(ladder, scaled), zip(ladder[1:], scaled[1:])):
        ratio = (n2 / n1) ** correction
        extrapolated.append((s2 - ratio * s1) / (1 - ratio))
    value = extrapolated[-1]
    spread = (max(extrapolated) - min(extrapolated)) / abs(value) if len(extrapolated) > 1 else 0.0
    flagged = spread > 0.1
    if flagged:
        logger.warning("⚠ σ² extrapolation spread %.1f%% exceeds 10%%", 100 * spread)
    logger.debug("σ² ladder %s scaled %s -> %.6g", ladder, scaled, value)
    return Sigma2Estimate(value, spread, ladder, scaled, tuple(extrapolated), flagged)
