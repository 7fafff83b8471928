"""Exception hierarchy shared by the toolkit and mapped to CLI exit codes"""

from typing import Optional


class QuadformsError(Exception):
    """Base class for all toolkit errors"""

    exit_code: int = 1


class ParameterError(QuadformsError, ValueError):
    """A model, form or call parameter lies outside its admissible range"""

    exit_code = 4


class InvalidConfigError(QuadformsError):
    """Experiment or settings file does not describe a valid configuration"""

    exit_code = 4


class AdmissibilityError(QuadformsError):
    """Inputs violate an inequality required by the requested computation"""

    exit_code = 2

    def __init__(self, message: str, inequality: Optional[str] = None):
        super().__init__(message)
        self.inequality = inequality


class ResourceBudgetError(QuadformsError):
    """A grid, matrix or sum would exceed the configured budget"""

    exit_code = 3


class QuadratureBudgetError(QuadformsError):
    """Quadrature did not reach its tolerance within the panel budget"""

    exit_code = 3

    def __init__(self, message: str, error_estimate: float):
        super().__init__(f"{message} (last error estimate {error_estimate:.3e})")
        self.error_estimate = error_estimate


class IntegralDivergenceError(QuadformsError):
    """Dyadic refinement toward a singular point does not stabilize"""

    exit_code = 2

    def __init__(self, message: str, ratio: float):
        super().__init__(f"{message} (dyadic ratio {ratio:.4f})")
        self.ratio = ratio


class SingularPointError(QuadformsError, ValueError):
    """Filter evaluated exactly on a singular set where it is infinite"""


class SymmetryError(QuadformsError):
    """Hermitian symmetry was lost: imaginary residue above threshold"""


class FactorizationError(QuadformsError):
    """Covariance matrix is not positive semi-definite within jitter"""


class KernelDomainError(QuadformsError, ValueError):
    """Kernel argument outside its domain"""


class MarginError(QuadformsError, ValueError):
    """Field margin too small for the requested lag"""

    def __init__(self, required: int, available: int):
        super().__init__(
            f"lag needs margin >= {required}, field was simulated with margin {available}"
        )
        self.required = required
        self.available = available


class DimensionMismatchError(QuadformsError, ValueError):
    """Objects of different lattice dimension were combined"""
