"""Long-memory quadratic forms - stationary Gaussian fields on Z^d, their quadratic forms and limit laws"""

__version__ = "1.0.0"
