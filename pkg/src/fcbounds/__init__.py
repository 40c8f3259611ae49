"""Exact worst-case errors of Fourier partial sums on convolution classes."""

from .errors import DomainError, ToleranceError

__version__ = "0.1.0"

__all__ = ["DomainError", "ToleranceError", "__version__"]
