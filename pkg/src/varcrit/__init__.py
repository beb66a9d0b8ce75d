"""Numerical toolkit for critical variable-exponent p(x)-Laplacian problems.

Submodules: ``special_fn`` (Gamma/Beta), ``quadrature`` (adaptive
Gauss-Kronrod), ``instanton`` (extremal profiles and constants),
``modular`` (variable-exponent norms), ``energy`` (expansions and the
mountain-pass test) and ``cli``.
"""

from .errors import AccuracyError, DivergentIntegralError, DomainError, GuardViolation
from .special_fn import DimParams

__version__ = "0.1.0"

__all__ = [
    "AccuracyError",
    "DimParams",
    "DivergentIntegralError",
    "DomainError",
    "GuardViolation",
    "__version__",
]
