"""Bayesian mixtures over sequence environments and their convergence diagnostics."""

__version__ = "0.1.0"

from . import core  # noqa: E402
from ._kernels import BACKEND_NAME as KERNEL_BACKEND  # noqa: E402

__all__ = ["core", "KERNEL_BACKEND", "__version__"]
