"""Hot inner loops, compiled when available.

The Cython module ``_ckernels`` is used if it was built; otherwise the
numpy/pure-Python ``_fallback`` module is used.  Setting the environment
variable ``UNIMIX_PURE_PYTHON=1`` forces the fallback.
"""

import os

from . import _fallback

try:
    if os.environ.get("UNIMIX_PURE_PYTHON", "") not in ("", "0"):
        raise ImportError("compiled kernels disabled by UNIMIX_PURE_PYTHON")
    from . import _ckernels as _impl
    COMPILED = True
except ImportError:
    _impl = _fallback
    COMPILED = False

BACKEND_NAME = "cython" if COMPILED else "python"

compensated_cumsum = _impl.compensated_cumsum
bernoulli_mixture_path = _impl.bernoulli_mixture_path
binary_step_distances = _impl.binary_step_distances
run_opcodes = _impl.run_opcodes
enumerate_programs = _impl.enumerate_programs

__all__ = [
    "COMPILED",
    "BACKEND_NAME",
    "compensated_cumsum",
    "bernoulli_mixture_path",
    "binary_step_distances",
    "run_opcodes",
    "enumerate_programs",
]
