"""Backend switch for the compiled kernels.

Kernels are written once as plain loops and compiled with ``numba.njit``
unless ``CROPPAT_NO_NUMBA`` is set to a truthy value, in which case the
pure-numpy implementations are dispatched instead.  Both paths are kept
importable so tests and benchmarks can compare them in one process.
"""

import os

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_FALSY = {"", "0", "false", "no", "off"}

NUMBA_AVAILABLE = numba is not None
USE_NUMBA = NUMBA_AVAILABLE and os.environ.get("CROPPAT_NO_NUMBA", "").strip().lower() in _FALSY


def njit(func):
    """Compile ``func`` with numba if available, else return it unchanged."""
    if not NUMBA_AVAILABLE:
        return func
    return numba.njit(cache=True, nogil=True)(func)


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
