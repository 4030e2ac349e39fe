"""Backend selection for the compiled hot loops.

Set ``LINESHAPE_DISABLE_NUMBA=1`` in the environment to force the pure
numpy implementations.  The flag is read once, at import time.
"""
import os

_DISABLED = os.environ.get("LINESHAPE_DISABLE_NUMBA", "").strip().lower() in {
    "1", "true", "yes", "on"}

try:
    if _DISABLED:
        raise ImportError("numba disabled by environment")
    from numba import njit as _njit
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    _njit = None
    HAVE_NUMBA = False

BACKEND = "numba" if HAVE_NUMBA else "numpy"


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged."""
    if not HAVE_NUMBA:
        return func
    return _njit(cache=True, nogil=True)(func)
