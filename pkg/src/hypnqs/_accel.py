"""Switch between numba-compiled kernels and their pure-numpy fallbacks.

Set ``HYPNQS_DISABLE_NUMBA=1`` before import to force the numpy path.
"""
import os

_flag = os.environ.get("HYPNQS_DISABLE_NUMBA", "").strip().lower()

try:
    import numba
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    numba = None
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _flag not in ("1", "true", "yes", "on")

numba_default = {
    "nogil": True,
    "cache": True,
    "fastmath": False,
    "boundscheck": False,
}


def njit(func):
    """Compile ``func`` with numba when available, else return it unchanged.

    The uncompiled loop versions are never selected by the dispatchers when
    numba is off; they remain importable for tests and benchmarks.
    """
    if not HAVE_NUMBA:
        return func
    return numba.njit(**numba_default)(func)


def backend():
    return "numba" if USE_NUMBA else "numpy"
