"""Kernel backend selection.

Numba is used when importable unless ``ALPHASVRG_DISABLE_NUMBA`` is set to a
truthy value, in which case the vectorized numpy kernels are used instead.
Both backends produce bit-identical results.
"""
import os

ENV_FLAG = "ALPHASVRG_DISABLE_NUMBA"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a hard dependency in CI
    numba = None

HAS_NUMBA = numba is not None


def _flag_set() -> bool:
    return os.environ.get(ENV_FLAG, "").strip().lower() in {"1", "true", "yes", "on"}


USE_NUMBA = HAS_NUMBA and not _flag_set()
BACKEND = "numba" if USE_NUMBA else "numpy"


def njit(func=None, **options):
    """``numba.njit(cache=True, **options)`` when numba is installed, identity otherwise."""
    if func is None:
        return lambda f: njit(f, **options)
    if HAS_NUMBA:
        return numba.njit(cache=True, **options)(func)
    return func
