"""Backend selection for the compiled kernels.

Set ``CUSPKIT_DISABLE_NUMBA=1`` to force the pure-numpy code paths. The
numba path is used whenever numba imports cleanly and the flag is unset.
"""
import os

_FLAG = os.environ.get("CUSPKIT_DISABLE_NUMBA", "").strip().lower()

try:
    import numba  # noqa: F401
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, otherwise an identity decorator.

    The returned function is always compiled when numba is importable so the
    benchmarks can compare both paths regardless of ``USE_NUMBA``.
    """
    if HAVE_NUMBA:
        from numba import njit as _njit
        return _njit(*args, **kwargs)
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]
    return lambda f: f


def backend_name():
    return "numba" if USE_NUMBA else "numpy"
