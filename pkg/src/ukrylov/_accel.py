"""Numba switch.

Set ``UKRYLOV_NO_NUMBA=1`` to force the pure-numpy kernels (also used
automatically when numba cannot be imported).
"""
import os

_flag = os.environ.get("UKRYLOV_NO_NUMBA", "").strip().lower()
USE_NUMBA = _flag not in ("1", "true", "yes", "on")

if USE_NUMBA:
    try:
        from numba import njit as _numba_njit
    except ImportError:  # pragma: no cover
        USE_NUMBA = False


def _passthrough(*args, **kwargs):
    if len(args) == 1 and callable(args[0]) and not kwargs:
        return args[0]

    def deco(fn):
        return fn

    return deco


njit = _numba_njit if USE_NUMBA else _passthrough


def select(nb_impl, np_impl):
    """Pick the compiled kernel when numba is active, else the numpy one."""
    return nb_impl if USE_NUMBA else np_impl
