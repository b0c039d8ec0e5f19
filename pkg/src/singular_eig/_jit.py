"""Numba dispatch switch.

Set ``SINGULAR_EIG_DISABLE_JIT=1`` to run every kernel as plain Python/numpy.
"""
import os

_flag = os.environ.get("SINGULAR_EIG_DISABLE_JIT", "").strip().lower()
USE_JIT = _flag in ("", "0", "false", "no")

if USE_JIT:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        USE_JIT = False

if USE_JIT:

    def jit(fn):
        return _njit(cache=True)(fn)

else:

    def jit(fn):
        return fn


BACKEND = "numba" if USE_JIT else "numpy"
