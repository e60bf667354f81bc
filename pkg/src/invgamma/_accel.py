"""Numba acceleration toggle for the hot numeric kernels.

Kernels are written as plain scalar/loop Python that numba can compile.
When numba is importable (and not vetoed), ``jit`` wraps them with
``numba.njit(cache=True)``; otherwise it is the identity and the same
source runs interpreted on top of numpy/math.

Set ``INVGAMMA_NUMBA=0`` in the environment to force the interpreted
path.  ``benchmarks/accel_bench.py`` uses the flag to time both paths.
"""

import os


def _numba_wanted() -> bool:
    flag = os.environ.get("INVGAMMA_NUMBA", "1").strip().lower()
    return flag not in ("0", "false", "off", "no")


NUMBA_ENABLED = False
_njit = None
if _numba_wanted():
    try:
        from numba import njit as _njit
    except ImportError:
        _njit = None
    NUMBA_ENABLED = _njit is not None


if NUMBA_ENABLED:
    def jit(func):
        return _njit(cache=True)(func)
else:
    def jit(func):
        return func
