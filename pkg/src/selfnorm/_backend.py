"""Numba backend selection.

Hot kernels are compiled with numba's @njit by default.  Setting the
environment variable SELFNORM_NUMBA to "0" (or "false"/"off") before import
selects a pure-numpy/python fallback, which is bit-compatible but slower.
"""

import os

_flag = os.environ.get("SELFNORM_NUMBA", "1").strip().lower()
NUMBA_ENABLED = _flag not in ("0", "false", "off", "no")

if NUMBA_ENABLED:
    try:
        from numba import njit as _njit
    except ImportError:  # pragma: no cover
        NUMBA_ENABLED = False

if NUMBA_ENABLED:
    def maybe_njit(*args, **kwargs):
        kwargs.setdefault("cache", True)
        if args and callable(args[0]):
            return _njit(cache=kwargs["cache"])(args[0])
        return _njit(*args, **kwargs)
else:
    def maybe_njit(*args, **kwargs):
        if args and callable(args[0]):
            return args[0]

        def wrap(func):
            return func

        return wrap


def backend_name():
    return "numba" if NUMBA_ENABLED else "numpy"
