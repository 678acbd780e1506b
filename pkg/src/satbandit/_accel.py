"""Optional numba acceleration.

Kernels are written once as plain Python over numpy arrays. When numba is
importable and ``SATBANDIT_DISABLE_NUMBA`` is unset (or ``0``), they are
compiled with ``@njit``; otherwise the harness falls back to the pure-numpy
implementations that vectorize across trials.
"""
from __future__ import annotations

import os

_flag = os.environ.get("SATBANDIT_DISABLE_NUMBA", "0").strip().lower()
DISABLED = _flag not in ("", "0", "false", "no")

try:
    import numba as _numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    _numba = None

HAS_NUMBA = _numba is not None
USE_NUMBA = HAS_NUMBA and not DISABLED


def njit(*args, **kwargs):
    """``numba.njit`` when numba is available, identity otherwise.

    Compilation is attempted even when the env flag disables numba for the
    harness, so the benchmark can still compare both paths.
    """
    if not HAS_NUMBA:
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda f: f
    return _numba.njit(*args, **kwargs)
