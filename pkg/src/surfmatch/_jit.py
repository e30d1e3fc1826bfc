"""Numba switch.

Every hot kernel in the package is written once as plain Python over numpy
arrays and decorated with :func:`njit`. When numba is importable and the
``SURFMATCH_NO_JIT`` environment variable is unset (or ``0``), the kernels are
compiled. Otherwise the identical source runs as ordinary Python, which is
slow but produces bit-identical results; the benchmark in ``benchmarks/``
compares the two paths.
"""

from __future__ import annotations

import functools
import os

import numpy as np

try:  # pragma: no cover - exercised implicitly
    import numba as _numba
except ImportError:  # pragma: no cover
    _numba = None

_FLAG = os.environ.get("SURFMATCH_NO_JIT", "").strip().lower()
JIT_ENABLED = _numba is not None and _FLAG in ("", "0", "false", "no")


def njit(*args, **kwargs):
    """``numba.njit(cache=True)`` or a pass-through, depending on JIT_ENABLED."""
    if JIT_ENABLED:
        kwargs.setdefault("cache", True)
        return _numba.njit(*args, **kwargs)

    def wrap(fn):
        # uint64 hashing relies on wraparound; numpy scalars warn about it
        @functools.wraps(fn)
        def inner(*a, **kw):
            with np.errstate(over="ignore"):
                return fn(*a, **kw)

        inner.py_func = fn
        return inner

    if len(args) == 1 and callable(args[0]) and not kwargs:
        return wrap(args[0])
    return wrap
