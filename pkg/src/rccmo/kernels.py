"""Backend selection for the numeric kernels.

Numba-compiled kernels are used by default. Set ``RCCMO_DISABLE_NUMBA=1`` to
force the pure-numpy path (or when numba is not importable). The choice is
made once, at import time.
"""

import os

import numpy as np

from . import _kernels_numpy

_DISABLED = os.environ.get("RCCMO_DISABLE_NUMBA", "").strip().lower() in ("1", "true", "yes")

if _DISABLED:
    _impl = _kernels_numpy
else:
    try:
        from . import _kernels_numba as _impl
    except ImportError:  # pragma: no cover
        _impl = _kernels_numpy

BACKEND = "numpy" if _impl is _kernels_numpy else "numba"


def dominance_matrix(objs, viol=None):
    objs = np.ascontiguousarray(objs, dtype=np.float64)
    if viol is None:
        viol = np.zeros(objs.shape[0])
    return _impl.dominance_matrix(objs, np.ascontiguousarray(viol, dtype=np.float64))


def cross_dominance(a, b):
    return _impl.cross_dominance(
        np.ascontiguousarray(a, dtype=np.float64), np.ascontiguousarray(b, dtype=np.float64)
    )


def front_ranks(dom):
    return _impl.front_ranks(np.ascontiguousarray(dom, dtype=np.bool_))


def strength_raw(dom):
    return _impl.strength_raw(np.ascontiguousarray(dom, dtype=np.bool_))


def kth_distance(points, k):
    return _impl.kth_distance(np.ascontiguousarray(points, dtype=np.float64), int(k))
