"""Vectorized numpy implementations of the hot kernels.

These are the reference path; ``_kernels_numba`` mirrors every function here
with explicit loops.
"""

import numpy as np


def dominance_matrix(objs, viol):
    """Boolean matrix ``D[i, j]`` = row ``i`` dominates row ``j``.

    Constrained rule: smaller violation wins outright, equal violation falls
    back to Pareto dominance on ``objs``. Pass all-zero ``viol`` for plain
    Pareto dominance.
    """
    le = (objs[:, None, :] <= objs[None, :, :]).all(axis=2)
    lt = (objs[:, None, :] < objs[None, :, :]).any(axis=2)
    vi = viol[:, None]
    vj = viol[None, :]
    return (vi < vj) | ((vi == vj) & le & lt)


def cross_dominance(a, b):
    """``D[i, j]`` = ``a[i]`` Pareto-dominates ``b[j]``."""
    le = (a[:, None, :] <= b[None, :, :]).all(axis=2)
    lt = (a[:, None, :] < b[None, :, :]).any(axis=2)
    return le & lt


def front_ranks(dom):
    n = dom.shape[0]
    ranks = np.zeros(n, dtype=np.int64)
    remaining = np.ones(n, dtype=bool)
    front = 1
    while remaining.any():
        dominated = dom[remaining].any(axis=0)
        current = remaining & ~dominated
        ranks[current] = front
        remaining &= ~current
        front += 1
    return ranks


def strength_raw(dom):
    strength = dom.sum(axis=1).astype(np.float64)
    return dom.T.astype(np.float64) @ strength


def kth_distance(points, k):
    n = points.shape[0]
    if n <= 1:
        return np.zeros(n)
    diff = points[:, None, :] - points[None, :, :]
    dist = np.sqrt((diff * diff).sum(axis=2))
    return np.partition(dist, k, axis=1)[:, k]
