"""Numba-compiled loop versions of the kernels in ``_kernels_numpy``."""

import numpy as np
from numba import njit


@njit(cache=True)
def dominance_matrix(objs, viol):
    n, m = objs.shape
    out = np.zeros((n, n), dtype=np.bool_)
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            if viol[i] < viol[j]:
                out[i, j] = True
                continue
            if viol[i] > viol[j]:
                continue
            better = False
            worse = False
            for k in range(m):
                if objs[i, k] < objs[j, k]:
                    better = True
                elif objs[i, k] > objs[j, k]:
                    worse = True
                    break
            if better and not worse:
                out[i, j] = True
    return out


@njit(cache=True)
def cross_dominance(a, b):
    na, m = a.shape
    nb = b.shape[0]
    out = np.zeros((na, nb), dtype=np.bool_)
    for i in range(na):
        for j in range(nb):
            better = False
            worse = False
            for k in range(m):
                if a[i, k] < b[j, k]:
                    better = True
                elif a[i, k] > b[j, k]:
                    worse = True
                    break
            if better and not worse:
                out[i, j] = True
    return out


@njit(cache=True)
def front_ranks(dom):
    n = dom.shape[0]
    count = np.zeros(n, dtype=np.int64)
    for i in range(n):
        for j in range(n):
            if dom[i, j]:
                count[j] += 1
    ranks = np.zeros(n, dtype=np.int64)
    current = np.empty(n, dtype=np.int64)
    size = 0
    for j in range(n):
        if count[j] == 0:
            current[size] = j
            size += 1
    front = 1
    nxt = np.empty(n, dtype=np.int64)
    while size > 0:
        nsize = 0
        for t in range(size):
            i = current[t]
            ranks[i] = front
            for j in range(n):
                if dom[i, j]:
                    count[j] -= 1
                    if count[j] == 0:
                        nxt[nsize] = j
                        nsize += 1
        for t in range(nsize):
            current[t] = nxt[t]
        size = nsize
        front += 1
    return ranks


@njit(cache=True)
def strength_raw(dom):
    n = dom.shape[0]
    strength = np.zeros(n)
    for i in range(n):
        for j in range(n):
            if dom[i, j]:
                strength[i] += 1.0
    raw = np.zeros(n)
    for i in range(n):
        for j in range(n):
            if dom[i, j]:
                raw[j] += strength[i]
    return raw


@njit(cache=True)
def kth_distance(points, k):
    n, m = points.shape
    out = np.zeros(n)
    if n <= 1:
        return out
    kk = min(k, n - 1)
    # sorted buffer of the kk+1 smallest distances seen so far
    buf = np.empty(kk + 1)
    for i in range(n):
        filled = 0
        for j in range(n):
            s = 0.0
            for c in range(m):
                d = points[i, c] - points[j, c]
                s += d * d
            d = np.sqrt(s)
            if filled <= kk:
                pos = filled
                filled += 1
            elif d < buf[kk]:
                pos = kk
            else:
                continue
            while pos > 0 and buf[pos - 1] > d:
                buf[pos] = buf[pos - 1]
                pos -= 1
            buf[pos] = d
        out[i] = buf[kk]
    return out
