"""Compiled hot loops.

All hypercube loops walk the half cube ``{x : x[n-1] = -1}`` in reflected
Gray-code order over the low ``n-1`` bits: step ``t`` visits mask
``t ^ (t >> 1)`` and flips bit ``ctz(t)`` relative to step ``t-1``.  A range
``[t0, t1)`` recomputes its starting dot products from scratch, so ranges can
be processed independently and merged.  Antipodal vertices have identical
absolute dot products, so the half cube carries the whole objective.

Everything here is integer arithmetic except the search scan, whose float
output is only used to shortlist combinations for exact re-evaluation.
"""

from __future__ import annotations

import numpy as np
from numba import njit

_LIMB = np.int64(1) << np.int64(62)


@njit(cache=True, nogil=True)
def _ctz(t):
    j = 0
    while (t >> j) & 1 == 0:
        j += 1
    return j


@njit(cache=True, nogil=True)
def _start_dots(C, n, t0):
    m = C.shape[0]
    g = t0 ^ (t0 >> 1)
    d = np.zeros(m, dtype=np.int64)
    for i in range(m):
        s = 0
        for j in range(n):
            if (g >> j) & 1:
                s += C[i, j]
            else:
                s -= C[i, j]
        d[i] = s
    return d


@njit(cache=True, nogil=True)
def _flip(C, d, t):
    j = _ctz(t)
    g = t ^ (t >> 1)
    m = C.shape[0]
    if (g >> j) & 1:
        for i in range(m):
            d[i] += 2 * C[i, j]
    else:
        for i in range(m):
            d[i] -= 2 * C[i, j]


@njit(cache=True, nogil=True)
def introw_sums(C, N, n, t0, t1):
    """Per-row sums of ``|c_w . x|`` over the half-cube vertices each row wins.

    Row ``i`` beats the incumbent ``w`` iff ``d_i^2 N_w > d_w^2 N_i``; strict
    comparison leaves ties with the smaller index.
    """
    m = C.shape[0]
    S = np.zeros(m, dtype=np.int64)
    d = _start_dots(C, n, t0)
    for t in range(t0, t1):
        if t > t0:
            _flip(C, d, t)
        w = 0
        dw = d[0] * d[0]
        for i in range(1, m):
            di = d[i] * d[i]
            if di * N[w] > dw * N[i]:
                w = i
                dw = di
        S[w] += abs(d[w])
    return S


@njit(cache=True, nogil=True)
def introw_partition(C, N, n, t0, t1, winner, absdot):
    m = C.shape[0]
    d = _start_dots(C, n, t0)
    for t in range(t0, t1):
        if t > t0:
            _flip(C, d, t)
        w = 0
        dw = d[0] * d[0]
        for i in range(1, m):
            di = d[i] * d[i]
            if di * N[w] > dw * N[i]:
                w = i
                dw = di
        g = t ^ (t >> 1)
        winner[g] = w
        absdot[g] = abs(d[w])


@njit(cache=True, nogil=True)
def fixed_total(M, n, t0, t1):
    """Exact ``sum max_i |M_i . x|`` over a half-cube range as ``(hi, lo)``.

    ``M`` is the float matrix scaled to integers by a common power of two;
    the total is ``hi * 2**62 + lo``.
    """
    m = M.shape[0]
    d = _start_dots(M, n, t0)
    hi = np.int64(0)
    lo = np.int64(0)
    for t in range(t0, t1):
        if t > t0:
            _flip(M, d, t)
        best = abs(d[0])
        for i in range(1, m):
            v = abs(d[i])
            if v > best:
                best = v
        lo += best
        if lo >= _LIMB:
            lo -= _LIMB
            hi += 1
    return hi, lo


@njit(cache=True, nogil=True)
def fixed_partition(M, n, t0, t1, winner, absdot):
    m = M.shape[0]
    d = _start_dots(M, n, t0)
    for t in range(t0, t1):
        if t > t0:
            _flip(M, d, t)
        w = 0
        best = abs(d[0])
        for i in range(1, m):
            v = abs(d[i])
            if v > best:
                best = v
                w = i
        g = t ^ (t >> 1)
        winner[g] = w
        absdot[g] = best


@njit(cache=True, nogil=True)
def _compact(buf, vals, cnt, thr):
    k = 0
    for r in range(cnt):
        if vals[r] >= thr:
            if k != r:
                buf[k, :] = buf[r, :]
                vals[k] = vals[r]
            k += 1
    return k


@njit(cache=True, nogil=True)
def scan_block(V, m, first, thr, eps, init_cap):
    """Scan every m-combination whose smallest index is ``first``.

    ``V[r, h]`` is the float value ``|a_r . x_h|`` on half-cube vertex ``h``;
    the score of a combination is ``sum_h max_r V[r, h]``.  Returns the block
    maximum and every combination scoring at least
    ``max(thr, block_max - eps)``, in lexicographic order.
    """
    K, H = V.shape
    cap = init_cap
    buf = np.empty((cap, m), dtype=np.int64)
    vals = np.empty(cap, dtype=np.float64)
    cnt = 0
    best = -1.0
    cut = thr
    idx = np.empty(m, dtype=np.int64)
    pm = np.empty((m, H), dtype=np.float64)
    idx[0] = first
    for h in range(H):
        pm[0, h] = V[first, h]
    if m == 1:
        s = 0.0
        for h in range(H):
            s += pm[0, h]
        best = s
        if s >= cut:
            buf[0, 0] = first
            vals[0] = s
            cnt = 1
        return best, buf[:cnt].copy(), vals[:cnt].copy()
    if first > K - m:
        return best, buf[:0].copy(), vals[:0].copy()
    level = 1
    idx[1] = first
    while level >= 1:
        idx[level] += 1
        if idx[level] > K - m + level:
            level -= 1
            continue
        if level < m - 1:
            r = idx[level]
            for h in range(H):
                a = pm[level - 1, h]
                b = V[r, h]
                pm[level, h] = a if a >= b else b
            level += 1
            idx[level] = idx[level - 1]
            continue
        base = pm[m - 2]
        for last in range(idx[level], K):
            s = 0.0
            for h in range(H):
                a = base[h]
                b = V[last, h]
                s += a if a >= b else b
            if s > best:
                best = s
                if best - eps > cut:
                    cut = best - eps
            if s >= cut:
                if cnt == cap:
                    cnt = _compact(buf, vals, cnt, cut)
                    if cnt * 2 > cap:
                        cap *= 2
                        nb = np.empty((cap, m), dtype=np.int64)
                        nv = np.empty(cap, dtype=np.float64)
                        nb[:cnt] = buf[:cnt]
                        nv[:cnt] = vals[:cnt]
                        buf = nb
                        vals = nv
                for q in range(m - 1):
                    buf[cnt, q] = idx[q]
                buf[cnt, m - 1] = last
                vals[cnt] = s
                cnt += 1
        level -= 1
    cnt = _compact(buf, vals, cnt, cut)
    return best, buf[:cnt].copy(), vals[:cnt].copy()
