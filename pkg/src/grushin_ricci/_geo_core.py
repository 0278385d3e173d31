"""Compiled kernels for the reduced warped metrics du^2 + G0(u)^2 dv0^2 + G1(u)^2 dv1^2.

Metric kinds: 0 sphere family (G0 = f_lambda, G1 = h_lambda), 1 limit hemisphere
(G0 = cot), 2 Grushin halfplane (G0 = x^-alpha).  Inactive fibers use G = 1.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

SPHERE, LIMIT, GRUSHIN = 0, 1, 2

OK, TOO_LONG, LEFT_CHART, UNDERFLOW = 0, 1, 2, 3


@njit(cache=True, error_model="numpy")
def warps(kind, par, u):
    """(G0, G0', G1, G1') at base coordinate u."""
    if kind == SPHERE:
        lam = par
        s = math.sin(u)
        c = math.cos(u)
        l2 = lam * lam
        B = 1.0 + l2 * s * s
        A = l2 * s * s + c * c
        q = math.sqrt(math.sqrt(B))
        f = s / q
        fp = c * (B + 1.0) / (2.0 * B * q)
        sa = math.sqrt(A)
        h = lam * c / sa
        hp = -lam * l2 * s / (A * sa)
        return f, fp, h, hp
    if kind == LIMIT:
        s = math.sin(u)
        return math.cos(u) / s, -1.0 / (s * s), 1.0, 0.0
    a = par
    return u ** (-a), -a * u ** (-a - 1.0), 1.0, 0.0


@njit(cache=True, error_model="numpy")
def _rhs(kind, par, c0, c1, y, out):
    g0, g0p, g1, g1p = warps(kind, par, y[0])
    acc = 0.0
    if c0 != 0.0:
        acc += c0 * c0 * g0p / (g0 * g0 * g0)
        out[2] = c0 / (g0 * g0)
    else:
        out[2] = 0.0
    if c1 != 0.0:
        acc += c1 * c1 * g1p / (g1 * g1 * g1)
        out[3] = c1 / (g1 * g1)
    else:
        out[3] = 0.0
    out[0] = y[1]
    out[1] = acc


# Dormand-Prince 5(4) tableau
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array([
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1 / 5, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3 / 40, 9 / 40, 0.0, 0.0, 0.0, 0.0],
    [44 / 45, -56 / 15, 32 / 9, 0.0, 0.0, 0.0],
    [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0.0, 0.0],
    [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0.0],
    [35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84],
])
_B5 = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84, 0.0])
_B4 = np.array([5179 / 57600, 0.0, 7571 / 16695, 393 / 640, -92097 / 339200, 187 / 2100, 1 / 40])


@njit(cache=True, error_model="numpy")
def _dp_step(kind, par, c0, c1, y, h, ynew, err, k):
    tmp = np.empty(4)
    for st in range(7):
        for i in range(4):
            acc = y[i]
            for j in range(st):
                acc += h * _A[st, j] * k[j, i]
            tmp[i] = acc
        _rhs(kind, par, c0, c1, tmp, k[st])
        if not np.isfinite(k[st, 0] + k[st, 1] + k[st, 2] + k[st, 3]):
            return False
    for i in range(4):
        s5 = 0.0
        s4 = 0.0
        for st in range(7):
            s5 += _B5[st] * k[st, i]
            s4 += _B4[st] * k[st, i]
        ynew[i] = y[i] + h * s5
        err[i] = h * (s5 - s4)
    return True


@njit(cache=True, error_model="numpy")
def shoot(kind, par, u0, p0, c0, c1, stop_var, target, u_lo, u_hi, max_len, tol, direction=0):
    """Integrate until state component ``stop_var`` reaches ``target``.

    ``stop_var`` is 2 or 3 for a fiber angle (these only increase) or 0 for
    the base coordinate, in which case the first crossing of ``target`` with
    sign ``direction`` ends the shot.  Returns (u, p, v0, v1, length, status).
    """
    y = np.array([u0, p0, 0.0, 0.0])
    ynew = np.empty(4)
    err = np.empty(4)
    k = np.empty((7, 4))
    s = 0.0
    h = 1e-3
    while True:
        if s >= max_len:
            return y[0], y[1], y[2], y[3], s, TOO_LONG
        h = min(h, max_len - s + 1e-15)
        if h < 1e-14:
            return y[0], y[1], y[2], y[3], s, UNDERFLOW
        ok = _dp_step(kind, par, c0, c1, y, h, ynew, err, k)
        enorm = 0.0
        if ok:
            for i in range(4):
                sc = tol + tol * max(abs(y[i]), abs(ynew[i]))
                enorm = max(enorm, abs(err[i]) / sc)
        if (not ok) or enorm > 1.0 or ynew[0] < u_lo or ynew[0] > u_hi:
            if ok and enorm <= 1.0 and h < 1e-12:
                return y[0], y[1], y[2], y[3], s, LEFT_CHART
            h *= 0.25 if not ok or enorm > 1.0 else 0.5
            continue
        if stop_var == 0:
            if direction > 0:
                hit = y[0] < target <= ynew[0]
            else:
                hit = y[0] > target >= ynew[0]
        else:
            hit = ynew[stop_var] >= target
        if hit:
            # land exactly on the target by secant iteration on the step size
            ha, va = 0.0, y[stop_var] - target
            hb, vb = h, ynew[stop_var] - target
            for _ in range(60):
                if vb == va:
                    break
                hc = hb - vb * (hb - ha) / (vb - va)
                if not (0.0 < hc <= h):
                    hc = 0.5 * (ha + hb)
                _dp_step(kind, par, c0, c1, y, hc, ynew, err, k)
                vc = ynew[stop_var] - target
                ha, va = hb, vb
                hb, vb = hc, vc
                if abs(vc) <= 1e-15 * max(1.0, abs(target)):
                    break
            return ynew[0], ynew[1], ynew[2], ynew[3], s + hb, OK
        for i in range(4):
            y[i] = ynew[i]
        s += h
        fac = 0.9 * (1.0 / max(enorm, 1e-10)) ** 0.2
        h *= min(5.0, max(0.2, fac))


@njit(cache=True, error_model="numpy")
def shoot_many(kind, par, u0, p0s, c0s, c1s, stop_var, target, u_lo, u_hi, max_len, tol, direction):
    n = p0s.shape[0]
    out = np.empty((n, 6))
    for i in range(n):
        u, p, v0, v1, length, status = shoot(
            kind, par, u0, p0s[i], c0s[i], c1s[i], stop_var, target, u_lo, u_hi, max_len, tol, direction
        )
        out[i, 0] = u
        out[i, 1] = p
        out[i, 2] = v0
        out[i, 3] = v1
        out[i, 4] = length
        out[i, 5] = status
    return out


# -- grid graph -------------------------------------------------------------

@njit(cache=True, error_model="numpy")
def _sift_up(heap, pos, key, i):
    node = heap[i]
    while i > 0:
        parent = (i - 1) >> 1
        if key[heap[parent]] <= key[node]:
            break
        heap[i] = heap[parent]
        pos[heap[i]] = i
        i = parent
    heap[i] = node
    pos[node] = i


@njit(cache=True, error_model="numpy")
def _sift_down(heap, pos, key, i, size):
    node = heap[i]
    while True:
        child = 2 * i + 1
        if child >= size:
            break
        if child + 1 < size and key[heap[child + 1]] < key[heap[child]]:
            child += 1
        if key[heap[child]] >= key[node]:
            break
        heap[i] = heap[child]
        pos[heap[i]] = i
        i = child
    heap[i] = node
    pos[node] = i


@njit(cache=True, error_model="numpy")
def grid_dijkstra(nu, n0, n1, offsets, weights, src, dst):
    """Shortest path on an implicit grid graph.

    Node (i, j, l) has index (i * n0 + j) * n1 + l.  ``weights[i, o]`` is the
    length of the edge from base row i along ``offsets[o]``.  Returns the
    distance to ``dst``, the predecessor array and the distance array; with
    ``dst < 0`` every node is settled and the first value is NaN.
    """
    total = nu * n0 * n1
    dist = np.full(total, np.inf)
    pred = np.full(total, -1, dtype=np.int64)
    pos = np.full(total, -1, dtype=np.int64)
    heap = np.empty(total, dtype=np.int64)
    done = np.zeros(total, dtype=np.bool_)
    size = 0
    dist[src] = 0.0
    heap[0] = src
    pos[src] = 0
    size = 1
    no = offsets.shape[0]
    while size > 0:
        node = heap[0]
        size -= 1
        if size > 0:
            heap[0] = heap[size]
            pos[heap[0]] = 0
            _sift_down(heap, pos, dist, 0, size)
        pos[node] = -1
        done[node] = True
        if node == dst:
            return dist[node], pred, dist
        l = node % n1
        rest = node // n1
        j = rest % n0
        i = rest // n0
        d0 = dist[node]
        for o in range(no):
            ii = i + offsets[o, 0]
            jj = j + offsets[o, 1]
            ll = l + offsets[o, 2]
            if ii < 0 or ii >= nu or jj < 0 or jj >= n0 or ll < 0 or ll >= n1:
                continue
            w = weights[i, o]
            if not np.isfinite(w):
                continue
            nb = (ii * n0 + jj) * n1 + ll
            if done[nb]:
                continue
            nd = d0 + w
            if nd < dist[nb]:
                dist[nb] = nd
                pred[nb] = node
                if pos[nb] < 0:
                    heap[size] = nb
                    pos[nb] = size
                    size += 1
                _sift_up(heap, pos, dist, pos[nb])
    if dst < 0:
        return np.nan, pred, dist
    return dist[dst], pred, dist


@njit(cache=True, error_model="numpy")
def polyline_length(kind, par, pts, grad):
    """Midpoint-rule length of a chart polyline and its gradient in ``grad``."""
    n = pts.shape[0]
    total = 0.0
    for i in range(n):
        for j in range(3):
            grad[i, j] = 0.0
    for i in range(n - 1):
        du = pts[i + 1, 0] - pts[i, 0]
        d0 = pts[i + 1, 1] - pts[i, 1]
        d1 = pts[i + 1, 2] - pts[i, 2]
        g0, g0p, g1, g1p = warps(kind, par, 0.5 * (pts[i, 0] + pts[i + 1, 0]))
        seg = math.sqrt(du * du + g0 * g0 * d0 * d0 + g1 * g1 * d1 * d1)
        total += seg
        if seg == 0.0:
            continue
        gu = du / seg
        gv0 = g0 * g0 * d0 / seg
        gv1 = g1 * g1 * d1 / seg
        gm = 0.5 * (g0 * g0p * d0 * d0 + g1 * g1p * d1 * d1) / seg
        grad[i, 0] += gm - gu
        grad[i + 1, 0] += gm + gu
        grad[i, 1] -= gv0
        grad[i + 1, 1] += gv0
        grad[i, 2] -= gv1
        grad[i + 1, 2] += gv1
    return total
