"""Numba @njit hot kernels: coverage computation and grid Dijkstra.

Import this module only when the numba backend is selected; the pure
numpy/python fallbacks live next to their callers in propagation.py and
routing.py. Both backends implement the exact same arithmetic so route
results are bit-identical given the same coverage grid.
"""

import numpy as np
from numba import njit, prange

RX_HEIGHT_M = 1.5
FSPL_CONST_DB = 32.45


@njit(cache=True)
def _seg_hits_rect(ax, ay, bx, by, x0, y0, x1, y1):
    dx = bx - ax
    dy = by - ay
    if dx == 0.0 and dy == 0.0:
        return x0 < ax < x1 and y0 < ay < y1
    t0 = 0.0
    t1 = 1.0
    for k in range(4):
        if k == 0:
            p = -dx
            q = ax - x0
        elif k == 1:
            p = dx
            q = x1 - ax
        elif k == 2:
            p = -dy
            q = ay - y0
        else:
            p = dy
            q = y1 - ay
        if p == 0.0:
            if q < 0.0:
                return False
        else:
            t = q / p
            if p < 0.0:
                if t > t1:
                    return False
                if t > t0:
                    t0 = t
            else:
                if t < t0:
                    return False
                if t < t1:
                    t1 = t
    if t1 <= t0:
        return False
    tm = 0.5 * (t0 + t1)
    mx = ax + tm * dx
    my = ay + tm * dy
    return x0 < mx < x1 and y0 < my < y1


@njit(cache=True)
def _seg_blocked(ax, ay, bx, by, rects):
    for i in range(rects.shape[0]):
        if _seg_hits_rect(ax, ay, bx, by,
                          rects[i, 0], rects[i, 1], rects[i, 2], rects[i, 3]):
            return True
    return False


@njit(cache=True, parallel=True)
def coverage_kernel(rows, cols, resolution, rects, st_x, st_y, st_h, st_tx,
                    st_f, exponent, min_dist, nlos_penalty):
    """Best-server RSS (dBm) per cell center; log-distance path loss."""
    rss = np.empty((rows, cols), np.float64)
    for r in prange(rows):
        cy = (r + 0.5) * resolution
        for c in range(cols):
            cx = (c + 0.5) * resolution
            best = -1e300
            for k in range(st_x.shape[0]):
                ddx = cx - st_x[k]
                ddy = cy - st_y[k]
                ddz = st_h[k] - RX_HEIGHT_M
                d = np.sqrt(ddx * ddx + ddy * ddy + ddz * ddz)
                if d < min_dist:
                    d = min_dist
                pl = (FSPL_CONST_DB + 10.0 * exponent * np.log10(d)
                      + 20.0 * np.log10(st_f[k]))
                if _seg_blocked(st_x[k], st_y[k], cx, cy, rects):
                    pl += nlos_penalty
                v = st_tx[k] - pl
                if v > best:
                    best = v
            rss[r, c] = best
    return rss


# --- binary-heap Dijkstra over the 4-connected grid ---

@njit(cache=True, inline="always")
def _heap_less(hc, hi, a, b):
    if hc[a] != hc[b]:
        return hc[a] < hc[b]
    return hi[a] < hi[b]


@njit(cache=True)
def _heap_push(hc, hi, size, cost, node):
    hc[size] = cost
    hi[size] = node
    j = size
    while j > 0:
        p = (j - 1) // 2
        if _heap_less(hc, hi, j, p):
            hc[j], hc[p] = hc[p], hc[j]
            hi[j], hi[p] = hi[p], hi[j]
            j = p
        else:
            break
    return size + 1


@njit(cache=True)
def _heap_pop(hc, hi, size):
    cost = hc[0]
    node = hi[0]
    size -= 1
    hc[0] = hc[size]
    hi[0] = hi[size]
    j = 0
    while True:
        l = 2 * j + 1
        r = l + 1
        small = j
        if l < size and _heap_less(hc, hi, l, small):
            small = l
        if r < size and _heap_less(hc, hi, r, small):
            small = r
        if small == j:
            break
        hc[j], hc[small] = hc[small], hc[j]
        hi[j], hi[small] = hi[small], hi[j]
        j = small
    return cost, node, size


@njit(cache=True)
def dijkstra_kernel(cost_in, blocked, s_id, d_id, unit_cost):
    """Min-cost search with head-node edge weights and (cost, id) tie-break.

    cost_in[r, c] is the weight of any edge entering cell (r, c); with
    unit_cost=True every edge weighs 1.0 (minimum-hop baseline). Returns
    (dist, pred, found).
    """
    rows, cols = blocked.shape
    n = rows * cols
    dist = np.full(n, np.inf)
    pred = np.full(n, -1, np.int64)
    done = np.zeros(n, np.bool_)
    cap = 4 * n + 16
    hc = np.empty(cap, np.float64)
    hi = np.empty(cap, np.int64)
    size = 0

    dist[s_id] = 0.0
    size = _heap_push(hc, hi, size, 0.0, s_id)
    found = False
    while size > 0:
        cost, u, size = _heap_pop(hc, hi, size)
        if done[u]:
            continue
        done[u] = True
        if u == d_id:
            found = True
            break
        ur = u // cols
        uc = u % cols
        for k in range(4):
            if k == 0:
                vr, vc = ur - 1, uc
            elif k == 1:
                vr, vc = ur + 1, uc
            elif k == 2:
                vr, vc = ur, uc - 1
            else:
                vr, vc = ur, uc + 1
            if vr < 0 or vr >= rows or vc < 0 or vc >= cols:
                continue
            if blocked[vr, vc]:
                continue
            w = 1.0 if unit_cost else cost_in[vr, vc]
            nd = cost + w
            v = vr * cols + vc
            if nd < dist[v]:
                dist[v] = nd
                pred[v] = u
                size = _heap_push(hc, hi, size, nd, v)
    return dist, pred, found


def warmup():
    """Trigger JIT compilation of the kernels on tiny inputs."""
    rects = np.zeros((1, 4), np.float64)
    rects[0] = (0.25, 0.25, 0.75, 0.75)
    coverage_kernel(2, 2, 1.0, rects,
                    np.array([0.1]), np.array([0.1]), np.array([1.5]),
                    np.array([30.0]), np.array([3.9]), 2.0, 1.0, 25.0)
    blocked = np.zeros((2, 2), np.bool_)
    cost_in = np.ones((2, 2), np.float64)
    dijkstra_kernel(cost_in, blocked, 0, 3, False)
