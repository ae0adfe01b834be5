"""Compiled inner loops for the summary-function estimators.

All kernels take a rectangular window ``(x0, x1, y0, y1)`` and a grid of
``K`` equally spaced or arbitrary increasing distances; bin lookup uses
``searchsorted`` on the grid so any increasing grid works.
"""
import math

import numpy as np
from numba import njit

# edge correction codes
NONE, TRANSLATE, BORDER, PERIODIC = 0, 1, 2, 3


@njit(cache=True)
def pair_counts(x, y, rgrid, x0, x1, y0, y1, mode):
    """Weighted cumulative pair sums ``sum_{i != j} 1(d_ij <= r) e_ij`` for r in rgrid.

    For ``BORDER`` only pairs whose first point lies at least ``r`` from the
    window edge count, so the result depends on ``r`` through both the
    indicator and the border condition.
    """
    n = x.size
    K = rgrid.size
    rmax = rgrid[K - 1]
    w = x1 - x0
    h = y1 - y0
    hist = np.zeros(K)
    if mode == BORDER:
        b = np.empty(n)
        for i in range(n):
            b[i] = min(x[i] - x0, x1 - x[i], y[i] - y0, y1 - y[i])
        for i in range(n):
            for j in range(n):
                if i == j:
                    continue
                dx = abs(x[i] - x[j])
                if dx > rmax:
                    continue
                dy = abs(y[i] - y[j])
                if dy > rmax:
                    continue
                d = math.sqrt(dx * dx + dy * dy)
                if d > rmax:
                    continue
                k = np.searchsorted(rgrid, d)
                # counts at every r in [d, b_i]
                kb = np.searchsorted(rgrid, b[i], side="right")
                if kb > k:
                    hist[k] += 1.0
                    if kb < K:
                        hist[kb] -= 1.0
        return np.cumsum(hist)
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = abs(x[i] - x[j])
            dy = abs(y[i] - y[j])
            if mode == PERIODIC:
                if dx > w - dx:
                    dx = w - dx
                if dy > h - dy:
                    dy = h - dy
            if dx > rmax or dy > rmax:
                continue
            d = math.sqrt(dx * dx + dy * dy)
            if d > rmax:
                continue
            k = np.searchsorted(rgrid, d)
            if mode == TRANSLATE:
                hist[k] += 2.0 / ((w - dx) * (h - dy))
            else:
                hist[k] += 2.0
    return np.cumsum(hist)


@njit(cache=True)
def cross_pair_counts(x, y, xb, yb, rgrid, x0, x1, y0, y1, mode):
    """Like ``pair_counts`` but between two distinct point sets."""
    n = x.size
    m = xb.size
    K = rgrid.size
    rmax = rgrid[K - 1]
    w = x1 - x0
    h = y1 - y0
    hist = np.zeros(K)
    for i in range(n):
        bi = min(x[i] - x0, x1 - x[i], y[i] - y0, y1 - y[i])
        for j in range(m):
            dx = abs(x[i] - xb[j])
            dy = abs(y[i] - yb[j])
            if mode == PERIODIC:
                if dx > w - dx:
                    dx = w - dx
                if dy > h - dy:
                    dy = h - dy
            if dx > rmax or dy > rmax:
                continue
            d = math.sqrt(dx * dx + dy * dy)
            if d > rmax:
                continue
            k = np.searchsorted(rgrid, d)
            if mode == TRANSLATE:
                hist[k] += 1.0 / ((w - dx) * (h - dy))
            elif mode == BORDER:
                kb = np.searchsorted(rgrid, bi, side="right")
                if kb > k:
                    hist[k] += 1.0
                    if kb < K:
                        hist[kb] -= 1.0
            else:
                hist[k] += 1.0
    return np.cumsum(hist)


@njit(cache=True)
def border_counts(x, y, rgrid, x0, x1, y0, y1):
    """Number of points at distance >= r from the window edge, per r."""
    K = rgrid.size
    out = np.zeros(K)
    for i in range(x.size):
        b = min(x[i] - x0, x1 - x[i], y[i] - y0, y1 - y[i])
        kb = np.searchsorted(rgrid, b, side="right")
        for k in range(kb):
            out[k] += 1.0
    return out


@njit(cache=True)
def nn_distances(x, y):
    """Nearest-neighbour distance of every point (brute force)."""
    n = x.size
    out = np.full(n, np.inf)
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = x[i] - x[j]
            dy = y[i] - y[j]
            d = dx * dx + dy * dy
            if d < out[i]:
                out[i] = d
            if d < out[j]:
                out[j] = d
    return np.sqrt(out)


@njit(cache=True)
def reduced_sample_cdf(dist, bdist, rgrid):
    """Border-corrected distribution ``#{d <= r <= b} / #{b >= r}``.

    Where no sample point survives the border condition the previous
    value is carried forward (0 at the start).
    """
    K = rgrid.size
    num = np.zeros(K + 1)
    den = np.zeros(K + 1)
    for i in range(dist.size):
        kb = np.searchsorted(rgrid, bdist[i], side="right")
        if kb == 0:
            continue
        den[0] += 1.0
        den[kb] -= 1.0
        kd = np.searchsorted(rgrid, dist[i])
        if kd < kb:
            num[kd] += 1.0
            num[kb] -= 1.0
    out = np.empty(K)
    cn = 0.0
    cd = 0.0
    last = 0.0
    for k in range(K):
        cn += num[k]
        cd += den[k]
        if cd > 0:
            last = cn / cd
        out[k] = last
    return out


@njit(cache=True)
def lattice_empty_space(x, y, x0, x1, y0, y1, nx, ny, rmax):
    """Distance from each cell centre of an ``nx * ny`` lattice to the nearest point.

    Distances above ``rmax`` are reported as ``inf``; only lattice cells
    within ``rmax`` of a point are visited.
    """
    dxc = (x1 - x0) / nx
    dyc = (y1 - y0) / ny
    e = np.full(nx * ny, np.inf)
    r2 = rmax * rmax
    for p in range(x.size):
        ia = max(0, int(math.floor((x[p] - rmax - x0) / dxc - 0.5)))
        ib = min(nx - 1, int(math.ceil((x[p] + rmax - x0) / dxc - 0.5)))
        ja = max(0, int(math.floor((y[p] - rmax - y0) / dyc - 0.5)))
        jb = min(ny - 1, int(math.ceil((y[p] + rmax - y0) / dyc - 0.5)))
        for i in range(ia, ib + 1):
            cx = x0 + (i + 0.5) * dxc
            ddx = (cx - x[p]) ** 2
            if ddx > r2:
                continue
            for j in range(ja, jb + 1):
                cy = y0 + (j + 0.5) * dyc
                d = ddx + (cy - y[p]) ** 2
                k = j * nx + i
                if d <= r2 and d < e[k]:
                    e[k] = d
    return np.sqrt(e)


@njit(cache=True)
def pcf_epanechnikov(x, y, rgrid, bw, x0, x1, y0, y1):
    """Translation-corrected kernel sum for the pair correlation function.

    Returns ``sum_{i != j} k_h(r - d_ij) / (2 pi r |W cap W_{ij}|)`` for each
    ``r`` in ``rgrid``; divide by the squared intensity to get ``g(r)``.
    """
    n = x.size
    K = rgrid.size
    rmax = rgrid[K - 1] + bw
    w = x1 - x0
    h = y1 - y0
    out = np.zeros(K)
    for i in range(n - 1):
        for j in range(i + 1, n):
            dx = abs(x[i] - x[j])
            dy = abs(y[i] - y[j])
            if dx > rmax or dy > rmax:
                continue
            d = math.sqrt(dx * dx + dy * dy)
            if d > rmax:
                continue
            wt = 2.0 / ((w - dx) * (h - dy))
            for k in range(K):
                u = (rgrid[k] - d) / bw
                if -1.0 < u < 1.0:
                    out[k] += wt * 0.75 * (1.0 - u * u) / bw
    for k in range(K):
        out[k] /= 2.0 * math.pi * rgrid[k]
    return out


@njit(cache=True)
def hardcore_relax(x, y, h, x0, x1, y0, y1, sweeps, u):
    """Single-point relocation moves keeping all pair distances >= h.

    ``u`` supplies the uniform variates, three per proposed move
    (point index, new x, new y).  A move is accepted iff the new
    position keeps the hard-core constraint, which leaves the uniform
    distribution on admissible configurations invariant.
    """
    n = x.size
    h2 = h * h
    w = x1 - x0
    hh = y1 - y0
    moves = sweeps * n
    accepted = 0
    for m in range(moves):
        i = min(int(u[3 * m] * n), n - 1)
        nx = x0 + u[3 * m + 1] * w
        ny = y0 + u[3 * m + 2] * hh
        ok = True
        for j in range(n):
            if j == i:
                continue
            dx = nx - x[j]
            dy = ny - y[j]
            if dx * dx + dy * dy < h2:
                ok = False
                break
        if ok:
            x[i] = nx
            y[i] = ny
            accepted += 1
    return accepted


@njit(cache=True)
def rsa_fill(xs, ys, placed, h, x0, x1, y0, y1, u):
    """Random sequential adsorption: try candidates from ``u`` in order.

    ``xs``/``ys`` hold ``placed`` accepted points and are filled in place
    up to their length.  Returns ``(placed, used)`` where ``used`` is the
    number of candidates consumed.
    """
    n = xs.size
    h2 = h * h
    w = x1 - x0
    hh = y1 - y0
    t = 0
    ncand = u.size // 2
    while placed < n and t < ncand:
        cx = x0 + u[2 * t] * w
        cy = y0 + u[2 * t + 1] * hh
        t += 1
        ok = True
        for j in range(placed):
            dx = cx - xs[j]
            dy = cy - ys[j]
            if dx * dx + dy * dy < h2:
                ok = False
                break
        if ok:
            xs[placed] = cx
            ys[placed] = cy
            placed += 1
    return placed, t
