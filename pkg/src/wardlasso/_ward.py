"""Compiled kernel for constrained Ward agglomeration."""

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _less(hc, hu, hv, i, j):
    if hc[i] != hc[j]:
        return hc[i] < hc[j]
    if hu[i] != hu[j]:
        return hu[i] < hu[j]
    return hv[i] < hv[j]


@njit(cache=True, inline="always")
def _swap(hc, hu, hv, i, j):
    hc[i], hc[j] = hc[j], hc[i]
    hu[i], hu[j] = hu[j], hu[i]
    hv[i], hv[j] = hv[j], hv[i]


@njit(cache=True)
def _push(hc, hu, hv, size, c, u, v):
    i = size
    hc[i], hu[i], hv[i] = c, u, v
    while i > 0:
        parent = (i - 1) // 2
        if _less(hc, hu, hv, i, parent):
            _swap(hc, hu, hv, i, parent)
            i = parent
        else:
            break
    return size + 1


@njit(cache=True)
def _pop(hc, hu, hv, size):
    c, u, v = hc[0], hu[0], hv[0]
    size -= 1
    if size > 0:
        hc[0], hu[0], hv[0] = hc[size], hu[size], hv[size]
        i = 0
        while True:
            left = 2 * i + 1
            if left >= size:
                break
            m = left
            if left + 1 < size and _less(hc, hu, hv, left + 1, left):
                m = left + 1
            if _less(hc, hu, hv, m, i):
                _swap(hc, hu, hv, m, i)
                i = m
            else:
                break
    return c, u, v, size


@njit(cache=True)
def _cost(centroids, sizes, a, b):
    s = 0.0
    for j in range(centroids.shape[1]):
        d = centroids[a, j] - centroids[b, j]
        s += d * d
    return sizes[a] * sizes[b] / (sizes[a] + sizes[b]) * s


@njit(cache=True)
def ward_merges(XT, edges, n_merges):
    """Run ``n_merges`` constrained Ward merges on the rows of ``XT``.

    Returns ``(children, raw_heights, done)``; ``done < n_merges`` means the
    graph ran out of adjacent pairs.
    """
    p, n = XT.shape
    total = p + n_merges
    centroids = np.empty((total, n))
    centroids[:p] = XT
    sizes = np.zeros(total, dtype=np.int64)
    sizes[:p] = 1
    active = np.zeros(total, dtype=np.bool_)
    active[:p] = True

    deg = np.zeros(p, dtype=np.int64)
    for e in range(edges.shape[0]):
        deg[edges[e, 0]] += 1
        deg[edges[e, 1]] += 1
    nbrs = [np.empty(0, dtype=np.int64) for _ in range(total)]
    fill = np.zeros(p, dtype=np.int64)
    for i in range(p):
        nbrs[i] = np.empty(deg[i], dtype=np.int64)
    for e in range(edges.shape[0]):
        a, b = edges[e, 0], edges[e, 1]
        nbrs[a][fill[a]] = b
        fill[a] += 1
        nbrs[b][fill[b]] = a
        fill[b] += 1

    cap = edges.shape[0] + 4 * total + 16
    hc = np.empty(cap)
    hu = np.empty(cap, dtype=np.int64)
    hv = np.empty(cap, dtype=np.int64)
    size = 0
    for e in range(edges.shape[0]):
        a, b = edges[e, 0], edges[e, 1]
        size = _push(hc, hu, hv, size, _cost(centroids, sizes, a, b), min(a, b), max(a, b))

    children = np.empty((n_merges, 2), dtype=np.int64)
    heights = np.empty(n_merges)
    stamp = np.full(total, -1, dtype=np.int64)
    buf = np.empty(total, dtype=np.int64)
    t = 0
    while t < n_merges and size > 0:
        c, u, v, size = _pop(hc, hu, hv, size)
        if not (active[u] and active[v]):
            continue
        new = p + t
        su, sv = sizes[u], sizes[v]
        for j in range(n):
            centroids[new, j] = (su * centroids[u, j] + sv * centroids[v, j]) / (su + sv)
        sizes[new] = su + sv
        active[u] = False
        active[v] = False
        active[new] = True
        children[t, 0] = u
        children[t, 1] = v
        heights[t] = c

        m = 0
        for src in (u, v):
            for k in nbrs[src]:
                if active[k] and stamp[k] != new:
                    stamp[k] = new
                    buf[m] = k
                    m += 1
        merged = np.sort(buf[:m].copy())
        nbrs[new] = merged
        nbrs[u] = np.empty(0, dtype=np.int64)
        nbrs[v] = np.empty(0, dtype=np.int64)
        for k in merged:
            old = nbrs[k]
            upd = np.empty(old.shape[0] + 1, dtype=np.int64)
            r = 0
            for x in old:
                if x != u and x != v:
                    upd[r] = x
                    r += 1
            upd[r] = new
            nbrs[k] = upd[:r + 1]
            if size >= cap:
                grow = 2 * cap
                hc2 = np.empty(grow)
                hu2 = np.empty(grow, dtype=np.int64)
                hv2 = np.empty(grow, dtype=np.int64)
                hc2[:size] = hc[:size]
                hu2[:size] = hu[:size]
                hv2[:size] = hv[:size]
                hc, hu, hv, cap = hc2, hu2, hv2, grow
            size = _push(hc, hu, hv, size, _cost(centroids, sizes, k, new), k, new)
        t += 1
    return children, heights, t
