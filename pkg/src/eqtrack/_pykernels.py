"""Pure-Python kernels; the reference twin of ``_ckernels.pyx``.

Both modules expose the same functions and perform the same floating-point
operations in the same order, so results agree bit for bit.
"""

import heapq

import numpy as np

BACKEND = "python"


def online_kmeans(pixels, radius):
    """Single-pass leader clustering with running-mean centroids.

    Returns ``(centroids, counts)`` in creation order.
    """
    pixels = np.ascontiguousarray(pixels, dtype=np.uint8).reshape(-1, 3)
    r2 = radius * radius
    cents = []
    counts = []
    for r, g, b in pixels.tolist():
        best = -1
        best_d = 0.0
        for k, c in enumerate(cents):
            dr = r - c[0]
            dg = g - c[1]
            db = b - c[2]
            d = dr * dr + dg * dg + db * db
            if best < 0 or d < best_d:
                best = k
                best_d = d
        if best < 0 or best_d > r2:
            cents.append([float(r), float(g), float(b)])
            counts.append(1)
        else:
            n = counts[best] + 1
            c = cents[best]
            c[0] += (r - c[0]) / n
            c[1] += (g - c[1]) / n
            c[2] += (b - c[2]) / n
            counts[best] = n
    return np.array(cents, dtype=np.float64).reshape(-1, 3), np.array(counts, dtype=np.int64)


def _pair_key(ca, wa, cb, wb, d):
    lo, hi = (ca, cb) if ca <= cb else (cb, ca)
    return (-min(wa, wb), d, -max(wa, wb), lo, hi)


def _similarity(ca, wa, cb, wb, r2):
    # ca/cb: lists of 3-lists, wa/wb: lists of floats
    cand = []
    for p in range(len(wa)):
        a = ca[p]
        for q in range(len(wb)):
            b = cb[q]
            d0 = a[0] - b[0]
            d1 = a[1] - b[1]
            d2 = a[2] - b[2]
            d = d0 * d0 + d1 * d1 + d2 * d2
            if d <= r2:
                cand.append((_pair_key(a, wa[p], b, wb[q], d), p, q))
    cand.sort(key=lambda e: e[0])
    used_a = set()
    used_b = set()
    total = 0.0
    for key, p, q in cand:
        if p in used_a or q in used_b:
            continue
        used_a.add(p)
        used_b.add(q)
        total += -key[0]
    if total > 1.0:
        total = 1.0
    return total


def match_similarity(colors_a, weights_a, colors_b, weights_b, radius):
    return _similarity(
        np.asarray(colors_a, dtype=np.float64).tolist(),
        np.asarray(weights_a, dtype=np.float64).tolist(),
        np.asarray(colors_b, dtype=np.float64).tolist(),
        np.asarray(weights_b, dtype=np.float64).tolist(),
        radius * radius,
    )


def _unpack(colors, weights, counts):
    colors = np.asarray(colors, dtype=np.float64)
    weights = np.asarray(weights, dtype=np.float64)
    counts = np.asarray(counts, dtype=np.int32)
    out = []
    for k in range(len(counts)):
        n = int(counts[k])
        out.append((colors[k, :n].tolist(), weights[k, :n].tolist()))
    return out


def lag_scores(colors, weights, counts, t_lo, t_hi, radius):
    """Mean similarity between frame ``j`` and ``j + t`` for each lag ``t``."""
    frames = _unpack(colors, weights, counts)
    n = len(frames)
    r2 = radius * radius
    out = np.zeros(max(t_hi - t_lo + 1, 0), dtype=np.float64)
    for t in range(t_lo, t_hi + 1):
        s = 0.0
        for j in range(n - t):
            s += _similarity(frames[j][0], frames[j][1], frames[j + t][0], frames[j + t][1], r2)
        out[t - t_lo] = s / (n - t)
    return out


def pair_scores(colors, weights, counts, offsets, edges_i, edges_j, radius):
    """Mean and spread (max - min) of piece-pair similarities per edge."""
    pieces = _unpack(colors, weights, counts)
    offsets = np.asarray(offsets, dtype=np.int64)
    r2 = radius * radius
    m = len(edges_i)
    dis = np.zeros(m, dtype=np.float64)
    mug = np.zeros(m, dtype=np.float64)
    for e in range(m):
        i = int(edges_i[e])
        j = int(edges_j[e])
        s = 0.0
        lo = 2.0
        hi = -1.0
        for a in range(offsets[i], offsets[i + 1]):
            pa = pieces[a]
            for b in range(offsets[j], offsets[j + 1]):
                pb = pieces[b]
                v = _similarity(pa[0], pa[1], pb[0], pb[1], r2)
                s += v
                if v < lo:
                    lo = v
                if v > hi:
                    hi = v
        npairs = (offsets[i + 1] - offsets[i]) * (offsets[j + 1] - offsets[j])
        dis[e] = s / npairs
        mug[e] = hi - lo
    return dis, mug


def min_cost_flow(n_nodes, tails, heads, costs, source, sink, stop_tol):
    """Successive shortest paths with node potentials on a unit-capacity DAG.

    Augments one unit at a time while the cheapest residual S-T path has
    negative cost. Returns the 0/1 flow on each input arc.
    """
    tails = [int(v) for v in tails]
    heads = [int(v) for v in heads]
    costs = [float(v) for v in costs]
    n_arcs = len(tails)
    inf = float("inf")

    # residual arc 2k is arc k forward, 2k+1 its reverse
    cap = [0] * (2 * n_arcs)
    adj = [[] for _ in range(n_nodes)]
    for k in range(n_arcs):
        cap[2 * k] = 1
        adj[tails[k]].append(2 * k)
        adj[heads[k]].append(2 * k + 1)
    for lst in adj:
        lst.sort()

    def frm(r):
        return tails[r >> 1] if r & 1 == 0 else heads[r >> 1]

    def to(r):
        return heads[r >> 1] if r & 1 == 0 else tails[r >> 1]

    def rcost(r):
        return costs[r >> 1] if r & 1 == 0 else -costs[r >> 1]

    # initial potentials: shortest distances in topological order
    indeg = [0] * n_nodes
    for k in range(n_arcs):
        indeg[heads[k]] += 1
    order = [v for v in range(n_nodes) if indeg[v] == 0]
    pos = 0
    while pos < len(order):
        u = order[pos]
        pos += 1
        for r in adj[u]:
            if r & 1 == 0:
                v = heads[r >> 1]
                indeg[v] -= 1
                if indeg[v] == 0:
                    order.append(v)
    if len(order) != n_nodes:
        raise ValueError("flow graph has a cycle")
    pot = [inf] * n_nodes
    pot[source] = 0.0
    for u in order:
        if pot[u] == inf:
            continue
        for r in adj[u]:
            if r & 1 == 0:
                k = r >> 1
                nd = pot[u] + costs[k]
                if nd < pot[heads[k]]:
                    pot[heads[k]] = nd
    for v in range(n_nodes):
        if pot[v] == inf:
            pot[v] = 0.0

    while True:
        dist = [inf] * n_nodes
        pred = [-1] * n_nodes
        dist[source] = 0.0
        heap = [(0.0, source)]
        while heap:
            d, u = heapq.heappop(heap)
            if d > dist[u]:
                continue
            pu = pot[u]
            for r in adj[u]:
                if cap[r] == 0:
                    continue
                v = to(r)
                # clamp round-off so Dijkstra never sees a negative weight
                rc = rcost(r) + pu - pot[v]
                if rc < 0.0:
                    rc = 0.0
                nd = d + rc
                if nd < dist[v]:
                    dist[v] = nd
                    pred[v] = r
                    heapq.heappush(heap, (nd, v))
        if dist[sink] == inf:
            break
        path_cost = 0.0
        v = sink
        while v != source:
            r = pred[v]
            path_cost += rcost(r)
            v = frm(r)
        if not path_cost < -stop_tol:
            break
        v = sink
        while v != source:
            r = pred[v]
            cap[r] -= 1
            cap[r ^ 1] += 1
            v = frm(r)
        dt = dist[sink]
        for v in range(n_nodes):
            dv = dist[v]
            pot[v] += dv if dv < dt else dt

    return np.array([cap[2 * k + 1] for k in range(n_arcs)], dtype=np.int8)
