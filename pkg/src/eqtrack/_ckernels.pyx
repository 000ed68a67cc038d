# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels. Mirrors ``_pykernels`` operation for operation."""

import numpy as np
cimport numpy as cnp
from libc.stdlib cimport malloc, realloc, free

cnp.import_array()

BACKEND = "cython"

cdef enum:
    MAXC = 16
    MAXPAIRS = 256

cdef double INF = float("inf")


def online_kmeans(pixels, double radius):
    cdef const unsigned char[:, ::1] px = np.ascontiguousarray(pixels, dtype=np.uint8).reshape(-1, 3)
    cdef Py_ssize_t n = px.shape[0]
    cdef Py_ssize_t cap_k = 64
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cents = np.zeros((cap_k, 3), dtype=np.float64)
    cdef cnp.ndarray[cnp.int64_t, ndim=1] counts = np.zeros(cap_k, dtype=np.int64)
    cdef double[:, ::1] cv = cents
    cdef long long[::1] kv = counts
    cdef Py_ssize_t k = 0, i, c, best
    cdef double r, g, b, dr, dg, db, d, best_d
    cdef double r2 = radius * radius
    cdef long long m
    for i in range(n):
        r = px[i, 0]
        g = px[i, 1]
        b = px[i, 2]
        best = -1
        best_d = 0.0
        for c in range(k):
            dr = r - cv[c, 0]
            dg = g - cv[c, 1]
            db = b - cv[c, 2]
            d = dr * dr + dg * dg + db * db
            if best < 0 or d < best_d:
                best = c
                best_d = d
        if best < 0 or best_d > r2:
            if k == cap_k:
                cap_k *= 2
                cents = np.concatenate([cents, np.zeros_like(cents)])
                counts = np.concatenate([counts, np.zeros_like(counts)])
                cv = cents
                kv = counts
            cv[k, 0] = r
            cv[k, 1] = g
            cv[k, 2] = b
            kv[k] = 1
            k += 1
        else:
            m = kv[best] + 1
            cv[best, 0] += (r - cv[best, 0]) / m
            cv[best, 1] += (g - cv[best, 1]) / m
            cv[best, 2] += (b - cv[best, 2]) / m
            kv[best] = m
    return cents[:k].copy(), counts[:k].copy()


cdef struct Pair:
    double negmin
    double d
    double negmax
    int p
    int q


cdef inline int _lex(const double* x, const double* y) noexcept nogil:
    # -1, 0, 1 lexicographic comparison of two RGB triples
    cdef int t
    for t in range(3):
        if x[t] < y[t]:
            return -1
        if x[t] > y[t]:
            return 1
    return 0


cdef inline bint _less(Pair* u, Pair* v, const double* ca, const double* cb) noexcept nogil:
    if u.negmin != v.negmin:
        return u.negmin < v.negmin
    if u.d != v.d:
        return u.d < v.d
    if u.negmax != v.negmax:
        return u.negmax < v.negmax
    cdef const double* ua = ca + 3 * u.p
    cdef const double* ub = cb + 3 * u.q
    cdef const double* va = ca + 3 * v.p
    cdef const double* vb = cb + 3 * v.q
    cdef const double* ulo = ua
    cdef const double* uhi = ub
    cdef const double* vlo = va
    cdef const double* vhi = vb
    if _lex(ua, ub) > 0:
        ulo = ub
        uhi = ua
    if _lex(va, vb) > 0:
        vlo = vb
        vhi = va
    cdef int c = _lex(ulo, vlo)
    if c != 0:
        return c < 0
    return _lex(uhi, vhi) < 0


cdef double _similarity(const double* ca, const double* wa, int na,
                        const double* cb, const double* wb, int nb, double r2) noexcept nogil:
    cdef Pair buf[MAXPAIRS]
    cdef Pair tmp
    cdef int used_a[MAXC]
    cdef int used_b[MAXC]
    cdef int npair = 0, p, q, s, t
    cdef double d0, d1, d2, d, total = 0.0
    for p in range(na):
        used_a[p] = 0
        for q in range(nb):
            d0 = ca[3 * p] - cb[3 * q]
            d1 = ca[3 * p + 1] - cb[3 * q + 1]
            d2 = ca[3 * p + 2] - cb[3 * q + 2]
            d = d0 * d0 + d1 * d1 + d2 * d2
            if d <= r2:
                buf[npair].negmin = -(wa[p] if wa[p] < wb[q] else wb[q])
                buf[npair].d = d
                buf[npair].negmax = -(wb[q] if wa[p] < wb[q] else wa[p])
                buf[npair].p = p
                buf[npair].q = q
                npair += 1
    for q in range(nb):
        used_b[q] = 0
    # stable insertion sort
    for s in range(1, npair):
        tmp = buf[s]
        t = s - 1
        while t >= 0 and _less(&tmp, &buf[t], ca, cb):
            buf[t + 1] = buf[t]
            t -= 1
        buf[t + 1] = tmp
    for s in range(npair):
        if used_a[buf[s].p] or used_b[buf[s].q]:
            continue
        used_a[buf[s].p] = 1
        used_b[buf[s].q] = 1
        total += -buf[s].negmin
    if total > 1.0:
        total = 1.0
    return total


def match_similarity(colors_a, weights_a, colors_b, weights_b, double radius):
    cdef const double[:, ::1] ca = np.ascontiguousarray(colors_a, dtype=np.float64).reshape(-1, 3)
    cdef const double[::1] wa = np.ascontiguousarray(weights_a, dtype=np.float64).reshape(-1)
    cdef const double[:, ::1] cb = np.ascontiguousarray(colors_b, dtype=np.float64).reshape(-1, 3)
    cdef const double[::1] wb = np.ascontiguousarray(weights_b, dtype=np.float64).reshape(-1)
    if wa.shape[0] > MAXC or wb.shape[0] > MAXC:
        raise ValueError("descriptor has too many colours for the compiled kernel")
    if wa.shape[0] == 0 or wb.shape[0] == 0:
        return 0.0
    return _similarity(&ca[0, 0], &wa[0], wa.shape[0], &cb[0, 0], &wb[0], wb.shape[0], radius * radius)


def _check_table(colors, weights, counts):
    c = np.ascontiguousarray(colors, dtype=np.float64)
    w = np.ascontiguousarray(weights, dtype=np.float64)
    n = np.ascontiguousarray(counts, dtype=np.int32)
    if c.ndim != 3 or c.shape[2] != 3 or w.shape != c.shape[:2] or n.shape[0] != c.shape[0]:
        raise ValueError("descriptor table has inconsistent shapes")
    if c.shape[1] > MAXC:
        raise ValueError("descriptor table is too wide for the compiled kernel")
    return c, w, n


def lag_scores(colors, weights, counts, int t_lo, int t_hi, double radius):
    c_arr, w_arr, n_arr = _check_table(colors, weights, counts)
    cdef const double[:, :, ::1] c = c_arr
    cdef const double[:, ::1] w = w_arr
    cdef const int[::1] cnt = n_arr
    cdef Py_ssize_t n = cnt.shape[0]
    cdef int size = t_hi - t_lo + 1
    if size < 0:
        size = 0
    out_arr = np.zeros(size, dtype=np.float64)
    cdef double[::1] out = out_arr
    cdef int t
    cdef Py_ssize_t j
    cdef double s, r2 = radius * radius
    with nogil:
        for t in range(t_lo, t_hi + 1):
            s = 0.0
            for j in range(n - t):
                s += _similarity(&c[j, 0, 0], &w[j, 0], cnt[j], &c[j + t, 0, 0], &w[j + t, 0], cnt[j + t], r2)
            out[t - t_lo] = s / (n - t)
    return out_arr


def pair_scores(colors, weights, counts, offsets, edges_i, edges_j, double radius):
    c_arr, w_arr, n_arr = _check_table(colors, weights, counts)
    cdef const double[:, :, ::1] c = c_arr
    cdef const double[:, ::1] w = w_arr
    cdef const int[::1] cnt = n_arr
    cdef const long long[::1] off = np.ascontiguousarray(offsets, dtype=np.int64)
    cdef const long long[::1] ei = np.ascontiguousarray(edges_i, dtype=np.int64)
    cdef const long long[::1] ej = np.ascontiguousarray(edges_j, dtype=np.int64)
    cdef Py_ssize_t m = ei.shape[0], e
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dis = np.zeros(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] mug = np.zeros(m, dtype=np.float64)
    cdef double[::1] dv = dis
    cdef double[::1] mv = mug
    cdef long long a, b, i, j, npairs
    cdef double s, lo, hi, v, r2 = radius * radius
    with nogil:
        for e in range(m):
            i = ei[e]
            j = ej[e]
            s = 0.0
            lo = 2.0
            hi = -1.0
            for a in range(off[i], off[i + 1]):
                for b in range(off[j], off[j + 1]):
                    v = _similarity(&c[a, 0, 0], &w[a, 0], cnt[a], &c[b, 0, 0], &w[b, 0], cnt[b], r2)
                    s += v
                    if v < lo:
                        lo = v
                    if v > hi:
                        hi = v
            npairs = (off[i + 1] - off[i]) * (off[j + 1] - off[j])
            dv[e] = s / npairs
            mv[e] = hi - lo
    return dis, mug


# ---------------------------------------------------------------- min-cost flow

cdef struct HeapItem:
    double key
    int node


cdef inline bint _hless(HeapItem* x, HeapItem* y) noexcept nogil:
    if x.key != y.key:
        return x.key < y.key
    return x.node < y.node


cdef void _hpush(HeapItem* h, int* size, double key, int node) noexcept nogil:
    cdef int i = size[0]
    cdef int parent
    cdef HeapItem item
    item.key = key
    item.node = node
    size[0] += 1
    while i > 0:
        parent = (i - 1) >> 1
        if _hless(&item, &h[parent]):
            h[i] = h[parent]
            i = parent
        else:
            break
    h[i] = item


cdef HeapItem _hpop(HeapItem* h, int* size) noexcept nogil:
    cdef HeapItem top = h[0]
    cdef HeapItem last
    cdef int n, i, child
    size[0] -= 1
    n = size[0]
    if n > 0:
        last = h[n]
        i = 0
        while True:
            child = 2 * i + 1
            if child >= n:
                break
            if child + 1 < n and _hless(&h[child + 1], &h[child]):
                child += 1
            if _hless(&h[child], &last):
                h[i] = h[child]
                i = child
            else:
                break
        h[i] = last
    return top


def min_cost_flow(int n_nodes, tails_in, heads_in, costs_in, int source, int sink, double stop_tol):
    cdef const long long[::1] tails = np.ascontiguousarray(tails_in, dtype=np.int64)
    cdef const long long[::1] heads = np.ascontiguousarray(heads_in, dtype=np.int64)
    cdef const double[::1] costs = np.ascontiguousarray(costs_in, dtype=np.float64)
    cdef Py_ssize_t n_arcs = tails.shape[0]
    cdef Py_ssize_t n_res = 2 * n_arcs
    cdef Py_ssize_t k, r, idx

    cdef cnp.ndarray[cnp.int8_t, ndim=1] cap_arr = np.zeros(n_res, dtype=np.int8)
    cdef signed char[::1] cap = cap_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] start_arr = np.zeros(n_nodes + 1, dtype=np.int64)
    cdef long long[::1] start = start_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] res_arr = np.zeros(max(n_res, 1), dtype=np.int64)
    cdef long long[::1] res = res_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] fill_arr = np.zeros(n_nodes, dtype=np.int64)
    cdef long long[::1] fill = fill_arr

    for k in range(n_arcs):
        if tails[k] < 0 or tails[k] >= n_nodes or heads[k] < 0 or heads[k] >= n_nodes:
            raise ValueError("arc endpoint out of range")
        cap[2 * k] = 1
        start[tails[k] + 1] += 1
        start[heads[k] + 1] += 1
    for k in range(n_nodes):
        start[k + 1] += start[k]
    # residual ids ascending per node, matching the sorted lists of the Python twin
    for r in range(n_res):
        k = r >> 1
        if r & 1 == 0:
            idx = tails[k]
        else:
            idx = heads[k]
        res[start[idx] + fill[idx]] = r
        fill[idx] += 1

    cdef cnp.ndarray[cnp.float64_t, ndim=1] pot_arr = np.full(n_nodes, INF, dtype=np.float64)
    cdef double[::1] pot = pot_arr
    cdef cnp.ndarray[cnp.float64_t, ndim=1] dist_arr = np.empty(n_nodes, dtype=np.float64)
    cdef double[::1] dist = dist_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] pred_arr = np.empty(n_nodes, dtype=np.int64)
    cdef long long[::1] pred = pred_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] indeg_arr = np.zeros(n_nodes, dtype=np.int64)
    cdef long long[::1] indeg = indeg_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] order_arr = np.zeros(n_nodes, dtype=np.int64)
    cdef long long[::1] order = order_arr

    cdef Py_ssize_t head_pos = 0, tail_pos = 0, u, v, e
    cdef double nd, d, pu, dv, dt, path_cost, rc
    for k in range(n_arcs):
        indeg[heads[k]] += 1
    for v in range(n_nodes):
        if indeg[v] == 0:
            order[tail_pos] = v
            tail_pos += 1
    while head_pos < tail_pos:
        u = order[head_pos]
        head_pos += 1
        for e in range(start[u], start[u + 1]):
            r = res[e]
            if r & 1 == 0:
                v = heads[r >> 1]
                indeg[v] -= 1
                if indeg[v] == 0:
                    order[tail_pos] = v
                    tail_pos += 1
    if tail_pos != n_nodes:
        raise ValueError("flow graph has a cycle")
    pot[source] = 0.0
    for idx in range(n_nodes):
        u = order[idx]
        if pot[u] == INF:
            continue
        for e in range(start[u], start[u + 1]):
            r = res[e]
            if r & 1 == 0:
                k = r >> 1
                nd = pot[u] + costs[k]
                if nd < pot[heads[k]]:
                    pot[heads[k]] = nd
    for v in range(n_nodes):
        if pot[v] == INF:
            pot[v] = 0.0

    cdef Py_ssize_t heap_cap = n_res + n_nodes + 1
    cdef HeapItem* heap = <HeapItem*> malloc(heap_cap * sizeof(HeapItem))
    cdef HeapItem* grown
    cdef int hsize
    cdef HeapItem item
    if heap == NULL:
        raise MemoryError()
    try:
        with nogil:
            while True:
                for v in range(n_nodes):
                    dist[v] = INF
                    pred[v] = -1
                dist[source] = 0.0
                hsize = 0
                _hpush(heap, &hsize, 0.0, source)
                while hsize > 0:
                    item = _hpop(heap, &hsize)
                    d = item.key
                    u = item.node
                    if d > dist[u]:
                        continue
                    pu = pot[u]
                    for e in range(start[u], start[u + 1]):
                        r = res[e]
                        if cap[r] == 0:
                            continue
                        if r & 1 == 0:
                            v = heads[r >> 1]
                            rc = costs[r >> 1]
                        else:
                            v = tails[r >> 1]
                            rc = -costs[r >> 1]
                        # clamp round-off so Dijkstra never sees a negative weight
                        rc = rc + pu - pot[v]
                        if rc < 0.0:
                            rc = 0.0
                        nd = d + rc
                        if nd < dist[v]:
                            dist[v] = nd
                            pred[v] = r
                            if hsize == heap_cap:
                                heap_cap *= 2
                                grown = <HeapItem*> realloc(heap, heap_cap * sizeof(HeapItem))
                                if grown == NULL:
                                    with gil:
                                        raise MemoryError()
                                heap = grown
                            _hpush(heap, &hsize, nd, <int> v)
                if dist[sink] == INF:
                    break
                path_cost = 0.0
                v = sink
                while v != source:
                    r = pred[v]
                    if r & 1 == 0:
                        path_cost += costs[r >> 1]
                        v = tails[r >> 1]
                    else:
                        path_cost += -costs[r >> 1]
                        v = heads[r >> 1]
                if not path_cost < -stop_tol:
                    break
                v = sink
                while v != source:
                    r = pred[v]
                    cap[r] -= 1
                    cap[r ^ 1] += 1
                    if r & 1 == 0:
                        v = tails[r >> 1]
                    else:
                        v = heads[r >> 1]
                dt = dist[sink]
                for v in range(n_nodes):
                    dv = dist[v]
                    pot[v] += dv if dv < dt else dt
    finally:
        free(heap)

    out = np.empty(n_arcs, dtype=np.int8)
    for k in range(n_arcs):
        out[k] = cap[2 * k + 1]
    return out
