"""Compiled flat-array engine for the renormalization loop.

Mirrors the reference engine in sdrg.py term for term.  Clusters are
union-find roots over site indices; each live cluster keeps a singly
linked adjacency list in a shared pool.  A list node stores a neighbor
reference (resolved through union-find on the fly, so merges never walk
other clusters' lists) and the bond strength at the time it was written.
Because both update paths only ever raise a pair's strength, the live
strength of a bond is the maximum over list nodes resolving to that
neighbor, which also serves as the lazy-staleness check for heap entries:
an entry is live iff both ids are live roots and its key equals that
maximum.  Field entries are live iff the id is a live root whose current
field equals the key.

The heap is a manual array max-heap ordered by (key desc, bonds before
fields, ascending id pair), a total order, so the pop sequence does not
depend on insertion history.
"""

import numpy as np
from numba import njit

_NEG_INF = -np.inf


@njit(cache=True)
def _find(parent, i):
    root = i
    while parent[root] != root:
        root = parent[root]
    while parent[i] != root:
        nxt = parent[i]
        parent[i] = root
        i = nxt
    return root


@njit(cache=True)
def _prio_gt(k1, a1, b1, k2, a2, b2):
    if k1 != k2:
        return k1 > k2
    bond1 = a1 != b1
    bond2 = a2 != b2
    if bond1 != bond2:
        return bond1
    if a1 != a2:
        return a1 < a2
    return b1 < b2


@njit(cache=True)
def _sift_up(hkey, ha, hb, i):
    key = hkey[i]
    a = ha[i]
    b = hb[i]
    while i > 0:
        p = (i - 1) >> 1
        if _prio_gt(key, a, b, hkey[p], ha[p], hb[p]):
            hkey[i] = hkey[p]
            ha[i] = ha[p]
            hb[i] = hb[p]
            i = p
        else:
            break
    hkey[i] = key
    ha[i] = a
    hb[i] = b


@njit(cache=True)
def _sift_down(hkey, ha, hb, n, i):
    key = hkey[i]
    a = ha[i]
    b = hb[i]
    while True:
        c = 2 * i + 1
        if c >= n:
            break
        r = c + 1
        if r < n and _prio_gt(hkey[r], ha[r], hb[r], hkey[c], ha[c], hb[c]):
            c = r
        if _prio_gt(hkey[c], ha[c], hb[c], key, a, b):
            hkey[i] = hkey[c]
            ha[i] = ha[c]
            hb[i] = hb[c]
            i = c
        else:
            break
    hkey[i] = key
    ha[i] = a
    hb[i] = b


@njit(cache=True)
def _grow_i32(arr, need):
    cap = arr.shape[0]
    new_cap = cap + cap // 2 + 64
    if new_cap < need:
        new_cap = need + 64
    out = np.empty(new_cap, np.int32)
    out[:cap] = arr
    return out


@njit(cache=True)
def _grow_f64(arr, need):
    cap = arr.shape[0]
    new_cap = cap + cap // 2 + 64
    if new_cap < need:
        new_cap = need + 64
    out = np.empty(new_cap, np.float64)
    out[:cap] = arr
    return out


@njit(cache=True)
def _kernel(L, log_j, log_h, debug):
    n = L * L
    parent = np.arange(n, dtype=np.int32)
    mu = np.ones(n, dtype=np.int32)
    live = np.ones(n, dtype=np.uint8)
    lh = log_h.copy()
    label = np.full(n, -1, dtype=np.int32)
    seen = np.full(n, -1, dtype=np.int64)
    posidx = np.zeros(n, dtype=np.int32)

    pool_cap = 6 * n + 64
    nbr = np.empty(pool_cap, dtype=np.int32)
    pval = np.empty(pool_cap, dtype=np.float64)
    nxt = np.empty(pool_cap, dtype=np.int32)
    head = np.full(n, -1, dtype=np.int32)
    pool_n = 0

    heap_cap = 5 * n + 64
    hkey = np.empty(heap_cap, dtype=np.float64)
    ha = np.empty(heap_cap, dtype=np.int32)
    hb = np.empty(heap_cap, dtype=np.int32)
    heap_n = 0

    scr_cap = 1024
    sid = np.empty(scr_cap, dtype=np.int32)
    sval = np.empty(scr_cap, dtype=np.float64)

    # initial adjacency and heap content (2n bonds, n fields)
    for i in range(n):
        x = i % L
        y = i // L
        for d in range(2):
            if d == 0:
                j = (x + 1) % L + L * y
            else:
                j = x + L * ((y + 1) % L)
            v = log_j[2 * i + d]
            nbr[pool_n] = j
            pval[pool_n] = v
            nxt[pool_n] = head[i]
            head[i] = pool_n
            pool_n += 1
            nbr[pool_n] = i
            pval[pool_n] = v
            nxt[pool_n] = head[j]
            head[j] = pool_n
            pool_n += 1
            hkey[heap_n] = v
            if i < j:
                ha[heap_n] = i
                hb[heap_n] = j
            else:
                ha[heap_n] = j
                hb[heap_n] = i
            heap_n += 1
    for i in range(n):
        hkey[heap_n] = lh[i]
        ha[heap_n] = i
        hb[heap_n] = i
        heap_n += 1
    for i in range(heap_n // 2 - 1, -1, -1):
        _sift_down(hkey, ha, hb, heap_n, i)

    heap_peak = heap_n
    epoch = 0
    next_label = 0

    while heap_n > 0:
        key = hkey[0]
        a = ha[0]
        b = hb[0]
        heap_n -= 1
        if heap_n > 0:
            hkey[0] = hkey[heap_n]
            ha[0] = ha[heap_n]
            hb[0] = hb[heap_n]
            _sift_down(hkey, ha, hb, heap_n, 0)

        if a == b:
            # field entry: live iff a still a live root with this field value
            c = a
            if live[c] == 0 or parent[c] != c or lh[c] != key:
                continue

            # --- site decimation: freeze cluster c -----------------------
            label[c] = next_label
            next_label += 1
            live[c] = 0
            epoch += 1
            cnt = 0
            it = head[c]
            while it != -1:
                u = _find(parent, nbr[it])
                if u != c and live[u] == 1:
                    w = pval[it]
                    if seen[u] != epoch:
                        seen[u] = epoch
                        if cnt >= sid.shape[0]:
                            sid = _grow_i32(sid, cnt + 1)
                            sval = _grow_f64(sval, cnt + 1)
                        sid[cnt] = u
                        sval[cnt] = w
                        posidx[u] = cnt
                        cnt += 1
                    elif w > sval[posidx[u]]:
                        sval[posidx[u]] = w
                it = nxt[it]
            for xi in range(cnt):
                j = sid[xi]
                vj = sval[xi]
                for yi in range(xi + 1, cnt):
                    k = sid[yi]
                    cand = vj + sval[yi] - key
                    if debug and cand > key + 1e-12:
                        raise ValueError("generated bond exceeds the decimated field")
                    if pool_n + 2 > nbr.shape[0]:
                        nbr = _grow_i32(nbr, pool_n + 2)
                        pval = _grow_f64(pval, pool_n + 2)
                        nxt = _grow_i32(nxt, pool_n + 2)
                    nbr[pool_n] = k
                    pval[pool_n] = cand
                    nxt[pool_n] = head[j]
                    head[j] = pool_n
                    pool_n += 1
                    nbr[pool_n] = j
                    pval[pool_n] = cand
                    nxt[pool_n] = head[k]
                    head[k] = pool_n
                    pool_n += 1
                    if heap_n >= hkey.shape[0]:
                        hkey = _grow_f64(hkey, heap_n + 1)
                        ha = _grow_i32(ha, heap_n + 1)
                        hb = _grow_i32(hb, heap_n + 1)
                    hkey[heap_n] = cand
                    if j < k:
                        ha[heap_n] = j
                        hb[heap_n] = k
                    else:
                        ha[heap_n] = k
                        hb[heap_n] = j
                    heap_n += 1
                    _sift_up(hkey, ha, hb, heap_n - 1)
            if heap_n > heap_peak:
                heap_peak = heap_n
            continue

        # bond entry: live iff both ids live roots and key equals the
        # current strength (max over a's nodes resolving to b)
        if live[a] == 0 or parent[a] != a or live[b] == 0 or parent[b] != b:
            continue
        cur = _NEG_INF
        it = head[a]
        while it != -1:
            if _find(parent, nbr[it]) == b and pval[it] > cur:
                cur = pval[it]
            it = nxt[it]
        if cur != key:
            continue

        # --- bond decimation: merge clusters a and b ---------------------
        new_lh = lh[a] + lh[b] - key
        if debug and new_lh > key + 1e-12:
            raise ValueError("generated field exceeds the decimated bond")
        if mu[a] > mu[b] or (mu[a] == mu[b] and a < b):
            win = a
            lose = b
        else:
            win = b
            lose = a
        mu[win] = mu[a] + mu[b]
        parent[lose] = win
        live[lose] = 0
        lh[win] = new_lh

        epoch += 1
        cnt = 0
        for s in range(2):
            it = head[a] if s == 0 else head[b]
            while it != -1:
                u = _find(parent, nbr[it])
                if u != win and live[u] == 1:
                    w = pval[it]
                    if seen[u] != epoch:
                        seen[u] = epoch
                        if cnt >= sid.shape[0]:
                            sid = _grow_i32(sid, cnt + 1)
                            sval = _grow_f64(sval, cnt + 1)
                        sid[cnt] = u
                        sval[cnt] = w
                        posidx[u] = cnt
                        cnt += 1
                    elif w > sval[posidx[u]]:
                        sval[posidx[u]] = w
                it = nxt[it]

        # rebuild the winner's list compacted; re-announce all its bonds
        head[win] = -1
        if pool_n + cnt > nbr.shape[0]:
            nbr = _grow_i32(nbr, pool_n + cnt)
            pval = _grow_f64(pval, pool_n + cnt)
            nxt = _grow_i32(nxt, pool_n + cnt)
        while heap_n + cnt + 1 > hkey.shape[0]:
            hkey = _grow_f64(hkey, heap_n + cnt + 1)
            ha = _grow_i32(ha, heap_n + cnt + 1)
            hb = _grow_i32(hb, heap_n + cnt + 1)
        for xi in range(cnt):
            u = sid[xi]
            w = sval[xi]
            nbr[pool_n] = u
            pval[pool_n] = w
            nxt[pool_n] = head[win]
            head[win] = pool_n
            pool_n += 1
            hkey[heap_n] = w
            if win < u:
                ha[heap_n] = win
                hb[heap_n] = u
            else:
                ha[heap_n] = u
                hb[heap_n] = win
            heap_n += 1
            _sift_up(hkey, ha, hb, heap_n - 1)
        hkey[heap_n] = new_lh
        ha[heap_n] = win
        hb[heap_n] = win
        heap_n += 1
        _sift_up(hkey, ha, hb, heap_n - 1)
        if heap_n > heap_peak:
            heap_peak = heap_n

    labels = np.empty(n, dtype=np.int32)
    for i in range(n):
        labels[i] = label[_find(parent, i)]
    return labels, pool_n, heap_peak, next_label


def run(L, bonds, fields, debug=False):
    """Run the compiled engine; returns (labels, stats)."""
    log_j = np.log(bonds)
    log_h = np.log(fields)
    labels, pool_used, heap_peak, n_clusters = _kernel(L, log_j, log_h, bool(debug))
    stats = {"pool_used": int(pool_used), "heap_peak": int(heap_peak),
             "n_clusters": int(n_clusters)}
    return labels, stats
