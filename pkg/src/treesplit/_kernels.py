"""Compiled inner loops for tree sampling and split detection.

All kernels take a ``numpy.random.Generator`` and draw from it directly, so
results are a deterministic function of the generator state.
"""
from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def _uniform_index(rng, d):
    # floor(U * d) with U uniform on [0, 1) in steps of 2**-53
    return int(rng.random() * d)


@njit(cache=True, nogil=True)
def wilson_parents(indptr, indices, root, rng):
    """Parent pointers of a uniform spanning tree rooted at ``root`` (cycle popping)."""
    N = len(indptr) - 1
    in_tree = np.zeros(N, dtype=np.bool_)
    nxt = np.full(N, -1, dtype=np.int64)
    in_tree[root] = True
    for start in range(N):
        u = start
        while not in_tree[u]:
            lo = indptr[u]
            d = indptr[u + 1] - lo
            nxt[u] = indices[lo + _uniform_index(rng, d)]
            u = nxt[u]
        u = start
        while not in_tree[u]:
            in_tree[u] = True
            u = nxt[u]
    nxt[root] = -1
    return nxt


@njit(cache=True, nogil=True)
def child_first_order(parent, root):
    """Vertices ordered so every vertex precedes its parent (reverse BFS)."""
    N = len(parent)
    counts = np.zeros(N + 1, dtype=np.int64)
    for v in range(N):
        if v != root:
            counts[parent[v] + 1] += 1
    for v in range(N):
        counts[v + 1] += counts[v]
    fill = counts.copy()
    children = np.empty(max(N - 1, 0), dtype=np.int64)
    for v in range(N):
        if v != root:
            p = parent[v]
            children[fill[p]] = v
            fill[p] += 1
    bfs = np.empty(N, dtype=np.int64)
    bfs[0] = root
    head, tail = 0, 1
    while head < tail:
        u = bfs[head]
        head += 1
        for i in range(counts[u], counts[u + 1]):
            bfs[tail] = children[i]
            tail += 1
    if tail != N:
        raise ValueError("parent array is not a tree")
    return bfs[::-1].copy()


@njit(cache=True, nogil=True)
def prufer_decode(seq, N):
    """Decode a Pruefer sequence in linear time.

    Returns ``(parent, order)``: the tree rooted at ``N-1`` and a
    child-before-parent order (leaf removal order, root last).
    """
    parent = np.full(N, -1, dtype=np.int64)
    order = np.empty(N, dtype=np.int64)
    if N == 1:
        order[0] = 0
        return parent, order
    degree = np.ones(N, dtype=np.int64)
    for x in seq:
        degree[x] += 1
    ptr = 0
    while degree[ptr] != 1:
        ptr += 1
    leaf = ptr
    for i in range(N - 2):
        x = seq[i]
        parent[leaf] = x
        order[i] = leaf
        degree[x] -= 1
        if degree[x] == 1 and x < ptr:
            leaf = x
        else:
            ptr += 1
            while degree[ptr] != 1:
                ptr += 1
            leaf = ptr
    parent[leaf] = N - 1
    order[N - 2] = leaf
    order[N - 1] = N - 1
    return parent, order


@njit(cache=True, nogil=True)
def count_split_edges(parent, order, n):
    """Number of tree edges whose removal leaves sides that are multiples of ``n``."""
    N = len(parent)
    size = np.ones(N, dtype=np.int64)
    cut = 0
    for v in order:
        p = parent[v]
        if p >= 0:
            if size[v] % n == 0:
                cut += 1
            size[p] += size[v]
    return cut


@njit(cache=True, nogil=True)
def split_labels(parent, order, n, k, labels):
    """Fill ``labels`` with canonical block indices if the tree is k-splittable.

    Returns True on success. Blocks are numbered by smallest vertex. Block
    sizes are re-checked and a mismatch raises.
    """
    N = len(parent)
    size = np.ones(N, dtype=np.int64)
    cut = np.zeros(N, dtype=np.bool_)
    ncut = 0
    for v in order:
        p = parent[v]
        if p >= 0:
            if size[v] % n == 0:
                cut[v] = True
                ncut += 1
            size[p] += size[v]
    if ncut != k - 1:
        return False
    # walk root-first; a cut edge starts a new block
    raw = np.empty(N, dtype=np.int64)
    nblocks = 0
    for i in range(N - 1, -1, -1):
        v = order[i]
        p = parent[v]
        if p < 0 or cut[v]:
            raw[v] = nblocks
            nblocks += 1
        else:
            raw[v] = raw[p]
    remap = np.full(nblocks, -1, dtype=np.int64)
    counts = np.zeros(nblocks, dtype=np.int64)
    nxt = 0
    for v in range(N):
        r = raw[v]
        if remap[r] < 0:
            remap[r] = nxt
            nxt += 1
        labels[v] = remap[r]
        counts[remap[r]] += 1
    for b in range(nblocks):
        if counts[b] != n:
            raise AssertionError("split edges do not yield blocks of size n")
    return True


@njit(cache=True, nogil=True)
def tree_diameter(parent, order):
    N = len(parent)
    best1 = np.zeros(N, dtype=np.int64)
    best2 = np.zeros(N, dtype=np.int64)
    diam = 0
    for v in order:
        if best1[v] + best2[v] > diam:
            diam = best1[v] + best2[v]
        p = parent[v]
        if p >= 0:
            h = best1[v] + 1
            if h > best1[p]:
                best2[p] = best1[p]
                best1[p] = h
            elif h > best2[p]:
                best2[p] = h
    return diam


@njit(cache=True, nogil=True)
def random_prufer(N, rng):
    seq = np.empty(max(N - 2, 0), dtype=np.int64)
    for i in range(N - 2):
        seq[i] = _uniform_index(rng, N)
    return seq


@njit(cache=True, nogil=True)
def complete_split_trials(N, k, trials, rng, with_diameter):
    """Count k-splittable trees among ``trials`` uniform labeled trees on N vertices."""
    n = N // k
    hits = 0
    diam_sum = 0
    for _ in range(trials):
        parent, order = prufer_decode(random_prufer(N, rng), N)
        if count_split_edges(parent, order, n) == k - 1:
            hits += 1
        if with_diameter:
            diam_sum += tree_diameter(parent, order)
    return hits, diam_sum


@njit(cache=True, nogil=True)
def wilson_split_trials(indptr, indices, k, trials, rng, with_diameter):
    """Count k-splittable trees among ``trials`` uniform spanning trees of a fixed graph."""
    N = len(indptr) - 1
    n = N // k
    hits = 0
    diam_sum = 0
    for _ in range(trials):
        parent = wilson_parents(indptr, indices, 0, rng)
        order = child_first_order(parent, 0)
        if count_split_edges(parent, order, n) == k - 1:
            hits += 1
        if with_diameter:
            diam_sum += tree_diameter(parent, order)
    return hits, diam_sum


@njit(cache=True, nogil=True)
def wilson_split_batch(indptr, indices, k, trials, rng):
    """Algorithm-1 first stage for a batch of trees.

    Returns ``(ok, labels)``: which trees were k-splittable and, for those,
    the canonical block labels of the resulting partition.
    """
    N = len(indptr) - 1
    n = N // k
    ok = np.zeros(trials, dtype=np.bool_)
    labels = np.zeros((trials, N), dtype=np.int64)
    for t in range(trials):
        parent = wilson_parents(indptr, indices, 0, rng)
        order = child_first_order(parent, 0)
        ok[t] = split_labels(parent, order, n, k, labels[t])
    return ok, labels


@njit(cache=True, nogil=True)
def _find(par, v):
    while par[v] != v:
        par[v] = par[par[v]]
        v = par[v]
    return v


@njit(cache=True, nogil=True)
def forest_components(N, edges, in_forest, comp):
    """Write a component representative per vertex into ``comp``."""
    for v in range(N):
        comp[v] = v
    for e in range(len(edges)):
        if in_forest[e]:
            a = _find(comp, edges[e, 0])
            b = _find(comp, edges[e, 1])
            if a != b:
                comp[a] = b
    for v in range(N):
        comp[v] = _find(comp, v)


@njit(cache=True, nogil=True)
def _num_cross(edges, comp):
    c = 0
    for e in range(len(edges)):
        if comp[edges[e, 0]] != comp[edges[e, 1]]:
            c += 1
    return c


@njit(cache=True, nogil=True)
def _up_down_step(N, edges, in_forest, comp, scratch, rng, metropolis):
    # comp must describe in_forest on entry and is kept current on exit
    c = _num_cross(edges, comp)
    if c == 0:
        raise ValueError("no edge joins two components")
    r = _uniform_index(rng, c)
    added = -1
    for e in range(len(edges)):
        if comp[edges[e, 0]] != comp[edges[e, 1]]:
            if r == 0:
                added = e
                break
            r -= 1
    size = 1
    for e in range(len(edges)):
        if in_forest[e]:
            size += 1
    s = _uniform_index(rng, size)
    dropped = -1
    for e in range(len(edges)):
        if in_forest[e] or e == added:
            if s == 0:
                dropped = e
                break
            s -= 1
    if dropped == added:
        return
    in_forest[added] = True
    in_forest[dropped] = False
    forest_components(N, edges, in_forest, scratch)
    if metropolis:
        c_new = _num_cross(edges, scratch)
        if c_new > c and rng.random() * c_new >= c:
            in_forest[added] = False
            in_forest[dropped] = True
            return
    comp[:] = scratch


@njit(cache=True, nogil=True)
def up_down_trace(N, edges, in_forest, steps, rng, metropolis):
    """Run ``steps`` walk steps in place; return the forest edge bitmask after each (needs < 63 edges)."""
    comp = np.empty(N, dtype=np.int64)
    scratch = np.empty(N, dtype=np.int64)
    forest_components(N, edges, in_forest, comp)
    out = np.empty(steps, dtype=np.int64)
    for t in range(steps):
        _up_down_step(N, edges, in_forest, comp, scratch, rng, metropolis)
        mask = 0
        for e in range(len(edges)):
            if in_forest[e]:
                mask |= 1 << e
        out[t] = mask
    return out


@njit(cache=True, nogil=True)
def up_down_until_balanced(N, edges, in_forest, n, burn_in, interval, max_checks, rng, metropolis):
    """Walk in place; after ``burn_in`` steps test balance every ``interval`` steps.

    Returns True as soon as every component has ``n`` vertices.
    """
    comp = np.empty(N, dtype=np.int64)
    scratch = np.empty(N, dtype=np.int64)
    counts = np.zeros(N, dtype=np.int64)
    forest_components(N, edges, in_forest, comp)
    for _ in range(burn_in):
        _up_down_step(N, edges, in_forest, comp, scratch, rng, metropolis)
    for check in range(max_checks):
        counts[:] = 0
        for v in range(N):
            counts[comp[v]] += 1
        ok = True
        for v in range(N):
            if counts[v] != 0 and counts[v] != n:
                ok = False
                break
        if ok:
            return True
        if check + 1 < max_checks:
            for _ in range(interval):
                _up_down_step(N, edges, in_forest, comp, scratch, rng, metropolis)
    return False
