"""Brute-force ground truth for small graphs, plus closed-form counts on K_N.

Everything here enumerates explicitly and is kept independent of the
sampling code paths it is used to check.
"""
from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, product
from typing import Iterable, Iterator, Sequence

from .counting import count_spanning_trees, partition_weight
from .graph import Graph, GraphError, Partition, make_complete
from .lattice import cycle_partitions, make_slack_gadget
from .split import find_balanced_split, is_balanced
from .ust import SpanningTree, prufer_to_parent

MAX_LABELED_TREE_N = 10
MAX_TREES = 10**6
MAX_PARTITION_VERTICES = 30


@dataclass(frozen=True)
class SplitCensus:
    total_trees: int
    splittable_trees: int

    @property
    def probability(self) -> Fraction:
        return Fraction(self.splittable_trees, self.total_trees)


# -- trees ------------------------------------------------------------------------

def enumerate_labeled_trees(N: int, host: Graph | None = None) -> Iterator[SpanningTree]:
    """Every labeled tree on ``N`` vertices, once each, via Pruefer sequences."""
    if not 2 <= N <= MAX_LABELED_TREE_N:
        raise GraphError(f"labeled-tree enumeration supports 2 <= N <= {MAX_LABELED_TREE_N}")
    if host is None:
        from .ust import _complete
        host = _complete(N)
    elif host.num_vertices != N or not host.is_complete():
        raise GraphError("host must be the complete graph on N vertices")
    for seq in product(range(N), repeat=N - 2):
        yield SpanningTree(host, prufer_to_parent(seq, N), N - 1)


class _DSU:
    def __init__(self, n: int):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.history: list[tuple[int, int, int]] = []

    def find(self, x: int) -> int:
        while self.parent[x] != x:
            x = self.parent[x]
        return x

    def union(self, a: int, b: int) -> bool:
        a, b = self.find(a), self.find(b)
        if a == b:
            return False
        if self.rank[a] < self.rank[b]:
            a, b = b, a
        self.history.append((b, a, self.rank[a]))
        self.parent[b] = a
        if self.rank[a] == self.rank[b]:
            self.rank[a] += 1
        return True

    def undo(self) -> None:
        b, a, r = self.history.pop()
        self.parent[b] = b
        self.rank[a] = r


def _spans(N: int, edges: Iterable[tuple[int, int]]) -> bool:
    d = _DSU(N)
    comps = N
    for u, v in edges:
        if d.union(u, v):
            comps -= 1
    return comps <= 1


def enumerate_spanning_trees(g: Graph, limit: int = MAX_TREES) -> Iterator[SpanningTree]:
    """Every spanning tree of ``g`` once, by include/exclude backtracking over edges."""
    N, M = g.num_vertices, g.num_edges
    total = count_spanning_trees(g)
    if total > limit:
        raise GraphError(f"{total} spanning trees exceeds the enumeration limit {limit}")
    if total == 0:
        return
    edges = g.edges
    dsu = _DSU(N)
    chosen: list[int] = []

    def rec(i: int) -> Iterator[list[int]]:
        need = N - 1 - len(chosen)
        if need == 0:
            yield list(chosen)
            return
        if M - i < need:
            return
        u, v = edges[i]
        if dsu.union(u, v):
            chosen.append(i)
            yield from rec(i + 1)
            chosen.pop()
            dsu.undo()
        # skipping edge i must leave the rest able to span
        if _spans(N, [edges[j] for j in chosen] + list(edges[i + 1:])):
            yield from rec(i + 1)

    if N == 1:
        yield SpanningTree(g, [-1], 0)
        return
    for ids in rec(0):
        yield SpanningTree.from_edges(g, ids)


def count_by_deletion_contraction(g: Graph) -> int:
    """Spanning-tree count from the recurrence ``tau(G) = tau(G - e) + m(e) tau(G / e)``."""
    edges = Counter(g.edges)
    return _dc(g.num_vertices, _freeze(g.num_vertices, edges))


def _freeze(n: int, edges: Counter) -> tuple:
    return tuple(sorted(edges.items()))


@lru_cache(maxsize=200_000)
def _dc(n: int, frozen: tuple) -> int:
    if n == 1:
        return 1
    if not frozen:
        return 0
    edges = dict(frozen)
    nbrs: dict[int, set[int]] = {v: set() for v in range(n)}
    for u, v in edges:
        nbrs[u].add(v)
        nbrs[v].add(u)
    # disconnected graphs have no spanning trees
    seen, stack = {0}, [0]
    while stack:
        for w in nbrs[stack.pop()]:
            if w not in seen:
                seen.add(w)
                stack.append(w)
    if len(seen) < n:
        return 0
    for v in range(n):
        if len(nbrs[v]) == 1:
            (w,) = nbrs[v]
            m = edges[(min(v, w), max(v, w))]
            rest = {e: c for e, c in edges.items() if v not in e}
            return m * _dc(*_relabel(n, rest, drop=v))
    (u, v), m = frozen[0]
    deleted = {e: c for e, c in edges.items() if e != (u, v)}
    contracted: Counter = Counter()
    for (a, b), c in edges.items():
        a, b = (u if a == v else a), (u if b == v else b)
        if a != b:
            contracted[(min(a, b), max(a, b))] += c
    return _dc(n, _freeze(n, Counter(deleted))) + m * _dc(*_relabel(n, contracted, drop=v))


def _relabel(n: int, edges: dict, drop: int) -> tuple[int, tuple]:
    def f(x: int) -> int:
        return x - 1 if x > drop else x
    out: Counter = Counter()
    for (a, b), c in edges.items():
        out[(f(a), f(b))] += c
    return n - 1, _freeze(n - 1, out)


# -- partitions --------------------------------------------------------------------

def _masks(g: Graph) -> list[int]:
    out = [0] * g.num_vertices
    for u, v in g.edges:
        out[u] |= 1 << v
        out[v] |= 1 << u
    return out


def _connected_sets(nbr: list[int], root: int, size: int, allowed: int) -> Iterator[int]:
    """Connected vertex sets (bitmasks) of the given size containing ``root``, each once."""

    def rec(cur: int, count: int, ext: int, banned: int) -> Iterator[int]:
        if count == size:
            yield cur
            return
        while ext:
            bit = ext & -ext
            ext ^= bit
            v = bit.bit_length() - 1
            grown = ext | (nbr[v] & allowed & ~cur & ~banned & ~bit)
            yield from rec(cur | bit, count + 1, grown, banned)
            banned |= bit

    start = 1 << root
    yield from rec(start, 1, nbr[root] & allowed & ~start, 0)


def _components(nbr: list[int], mask: int) -> list[int]:
    comps = []
    while mask:
        seed = mask & -mask
        comp, frontier = seed, seed
        while frontier:
            bit = frontier & -frontier
            frontier ^= bit
            new = nbr[bit.bit_length() - 1] & mask & ~comp
            comp |= new
            frontier |= new
        comps.append(comp)
        mask &= ~comp
    return comps


def _subset_sums(sizes: Sequence[int]) -> set[int]:
    sums = {0}
    for s in sizes:
        sums |= {x + s for x in sums}
    return sums


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        bit = mask & -mask
        out.append(bit.bit_length() - 1)
        mask ^= bit
    return out


def enumerate_connected_partitions(g: Graph, sizes: Sequence[int],
                                   max_vertices: int = MAX_PARTITION_VERTICES) -> Iterator[Partition]:
    """Every partition of ``g`` into connected blocks with the given size multiset."""
    N = g.num_vertices
    if sum(sizes) != N or any(s < 1 for s in sizes):
        raise GraphError("block sizes must be positive and sum to N")
    if N > max_vertices:
        raise GraphError(f"N={N} exceeds the partition-enumeration limit {max_vertices}")
    nbr = _masks(g)

    def feasible(mask: int, remaining: tuple[int, ...]) -> bool:
        sums = _subset_sums(remaining)
        return all(bin(c).count("1") in sums for c in _components(nbr, mask))

    def rec(unassigned: int, remaining: tuple[int, ...], blocks: list[int]) -> Iterator[list[int]]:
        if not unassigned:
            yield blocks
            return
        root = (unassigned & -unassigned).bit_length() - 1
        for s in sorted(set(remaining)):
            rest_sizes = list(remaining)
            rest_sizes.remove(s)
            rest_t = tuple(rest_sizes)
            for block in _connected_sets(nbr, root, s, unassigned):
                left = unassigned & ~block
                if feasible(left, rest_t):
                    yield from rec(left, rest_t, blocks + [block])

    for blocks in rec((1 << N) - 1, tuple(sorted(sizes)), []):
        yield Partition(_bits(b) for b in blocks)


def enumerate_forests(g: Graph, k: int, limit: int = MAX_TREES) -> Iterator[frozenset[int]]:
    """Edge sets of all spanning forests of ``g`` with exactly ``k`` components."""
    N, M = g.num_vertices, g.num_edges
    r = N - k
    if r < 0:
        raise GraphError("k exceeds N")
    if math.comb(M, r) > limit:
        raise GraphError("too many edge subsets to enumerate")
    for ids in combinations(range(M), r):
        d = _DSU(N)
        if all(d.union(*g.edges[i]) for i in ids):
            yield frozenset(ids)


def partitions_with_sizes_in(N: int, k: int, lo: int, hi: int) -> list[tuple[int, ...]]:
    """Size multisets (sorted) of ``k`` blocks in ``[lo, hi]`` summing to ``N``."""
    out = []

    def rec(prefix: list[int], left: int, start: int) -> None:
        if len(prefix) == k:
            if left == 0:
                out.append(tuple(prefix))
            return
        for s in range(start, hi + 1):
            if s > left:
                break
            rec(prefix + [s], left - s, s)

    rec([], N, max(lo, 1))
    return out


def weight_distribution(g: Graph, partitions: Iterable[Partition]) -> dict[Partition, Fraction]:
    """Normalize spanning-tree weights over the given partitions."""
    weights = {p: partition_weight(g, p) for p in partitions}
    total = sum(weights.values())
    if total == 0:
        raise GraphError("no partition with positive weight")
    return {p: Fraction(w, total) for p, w in weights.items()}


def balanced_partition_distribution(g: Graph, k: int) -> dict[Partition, Fraction]:
    """Exact target law of the balanced samplers: weight-proportional over balanced k-partitions."""
    if g.num_vertices % k:
        raise GraphError("N must be divisible by k")
    return weight_distribution(g, enumerate_connected_partitions(g, [g.num_vertices // k] * k))


def slack_partition_distribution(g: Graph, k: int, n: int, slack: int) -> dict[Partition, Fraction]:
    parts = []
    for sizes in partitions_with_sizes_in(g.num_vertices, k, n - slack, n + slack):
        parts.extend(enumerate_connected_partitions(g, sizes))
    return weight_distribution(g, parts)


def all_k_partitions_weight(g: Graph, k: int) -> int:
    """Total spanning-tree weight of all connected k-partitions (any block sizes)."""
    total = 0
    for sizes in partitions_with_sizes_in(g.num_vertices, k, 1, g.num_vertices):
        total += sum(partition_weight(g, p) for p in enumerate_connected_partitions(g, sizes))
    return total


# -- splittability -------------------------------------------------------------------

def brute_force_split_sets(t: SpanningTree, k: int) -> list[frozenset[int]]:
    """All sets of ``k - 1`` tree edges whose removal leaves ``k`` blocks of equal size."""
    N = t.num_vertices
    if N % k:
        raise GraphError("N must be divisible by k")
    n = N // k
    tree_edges = sorted(t.edge_ids)
    host_edges = t.host.edges
    found = []
    for cut in combinations(tree_edges, k - 1):
        removed = set(cut)
        d = _DSU(N)
        for i in tree_edges:
            if i not in removed:
                d.union(*host_edges[i])
        if all(c == n for c in Counter(d.find(v) for v in range(N)).values()):
            found.append(frozenset(cut))
    return found


def exact_split_census(g: Graph, k: int, cross_check: bool = True) -> SplitCensus:
    """Exact count of k-splittable spanning trees of ``g``.

    With ``cross_check`` every tree is also tested by exhaustive subset search,
    and any disagreement raises.
    """
    if g.num_vertices % k:
        raise GraphError("N must be divisible by k")
    if g.is_complete() and 2 <= g.num_vertices <= MAX_LABELED_TREE_N:
        trees = enumerate_labeled_trees(g.num_vertices, host=g)
    else:
        trees = enumerate_spanning_trees(g)
    total = hits = 0
    for t in trees:
        total += 1
        split = find_balanced_split(t, k)
        if cross_check:
            brute = brute_force_split_sets(t, k)
            if len(brute) > 1 or (split is None) != (not brute) or (split is not None and split != brute[0]):
                raise AssertionError(f"split detection disagrees with brute force on {t!r}")
        hits += split is not None
    return SplitCensus(total, hits)


def splittable_count_formula(n: int, k: int) -> int:
    """Number of k-splittable labeled trees on ``N = k n`` vertices.

    Ways to choose the balanced partition, times trees inside the blocks,
    times trees on the quotient, times ``n^2`` endpoint choices per crossing edge.
    """
    if n < 1 or k < 1:
        raise GraphError("n and k must be positive")
    N = n * k
    parts = math.factorial(N) // (math.factorial(n) ** k * math.factorial(k))
    return parts * _cayley(n) ** k * _cayley(k) * n ** (2 * (k - 1))


def _cayley(m: int) -> int:
    return 1 if m <= 2 else m ** (m - 2)


def split_size_weight_histogram(N: int) -> list[tuple[int, int]]:
    """Total weight of the unordered 2-partitions of ``K_N`` with block sizes ``(i, N - i)``."""
    if N < 2:
        raise GraphError("N must be >= 2")
    out = []
    for i in range(1, N // 2 + 1):
        w = math.comb(N, i) * _cayley(i) * _cayley(N - i)
        if 2 * i == N:
            w //= 2
        out.append((i, w))
    return out


# -- slack gadget -----------------------------------------------------------------------

GADGET_EXHAUSTIVE_MAX_N = 14


def gadget_balanced_partitions(n: int, exhaustive: bool | None = None) -> list[Partition]:
    """The ``n`` balanced 3-partitions of the slack gadget, cut from its Hamiltonian cycle.

    Each candidate is validated as connected and balanced. With ``exhaustive``
    (default for ``n <= GADGET_EXHAUSTIVE_MAX_N``) every connected balanced
    partition is enumerated and the two sets must coincide.
    """
    gadget = make_slack_gadget(n)
    g = gadget.graph
    parts = cycle_partitions(gadget)
    for p in parts:
        p.validate(g)
        if not is_balanced(p, n):
            raise AssertionError("cycle cut is not balanced")
    if len(set(parts)) != n:
        raise AssertionError("cycle cuts are not distinct")
    if exhaustive is None:
        exhaustive = n <= GADGET_EXHAUSTIVE_MAX_N
    if exhaustive:
        found = set(enumerate_connected_partitions(g, [n] * 3, max_vertices=3 * n))
        if found != set(parts):
            raise AssertionError(f"gadget n={n} has {len(found)} balanced partitions, not the {n} cycle cuts")
    else:
        _check_ladders_cycle_aligned(gadget)
    return parts


def _check_ladders_cycle_aligned(gadget) -> None:
    """Ladder-by-ladder form of the cycle-alignment argument.

    Ladders are shorter than ``n``, so a piece meeting a ladder must leave it
    through one of the two hexagon vertices the ladder hangs from. Inside the
    window (anchor, ladder, anchor) that leaves two connected sides, one per
    anchor. Every such split must cut the window's Hamiltonian path once.
    """
    g, n = gadget.graph, gadget.n
    N = g.num_vertices
    for name, ladder in gadget.ladders.items():
        if len(ladder) >= n:
            raise AssertionError(f"ladder {name} is not shorter than n")
        window = [(ladder[0] - 1) % N, *ladder, (ladder[-1] + 1) % N]
        where = {v: i for i, v in enumerate(window)}
        for v in ladder:
            if any(w not in where for w in g.adjacency[v]):
                raise AssertionError(f"ladder {name} has an exit besides its anchors")
        nbr = [0] * len(window)
        for i, v in enumerate(window):
            for w in g.adjacency[v]:
                if w in where:
                    nbr[i] |= 1 << where[w]
        for side in _two_sided_cuts(nbr, len(window)):
            if side & (side + 1):
                raise AssertionError(f"ladder {name} admits a cut off the Hamiltonian cycle")


def _two_sided_cuts(nbr: list[int], size: int) -> Iterator[int]:
    """Sets X containing vertex 0 with X and its complement both connected and
    the complement containing vertex ``size - 1``."""
    full = (1 << size) - 1
    target = 1 << (size - 1)

    def reach(mask: int) -> int:
        comp, frontier = target, target
        while frontier:
            bit = frontier & -frontier
            frontier ^= bit
            new = nbr[bit.bit_length() - 1] & mask & ~comp
            comp |= new
            frontier |= new
        return comp

    def rec(cur: int, ext: int, banned: int) -> Iterator[int]:
        reachable = reach(full & ~cur)
        if banned & ~reachable:
            return
        if reachable == full & ~cur:
            yield cur
        while ext:
            bit = ext & -ext
            ext ^= bit
            grown = ext | (nbr[bit.bit_length() - 1] & ~cur & ~banned & ~bit & ~target)
            yield from rec(cur | bit, grown, banned)
            banned |= bit
            if banned & ~reachable:
                return

    yield from rec(1, nbr[0] & ~1 & ~target, 0)


def split_size_histogram_by_enumeration(N: int, limit: int = MAX_TREES) -> list[tuple[int, int]]:
    """Two-component spanning forests of ``K_N`` counted by the smaller component size."""
    g = make_complete(N)
    hist = Counter()
    for ids in enumerate_forests(g, 2, limit):
        d = _DSU(N)
        for i in ids:
            d.union(*g.edges[i])
        side = sum(1 for v in range(N) if d.find(v) == d.find(0))
        hist[min(side, N - side)] += 1
    return [(i, hist[i]) for i in range(1, N // 2 + 1)]


# -- ReCom ground truth -----------------------------------------------------------------

def _adjacent_blocks(g: Graph, a: Sequence[int], b: Sequence[int]) -> bool:
    sb = set(b)
    return any(w in sb for v in a for w in g.adjacency[v])


def recom_neighbors(g: Graph, p: Partition, n: int, slack: int = 0) -> set[Partition]:
    """Every partition other than ``p`` that one ReCom step could produce.

    For each adjacent pair of blocks, all connected 2-partitions of their union
    with both sides in ``[n - slack, n + slack]`` are enumerated directly.
    """
    out = set()
    for i, j in combinations(range(len(p)), 2):
        a, b = p.blocks[i], p.blocks[j]
        if not _adjacent_blocks(g, a, b):
            continue
        sub, keep = g.subgraph(list(a) + list(b))
        rest = [blk for t, blk in enumerate(p.blocks) if t not in (i, j)]
        m = sub.num_vertices
        for s in range(max(n - slack, 1), m // 2 + 1):
            if not (n - slack <= m - s <= n + slack and s <= n + slack):
                continue
            for q in enumerate_connected_partitions(sub, [s, m - s], max_vertices=max(MAX_PARTITION_VERTICES, m)):
                new = Partition(rest + [[keep[v] for v in blk] for blk in q.blocks])
                if new != p:
                    out.add(new)
    return out


def recom_transition_row(g: Graph, p: Partition, n: int, slack: int, candidate_bound) -> dict[Partition, Fraction]:
    """Exact one-step law of reversible ReCom from ``p`` by enumerating every spanning tree.

    ``candidate_bound(total, n, slack)`` is the chain's constant ``B``; the
    split edge is uniform among valid ones and accepted with ``c / (B * E)``.
    """
    pairs = list(combinations(range(len(p)), 2))
    row: Counter = Counter()
    for i, j in pairs:
        w = Fraction(1, len(pairs))
        a, b = p.blocks[i], p.blocks[j]
        if not _adjacent_blocks(g, a, b):
            row[p] += w
            continue
        sub, keep = g.subgraph(list(a) + list(b))
        m = sub.num_vertices
        rest = [blk for t, blk in enumerate(p.blocks) if t not in (i, j)]
        trees = list(enumerate_spanning_trees(sub))
        bound = candidate_bound(m, n, slack)
        for t in trees:
            sides = []
            for e in t.edge_ids:
                d = _DSU(m)
                for f in t.edge_ids - {e}:
                    d.union(*sub.edges[f])
                side = [v for v in range(m) if d.find(v) == d.find(0)]
                other = [v for v in range(m) if d.find(v) != d.find(0)]
                if all(n - slack <= len(x) <= n + slack for x in (side, other)):
                    sides.append((side, other))
            wt = w / len(trees)
            if not sides:
                row[p] += wt
                continue
            for side, other in sides:
                s = set(side)
                crossing = sum(1 for u, v in sub.edges if (u in s) != (v in s))
                acc = Fraction(len(sides), bound * crossing)
                if acc > 1:
                    raise AssertionError("candidate bound below the candidate count")
                new = Partition(rest + [[keep[v] for v in side], [keep[v] for v in other]])
                row[new] += wt / len(sides) * acc
                row[p] += wt / len(sides) * (1 - acc)
    return dict(row)
