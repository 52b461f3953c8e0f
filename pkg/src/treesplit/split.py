"""Split detection on spanning trees, forests and balance predicates."""
from __future__ import annotations

from collections import deque
from functools import cached_property
from typing import Iterable

import numpy as np

from .graph import Graph, GraphError, Partition
from .ust import SpanningTree


class Forest:
    """Spanning forest of ``host`` given by a set of host edge indices.

    Isolated vertices count as components of size one, so a forest with
    ``c`` components on ``N`` vertices has ``N - c`` edges.
    """

    def __init__(self, host: Graph, edge_ids: Iterable[int]):
        self.host = host
        self.edge_ids = frozenset(int(i) for i in edge_ids)
        if len(self.edge_ids) + self.num_components != host.num_vertices:
            raise GraphError("edge set contains a cycle")

    @cached_property
    def labels(self) -> np.ndarray:
        """Component index per vertex, components numbered by smallest vertex."""
        N = self.host.num_vertices
        nbrs: list[list[int]] = [[] for _ in range(N)]
        for i in self.edge_ids:
            u, v = self.host.edges[i]
            nbrs[u].append(v)
            nbrs[v].append(u)
        lab = np.full(N, -1, dtype=np.int64)
        c = 0
        for s in range(N):
            if lab[s] >= 0:
                continue
            lab[s] = c
            queue = deque([s])
            while queue:
                u = queue.popleft()
                for w in nbrs[u]:
                    if lab[w] < 0:
                        lab[w] = c
                        queue.append(w)
            c += 1
        return lab

    @property
    def num_components(self) -> int:
        return int(self.labels.max()) + 1 if self.host.num_vertices else 0

    @cached_property
    def sizes(self) -> np.ndarray:
        return np.bincount(self.labels, minlength=self.num_components)

    def partition(self) -> Partition:
        return Partition.from_labels(self.labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Forest):
            return NotImplemented
        return self.host == other.host and self.edge_ids == other.edge_ids

    def __hash__(self) -> int:
        return hash(self.edge_ids)

    def __repr__(self) -> str:
        return f"<Forest components={self.num_components} edges={sorted(self.edge_ids)}>"


def _oriented(t: SpanningTree, root: int) -> tuple[list[int], list[int]]:
    """Parent list and root-first BFS order for ``t`` rooted at ``root``."""
    if root == t.root:
        return [int(p) for p in t.parent], [int(v) for v in t.order[::-1]]
    nbrs = t.neighbors()
    parent = [-2] * t.num_vertices
    parent[root] = -1
    order = [root]
    for u in order:
        for w in nbrs[u]:
            if parent[w] == -2:
                parent[w] = u
                order.append(w)
    return parent, order


def subtree_sizes(t: SpanningTree, root: int | None = None) -> list[int]:
    """``size[v]`` is the number of vertices in the subtree of ``v`` when rooted at ``root``."""
    parent, order = _oriented(t, t.root if root is None else root)
    size = [1] * t.num_vertices
    for v in reversed(order):
        if parent[v] >= 0:
            size[parent[v]] += size[v]
    return size


def find_balanced_split(t: SpanningTree, k: int) -> frozenset[int] | None:
    """The unique set of ``k - 1`` tree edges leaving ``k`` blocks of size ``N/k``.

    Every tree edge whose removal leaves two sides with sizes divisible by
    ``n = N/k`` is collected; the set is returned only when exactly ``k - 1``
    edges qualify. The block sizes of the result are re-checked.
    """
    N = t.num_vertices
    if k < 1 or N % k:
        raise GraphError(f"N={N} is not divisible by k={k}")
    n = N // k
    parent, order = _oriented(t, t.root)
    size = [1] * N
    picked = []
    for v in reversed(order):
        p = parent[v]
        if p >= 0:
            if size[v] % n == 0:
                picked.append(t.host.edge_id(v, p))
            size[p] += size[v]
    if len(picked) != k - 1:
        return None
    split = frozenset(picked)
    if any(s != n for s in apply_split(t, split).sizes):
        raise AssertionError("balanced-split edges produced unequal blocks")
    return split


def apply_split(t: SpanningTree, split: Iterable[int]) -> Partition:
    """Partition into the components of ``t`` minus the given edges."""
    removed = frozenset(split)
    if not removed <= t.edge_ids:
        raise GraphError("split edges must belong to the tree")
    return Forest(t.host, t.edge_ids - removed).partition()


def is_balanced(p: Partition, n: int) -> bool:
    return all(len(b) == n for b in p.blocks)


def is_slack_balanced(p: Partition, n: int, s: int) -> bool:
    return all(n - s <= len(b) <= n + s for b in p.blocks)


def find_two_split_edges_with_slack(t: SpanningTree, n: int, s: int) -> list[int]:
    """Tree edges whose removal leaves two sides with sizes in ``[n - s, n + s]``.

    With ``s = 0`` on ``2n`` vertices at most one edge qualifies.
    """
    N = t.num_vertices
    size = subtree_sizes(t)
    out = []
    for v, p in enumerate(t.parent):
        if p >= 0 and n - s <= size[v] <= n + s and n - s <= N - size[v] <= n + s:
            out.append(t.host.edge_id(v, int(p)))
    return sorted(out)
