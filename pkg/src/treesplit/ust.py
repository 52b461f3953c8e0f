"""Uniform spanning trees: Wilson's algorithm and uniform labeled trees."""
from __future__ import annotations

from collections import deque
from functools import cached_property, lru_cache
from typing import Sequence

import numpy as np

from . import _kernels
from .graph import Graph, GraphError, make_complete

RngStream = np.random.Generator


def make_rng(seed: int | Sequence[int]) -> RngStream:
    return np.random.default_rng(np.random.SeedSequence(seed))


def derive_rng(seed: int, *keys: int) -> RngStream:
    """Independent stream for ``keys`` (e.g. a block or trial index) under ``seed``."""
    return np.random.default_rng(np.random.SeedSequence([seed, *keys]))


class SpanningTree:
    """Spanning tree of ``host`` stored as parent pointers toward ``root``."""

    def __init__(self, host: Graph, parent: Sequence[int] | np.ndarray, root: int):
        parent = np.asarray(parent, dtype=np.int64)
        if len(parent) != host.num_vertices:
            raise GraphError("parent array does not match host")
        if host.num_vertices and parent[root] != -1:
            raise GraphError("root must have parent -1")
        parent.setflags(write=False)
        self.host = host
        self.parent = parent
        self.root = root

    @classmethod
    def from_edges(cls, host: Graph, edge_ids: Sequence[int], root: int = 0) -> SpanningTree:
        """Build from host edge indices; raises unless they form a spanning tree."""
        N = host.num_vertices
        ids = sorted(set(int(i) for i in edge_ids))
        if len(ids) != max(N - 1, 0):
            raise GraphError(f"a spanning tree of N={N} needs {N - 1} edges, got {len(ids)}")
        nbrs: list[list[int]] = [[] for _ in range(N)]
        for i in ids:
            u, v = host.edges[i]
            nbrs[u].append(v)
            nbrs[v].append(u)
        parent = [-2] * N
        parent[root] = -1
        queue = deque([root])
        while queue:
            u = queue.popleft()
            for w in nbrs[u]:
                if parent[w] == -2:
                    parent[w] = u
                    queue.append(w)
        if -2 in parent:
            raise GraphError("edges do not span the graph")
        return cls(host, parent, root)

    @property
    def num_vertices(self) -> int:
        return len(self.parent)

    @cached_property
    def edge_ids(self) -> frozenset[int]:
        return frozenset(self.host.edge_id(v, int(p)) for v, p in enumerate(self.parent) if p >= 0)

    @cached_property
    def order(self) -> np.ndarray:
        """Vertices with every child before its parent; the root is last."""
        return _kernels.child_first_order(self.parent, self.root)

    def neighbors(self) -> list[list[int]]:
        nbrs: list[list[int]] = [[] for _ in range(self.num_vertices)]
        for v, p in enumerate(self.parent):
            if p >= 0:
                nbrs[v].append(int(p))
                nbrs[int(p)].append(v)
        return nbrs

    def validate(self) -> None:
        """Check the tree invariants against the host graph."""
        edges = self.edge_ids  # raises if a tree edge is missing from host
        if len(edges) != max(self.num_vertices - 1, 0):
            raise GraphError("wrong number of tree edges")
        if len(self.order) != self.num_vertices:
            raise GraphError("parent pointers contain a cycle")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpanningTree):
            return NotImplemented
        return self.host == other.host and self.edge_ids == other.edge_ids

    def __hash__(self) -> int:
        return hash(self.edge_ids)

    def __repr__(self) -> str:
        return f"<SpanningTree of {self.host!r} edges={sorted(self.edge_ids)}>"


def wilson_ust(g: Graph, rng: RngStream, root: int = 0) -> SpanningTree:
    """Uniform spanning tree by loop-erased random walks (Wilson), rooted at ``root``."""
    if g.num_vertices == 0:
        raise GraphError("empty graph")
    if not g.connected:
        raise GraphError("graph is disconnected; it has no spanning tree")
    indptr, indices, _ = g.csr
    return SpanningTree(g, _kernels.wilson_parents(indptr, indices, root, rng), root)


def prufer_to_parent(seq: Sequence[int], N: int) -> list[int]:
    """Decode a Pruefer sequence into parent pointers rooted at ``N - 1``.

    Plain heap-free quadratic decoder; the compiled linear decoder in the
    sampling fast path is checked against this one.
    """
    if N < 1 or len(seq) != max(N - 2, 0):
        raise GraphError("Pruefer sequence must have length N - 2")
    degree = [1] * N
    for x in seq:
        degree[x] += 1
    parent = [-1] * N
    for x in seq:
        leaf = degree.index(1)
        parent[leaf] = x
        degree[leaf] = 0
        degree[x] -= 1
    if N >= 2:
        u = degree.index(1)
        parent[u] = N - 1
    return parent


@lru_cache(maxsize=8)
def _complete(N: int) -> Graph:
    return make_complete(N)


def random_labeled_tree(N: int, rng: RngStream) -> SpanningTree:
    """Uniform labeled tree on ``N`` vertices as a spanning tree of ``K_N``."""
    if N < 1:
        raise GraphError("N must be >= 1")
    parent, _ = _kernels.prufer_decode(_kernels.random_prufer(N, rng), N)
    return SpanningTree(_complete(N), parent, N - 1)
