"""Undirected simple graphs, connected partitions and graph generators."""
from __future__ import annotations

import math
from functools import cached_property
from typing import IO, Iterable, Sequence

import numpy as np

from ._kernels import forest_components

__all__ = [
    "BudgetExhausted",
    "Graph",
    "GraphError",
    "Multigraph",
    "Partition",
    "connected_components",
    "contract_partition",
    "gen_gnm",
    "gen_gnp",
    "is_connected",
    "make_complete",
    "make_complete_bipartite",
    "make_cycle",
    "make_grid",
    "make_path",
    "make_star",
    "read_edgelist",
    "write_edgelist",
]

DEFAULT_ATTEMPTS = 10_000


class GraphError(ValueError):
    """Raised for malformed graphs, partitions or generator arguments."""


class BudgetExhausted(RuntimeError):
    """A rejection loop ran out of attempts."""


class Graph:
    """Immutable undirected simple graph on vertices ``0 .. num_vertices-1``.

    Edges are stored normalized (``u < v``) and sorted lexicographically, so
    edge indices are a deterministic function of the edge set.
    """

    def __init__(self, num_vertices: int, edges: Iterable[Sequence[int]] | np.ndarray = (), name: str = ""):
        if num_vertices < 0:
            raise GraphError("num_vertices must be nonnegative")
        if isinstance(edges, np.ndarray):
            arr = np.array(edges, dtype=np.int64).reshape(-1, 2)
        else:
            arr = np.array([tuple(e) for e in edges], dtype=np.int64).reshape(-1, 2)
        if arr.size:
            if arr.min() < 0 or arr.max() >= num_vertices:
                raise GraphError("edge endpoint out of range")
            if np.any(arr[:, 0] == arr[:, 1]):
                raise GraphError("self-loops are not allowed")
            arr = np.sort(arr, axis=1)
            order = np.lexsort((arr[:, 1], arr[:, 0]))
            arr = arr[order]
            if np.any(np.all(arr[1:] == arr[:-1], axis=1)):
                raise GraphError("duplicate edge")
        arr.setflags(write=False)
        self._n = int(num_vertices)
        self._edges = arr
        self.name = name

    @property
    def num_vertices(self) -> int:
        return self._n

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def edge_array(self) -> np.ndarray:
        """Read-only ``(M, 2)`` int64 array of sorted edges."""
        return self._edges

    @cached_property
    def edges(self) -> tuple[tuple[int, int], ...]:
        return tuple((int(u), int(v)) for u, v in self._edges)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {e: i for i, e in enumerate(self.edges)}

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        indptr, indices, _ = self.csr
        return tuple(tuple(int(w) for w in indices[indptr[v]:indptr[v + 1]]) for v in range(self._n))

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(indptr, indices, edge_ids)`` with neighbors sorted per vertex."""
        m = self.num_edges
        src = np.concatenate([self._edges[:, 0], self._edges[:, 1]])
        dst = np.concatenate([self._edges[:, 1], self._edges[:, 0]])
        eid = np.concatenate([np.arange(m), np.arange(m)])
        order = np.lexsort((dst, src))
        counts = np.bincount(src, minlength=self._n)
        indptr = np.zeros(self._n + 1, dtype=np.int64)
        np.cumsum(counts, out=indptr[1:])
        out = (indptr, dst[order].astype(np.int64), eid[order].astype(np.int64))
        for a in out:
            a.setflags(write=False)
        return out

    @cached_property
    def connected(self) -> bool:
        return _labels(self)[0] <= 1

    def degree(self, v: int) -> int:
        indptr = self.csr[0]
        return int(indptr[v + 1] - indptr[v])

    def has_edge(self, u: int, v: int) -> bool:
        return (min(u, v), max(u, v)) in self.edge_index

    def edge_id(self, u: int, v: int) -> int:
        try:
            return self.edge_index[(min(u, v), max(u, v))]
        except KeyError:
            raise GraphError(f"no edge {u}-{v}") from None

    def is_complete(self) -> bool:
        return self.num_edges == self._n * (self._n - 1) // 2

    def subgraph(self, vertices: Iterable[int]) -> tuple[Graph, list[int]]:
        """Induced subgraph, relabeled by sorted vertex order.

        Returns the subgraph and the list mapping new labels to old ones.
        """
        keep = sorted(set(vertices))
        local = np.full(self._n, -1, dtype=np.int64)
        local[keep] = np.arange(len(keep))
        e = self._edges
        mask = (local[e[:, 0]] >= 0) & (local[e[:, 1]] >= 0) if len(e) else np.zeros(0, dtype=bool)
        return Graph(len(keep), local[e[mask]]), keep

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self) -> int:
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self) -> str:
        label = f" {self.name!r}" if self.name else ""
        return f"<Graph{label} N={self._n} M={self.num_edges}>"


class Multigraph:
    """Loopless multigraph given by a symmetric integer multiplicity matrix."""

    def __init__(self, multiplicity: np.ndarray | Sequence[Sequence[int]]):
        mult = np.array(multiplicity, dtype=np.int64)
        if mult.ndim != 2 or mult.shape[0] != mult.shape[1]:
            raise GraphError("multiplicity matrix must be square")
        if not np.array_equal(mult, mult.T):
            raise GraphError("multiplicity matrix must be symmetric")
        if np.any(np.diag(mult) != 0):
            raise GraphError("multigraph may not have loops")
        if np.any(mult < 0):
            raise GraphError("negative multiplicity")
        mult.setflags(write=False)
        self.multiplicity = mult

    @property
    def num_vertices(self) -> int:
        return self.multiplicity.shape[0]

    @property
    def num_edges(self) -> int:
        return int(self.multiplicity.sum() // 2)

    def __repr__(self) -> str:
        return f"<Multigraph N={self.num_vertices} M={self.num_edges}>"


class Partition:
    """Set partition of the vertices, stored in canonical order.

    Each block is a sorted tuple; blocks are ordered by their smallest vertex,
    so two partitions compare equal regardless of how blocks were labeled.
    """

    __slots__ = ("blocks",)

    def __init__(self, blocks: Iterable[Iterable[int]]):
        bl = [tuple(sorted(int(v) for v in b)) for b in blocks]
        if any(not b for b in bl):
            raise GraphError("empty block")
        seen: set[int] = set()
        for b in bl:
            if seen.intersection(b) or len(set(b)) != len(b):
                raise GraphError("blocks must be disjoint")
            seen.update(b)
        bl.sort(key=lambda b: b[0])
        self.blocks: tuple[tuple[int, ...], ...] = tuple(bl)

    @classmethod
    def from_labels(cls, labels: Sequence[int] | np.ndarray) -> Partition:
        groups: dict[int, list[int]] = {}
        for v, lab in enumerate(labels):
            groups.setdefault(int(lab), []).append(v)
        return cls(groups.values())

    @property
    def num_vertices(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def sizes(self) -> tuple[int, ...]:
        return tuple(len(b) for b in self.blocks)

    def labels(self) -> np.ndarray:
        """Block index of every vertex (blocks in canonical order)."""
        lab = np.full(self.num_vertices, -1, dtype=np.int64)
        for i, b in enumerate(self.blocks):
            lab[list(b)] = i
        if np.any(lab < 0):
            raise GraphError("partition does not cover 0..N-1")
        return lab

    def validate(self, g: Graph) -> None:
        """Raise :class:`GraphError` unless this is a connected partition of ``g``."""
        if self.num_vertices != g.num_vertices:
            raise GraphError("partition does not cover the graph")
        self.labels()
        for b in self.blocks:
            if len(b) > 1 and not is_connected(g.subgraph(b)[0]):
                raise GraphError(f"block starting at {b[0]} is not connected")

    def __len__(self) -> int:
        return len(self.blocks)

    def __iter__(self):
        return iter(self.blocks)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Partition):
            return NotImplemented
        return self.blocks == other.blocks

    def __hash__(self) -> int:
        return hash(self.blocks)

    def __repr__(self) -> str:
        return f"Partition({[list(b) for b in self.blocks]})"


def _labels(g: Graph) -> tuple[int, np.ndarray]:
    """Component count and a representative vertex per vertex."""
    if g.num_vertices == 0:
        return 0, np.zeros(0, dtype=np.int64)
    rep = np.empty(g.num_vertices, dtype=np.int64)
    forest_components(g.num_vertices, g.edge_array, np.ones(g.num_edges, dtype=np.bool_), rep)
    return int(np.count_nonzero(rep == np.arange(g.num_vertices))), rep


def is_connected(g: Graph) -> bool:
    return g.connected


def connected_components(g: Graph) -> Partition:
    return Partition.from_labels(_labels(g)[1])


def contract_partition(g: Graph, p: Partition) -> Multigraph:
    """Quotient multigraph: one vertex per block, one edge per crossing edge of ``g``."""
    p.validate(g)
    lab = p.labels()
    e = g.edge_array
    a, b = lab[e[:, 0]], lab[e[:, 1]]
    cross = a != b
    mult = np.zeros((len(p), len(p)), dtype=np.int64)
    np.add.at(mult, (a[cross], b[cross]), 1)
    return Multigraph(mult + mult.T)


# -- deterministic families -------------------------------------------------

def make_complete(N: int) -> Graph:
    if N < 1:
        raise GraphError("N must be >= 1")
    iu, ju = np.triu_indices(N, 1)
    return Graph(N, np.stack([iu, ju], axis=1), name=f"K{N}")


def make_grid(width: int, height: int) -> Graph:
    """``width x height`` grid; vertex ``(x, y)`` has index ``y * width + x``."""
    if width < 1 or height < 1:
        raise GraphError("grid dimensions must be >= 1")
    edges = []
    for y in range(height):
        for x in range(width):
            v = y * width + x
            if x + 1 < width:
                edges.append((v, v + 1))
            if y + 1 < height:
                edges.append((v, v + width))
    return Graph(width * height, edges, name=f"grid{width}x{height}")


def make_cycle(N: int) -> Graph:
    if N < 3:
        raise GraphError("a simple cycle needs N >= 3")
    return Graph(N, [(i, (i + 1) % N) for i in range(N)], name=f"C{N}")


def make_path(N: int) -> Graph:
    if N < 1:
        raise GraphError("N must be >= 1")
    return Graph(N, [(i, i + 1) for i in range(N - 1)], name=f"P{N}")


def make_star(leaves: int) -> Graph:
    """Star ``K_{1,leaves}`` with center 0."""
    return Graph(leaves + 1, [(0, i) for i in range(1, leaves + 1)], name=f"K1,{leaves}")


def make_complete_bipartite(a: int, b: int) -> Graph:
    return Graph(a + b, [(i, a + j) for i in range(a) for j in range(b)], name=f"K{a},{b}")


# -- random families ----------------------------------------------------------

_TRIU_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def _pairs(N: int) -> tuple[np.ndarray, np.ndarray]:
    if N not in _TRIU_CACHE:
        if len(_TRIU_CACHE) > 32:
            _TRIU_CACHE.clear()
        _TRIU_CACHE[N] = np.triu_indices(N, 1)
    return _TRIU_CACHE[N]


def _from_pair_indices(N: int, idx: np.ndarray, name: str) -> Graph:
    iu, ju = _pairs(N)
    return Graph(N, np.stack([iu[idx], ju[idx]], axis=1), name=name)


def gen_gnm(N: int, m: int, rng: np.random.Generator, require_connected: bool = True,
            max_attempts: int = DEFAULT_ATTEMPTS) -> Graph:
    """Uniform simple graph with exactly ``m`` edges, optionally conditioned on connectivity.

    Conditioning is by rejection, so the result is uniform over the connected
    graphs with ``m`` edges.
    """
    total = N * (N - 1) // 2
    if N < 1 or m < 0 or m > total:
        raise GraphError(f"infeasible G(N={N}, m={m})")
    if require_connected and m < N - 1:
        raise GraphError(f"{m} edges cannot connect {N} vertices")
    for _ in range(max_attempts):
        idx = np.sort(rng.choice(total, size=m, replace=False))
        g = _from_pair_indices(N, idx, f"G({N},m={m})")
        if not require_connected or is_connected(g):
            return g
    raise BudgetExhausted(f"no connected G({N}, m={m}) in {max_attempts} attempts")


def gen_gnp(N: int, p: float, rng: np.random.Generator, require_connected: bool = True,
            max_attempts: int = DEFAULT_ATTEMPTS) -> Graph:
    """Erdos-Renyi ``G(N, p)``, optionally conditioned on connectivity by rejection."""
    if N < 1:
        raise GraphError("N must be >= 1")
    if not 0.0 <= p <= 1.0:
        raise GraphError("p must lie in [0, 1]")
    total = N * (N - 1) // 2
    for _ in range(max_attempts):
        idx = np.flatnonzero(rng.random(total) < p)
        g = _from_pair_indices(N, idx, f"G({N},p={p:g})")
        if not require_connected or is_connected(g):
            return g
    raise BudgetExhausted(f"no connected G({N}, p={p:g}) in {max_attempts} attempts")


def expected_edges(N: int, p: float) -> int:
    """Edge count ``round(p * C(N, 2))`` used to pair ``G(N, m)`` with ``G(N, p)``."""
    return int(round(p * math.comb(N, 2)))


# -- edge-list serialization --------------------------------------------------

def write_edgelist(g: Graph, fp: IO[str]) -> None:
    """Write ``"N M"`` then one ``"u v"`` line per edge, sorted."""
    fp.write(f"{g.num_vertices} {g.num_edges}\n")
    for u, v in g.edges:
        fp.write(f"{u} {v}\n")


def read_edgelist(fp: IO[str]) -> Graph:
    lines = [ln.split() for ln in fp if ln.strip()]
    if not lines or len(lines[0]) != 2:
        raise GraphError("missing 'N M' header")
    n, m = int(lines[0][0]), int(lines[0][1])
    body = lines[1:]
    if len(body) != m:
        raise GraphError(f"header declares {m} edges, found {len(body)}")
    return Graph(n, [(int(a), int(b)) for a, b in body])
