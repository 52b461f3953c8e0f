"""Spanning-tree counts via the matrix-tree theorem."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .graph import Graph, GraphError, Multigraph, Partition, is_connected


@dataclass(frozen=True)
class LogCount:
    """Natural log of a nonnegative count; ``zero`` marks an exact zero."""

    log: float
    zero: bool = False

    @property
    def value(self) -> float:
        return 0.0 if self.zero else math.exp(self.log)


def bareiss_determinant(matrix: list[list[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination.

    Every intermediate division is exact (Sylvester's identity), so entries
    stay integral and no rounding occurs.
    """
    a = [list(map(int, row)) for row in matrix]
    n = len(a)
    if n == 0:
        return 1
    sign, prev = 1, 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k] != 0:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        pivot = a[k][k]
        row_k = a[k]
        for i in range(k + 1, n):
            row_i = a[i]
            lead = row_i[k]
            for j in range(k + 1, n):
                row_i[j] = (row_i[j] * pivot - lead * row_k[j]) // prev
            row_i[k] = 0
        prev = pivot
    return sign * a[n - 1][n - 1]


def _reduced_laplacian(mult: np.ndarray) -> list[list[int]]:
    lap = np.diag(mult.sum(axis=1)) - mult
    return lap[1:, 1:].tolist()


def _adjacency_matrix(g: Graph) -> np.ndarray:
    adj = np.zeros((g.num_vertices, g.num_vertices), dtype=np.int64)
    e = g.edge_array
    adj[e[:, 0], e[:, 1]] = 1
    adj[e[:, 1], e[:, 0]] = 1
    return adj


def count_spanning_trees(g: Graph) -> int:
    """Exact number of spanning trees; 0 for a disconnected graph."""
    if g.num_vertices <= 1:
        return 1
    if not is_connected(g):
        return 0
    if g.num_edges == g.num_vertices - 1:
        return 1
    return bareiss_determinant(_reduced_laplacian(_adjacency_matrix(g)))


def count_spanning_trees_multigraph(h: Multigraph) -> int:
    """Exact spanning-tree count of a multigraph; parallel edges count separately."""
    if h.num_vertices <= 1:
        return 1
    return bareiss_determinant(_reduced_laplacian(h.multiplicity))


def log_count_spanning_trees(g: Graph) -> LogCount:
    """Floating-point ``ln tau(g)`` from a log-determinant."""
    if g.num_vertices <= 1:
        return LogCount(0.0)
    if not is_connected(g):
        return LogCount(-math.inf, zero=True)
    adj = _adjacency_matrix(g).astype(np.float64)
    lap = np.diag(adj.sum(axis=1)) - adj
    sign, logdet = np.linalg.slogdet(lap[1:, 1:])
    if sign <= 0:
        raise ArithmeticError("reduced Laplacian of a connected graph must be positive definite")
    return LogCount(float(logdet))


def partition_weight(g: Graph, p: Partition) -> int:
    """Spanning-tree weight: product of the tree counts of the induced blocks."""
    p.validate(g)
    w = 1
    for block in p.blocks:
        if len(block) > 2:
            w *= count_spanning_trees(g.subgraph(block)[0])
    return w


def log_partition_weight(g: Graph, p: Partition) -> float:
    p.validate(g)
    return sum(log_count_spanning_trees(g.subgraph(b)[0]).log for b in p.blocks if len(b) > 2)


def grimmett_bound_exact(m: int, N: int) -> Fraction:
    if N < 2 or m < 0:
        raise GraphError("grimmett bound needs N >= 2 and m >= 0")
    return Fraction(2 * m, N - 1) ** (N - 1) / N


def grimmett_bound(m: int, N: int) -> float:
    """Upper bound ``(1/N) (2m/(N-1))^(N-1)`` on the tree count of any graph with m edges."""
    return float(grimmett_bound_exact(m, N))
