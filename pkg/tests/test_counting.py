import math
from fractions import Fraction
from itertools import combinations

import networkx as nx
import pytest
from hypothesis import given, strategies as st

from treesplit.counting import (bareiss_determinant, count_spanning_trees, count_spanning_trees_multigraph,
                                grimmett_bound, grimmett_bound_exact, log_count_spanning_trees,
                                partition_weight)
from treesplit.graph import Graph, Multigraph, Partition, gen_gnp, make_complete, make_grid, make_path
from treesplit.lattice import make_triangular_ladder
from treesplit.oracle import count_by_deletion_contraction
from treesplit.ust import make_rng


def fraction_det(rows):
    # plain Gaussian elimination over the rationals
    a = [[Fraction(x) for x in r] for r in rows]
    n, det = len(a), Fraction(1)
    for c in range(n):
        piv = next((r for r in range(c, n) if a[r][c] != 0), None)
        if piv is None:
            return 0
        if piv != c:
            a[c], a[piv] = a[piv], a[c]
            det = -det
        det *= a[c][c]
        for r in range(c + 1, n):
            f = a[r][c] / a[c][c]
            a[r] = [x - f * y for x, y in zip(a[r], a[c])]
    return det


@given(st.lists(st.lists(st.integers(-9, 9), min_size=5, max_size=5), min_size=5, max_size=5))
def test_bareiss_matches_rational_elimination(m):
    assert bareiss_determinant(m) == fraction_det(m)


def test_bareiss_empty_and_pivot_swap():
    assert bareiss_determinant([]) == 1
    assert bareiss_determinant([[0, 1], [1, 0]]) == -1


@pytest.mark.parametrize("N", range(1, 9))
def test_cayley(N):
    assert count_spanning_trees(make_complete(N)) == N ** max(N - 2, 0)


def test_tree_and_grid():
    assert count_spanning_trees(make_path(7)) == 1
    assert count_spanning_trees(make_grid(3, 3)) == 192
    assert count_spanning_trees(Graph(4, [(0, 1), (2, 3)])) == 0


@given(st.integers(2, 8), st.floats(0.3, 1.0), st.integers(0, 2**32 - 1))
def test_kirchhoff_matches_networkx_and_deletion_contraction(N, p, seed):
    g = gen_gnp(N, p, make_rng(seed))
    h = nx.Graph(list(g.edges))
    h.add_nodes_from(range(N))
    tau = count_spanning_trees(g)
    assert tau == count_by_deletion_contraction(g)
    assert tau == round(nx.number_of_spanning_trees(h))


def test_big_counts_are_exact():
    assert count_spanning_trees(make_complete(30)) == 30 ** 28


@pytest.mark.parametrize("mult,tau", [([[0, 4], [4, 0]], 4),
                                      ([[0, 1, 1], [1, 0, 1], [1, 1, 0]], 3),
                                      ([[0, 2, 1], [2, 0, 1], [1, 1, 0]], 5),
                                      ([[0]], 1),
                                      ([[0, 0], [0, 0]], 0)])
def test_multigraph_counts(mult, tau):
    assert count_spanning_trees_multigraph(Multigraph(mult)) == tau


def test_multigraph_brute_force():
    mult = [[0, 2, 1, 0], [2, 0, 3, 1], [1, 3, 0, 2], [0, 1, 2, 0]]
    edges = [(u, v) for u in range(4) for v in range(u + 1, 4) for _ in range(mult[u][v])]
    count = 0
    for sub in combinations(range(len(edges)), 3):
        g = Graph(4, [])
        parent = list(range(4))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x
        ok = True
        for i in sub:
            a, b = find(edges[i][0]), find(edges[i][1])
            if a == b:
                ok = False
                break
            parent[a] = b
        count += ok
    assert count_spanning_trees_multigraph(Multigraph(mult)) == count


def test_log_count():
    lc = log_count_spanning_trees(make_complete(4))
    assert not lc.zero and abs(lc.log - math.log(16)) < 1e-6
    assert log_count_spanning_trees(make_path(5)).log == pytest.approx(0.0, abs=1e-9)
    assert log_count_spanning_trees(Graph(3, [(0, 1)])).zero
    big = log_count_spanning_trees(make_complete(60))
    assert big.log == pytest.approx(58 * math.log(60), rel=1e-9)


def test_partition_weight_examples():
    k4 = make_complete(4)
    assert partition_weight(k4, Partition([range(4)])) == 16
    assert partition_weight(k4, Partition([[v] for v in range(4)])) == 1
    assert partition_weight(make_complete(8), Partition([range(4), range(4, 8)])) == 256


def test_grimmett_examples():
    assert grimmett_bound(6, 4) == pytest.approx(16.0)
    assert grimmett_bound(15, 6) == pytest.approx(1296.0)
    assert grimmett_bound_exact(6, 4) == 16
    for N in range(2, 9):
        assert grimmett_bound_exact(N - 1, N) == Fraction(2 ** (N - 1), N) >= 1


@pytest.mark.parametrize("n1,tau", [(2, 1), (3, 3), (4, 8)])
def test_ladder_small(n1, tau):
    assert count_spanning_trees(make_triangular_ladder(n1)) == tau


def test_ladder_lemma_bounds():
    tau = {n: count_spanning_trees(make_triangular_ladder(n)) for n in range(2, 17)}
    for a, b in combinations(range(2, 17), 2):
        assert 2 ** (b - a) * tau[a] <= tau[b] <= 3 ** (b - a) * tau[a]
