from collections import Counter
from fractions import Fraction
from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy.stats import binomtest, chisquare

from treesplit.graph import Graph, GraphError, Partition, gen_gnp, make_complete, make_cycle, make_grid, make_star
from treesplit.lattice import make_slack_gadget
from treesplit.oracle import (balanced_partition_distribution, enumerate_forests, gadget_balanced_partitions,
                              recom_transition_row, slack_partition_distribution)
from treesplit.samplers import (CompleteGraph, Estimate, MoveStatus, Stage, clopper_pearson, cross_edges, estimate_splittability,
                                max_split_candidates, random_forest, recom_move, recom_step,
                                sample_balanced_partition, sample_balanced_partitions, split_tree_once,
                                up_down_sample_balanced, up_down_step, up_down_trace)
from treesplit.split import Forest
from treesplit.ust import make_rng


def tv(counts, target):
    n = sum(counts.values())
    return 0.5 * (sum(abs(counts.get(x, 0) / n - float(w)) for x, w in target.items())
                  + sum(c / n for x, c in counts.items() if x not in target))


# -- tree splitting ----------------------------------------------------------------

def test_split_tree_once_stage_law_on_k4():
    rng = make_rng(1)
    stages = Counter(split_tree_once(make_complete(4), 2, rng).stage for _ in range(20_000))
    expected = [Fraction(4, 16), Fraction(36, 64), Fraction(12, 64)]
    obs = [stages[Stage.NOT_SPLITTABLE], stages[Stage.TREE_WEIGHT_REJECTED], stages[Stage.ACCEPTED]]
    assert chisquare(obs, [float(e) * 20_000 for e in expected]).pvalue > 0.001


def test_split_tree_once_k1_always_accepts():
    rng = make_rng(2)
    for _ in range(20):
        out = split_tree_once(make_grid(3, 3), 1, rng)
        assert out.stage is Stage.ACCEPTED and out.result == Partition([range(9)])


def test_preconditions():
    with pytest.raises(GraphError):
        split_tree_once(Graph(4, [(0, 1), (2, 3)]), 2, make_rng(0))
    with pytest.raises(GraphError):
        sample_balanced_partition(make_cycle(5), 2, make_rng(0))


def test_budget_exhaustion_gives_none():
    assert sample_balanced_partition(make_star(3), 2, make_rng(0), max_trees=50) is None
    res = sample_balanced_partitions(make_star(3), 2, 10, make_rng(0), max_trees=500)
    assert res.accepted == 0 and res.trees_drawn == 500 == res.not_splittable


@pytest.mark.parametrize("g,k", [(make_cycle(6), 3), (make_complete(4), 2), (make_grid(3, 3), 3)],
                         ids=["C6-3", "K4-2", "grid3x3-3"])
def test_single_sampler_matches_oracle(g, k):
    rng = make_rng(3)
    target = balanced_partition_distribution(g, k)
    counts = Counter(sample_balanced_partition(g, k, rng) for _ in range(3000))
    keys = list(target)
    assert chisquare([counts[p] for p in keys], [float(target[p]) * 3000 for p in keys]).pvalue > 0.001


def test_batch_bookkeeping():
    res = sample_balanced_partitions(make_complete(4), 2, 5000, make_rng(4))
    assert res.accepted == 5000
    assert res.trees_drawn == res.not_splittable + res.tree_weight_rejected + res.accepted
    split = res.trees_drawn - res.not_splittable
    assert binomtest(res.accepted, split, 0.25).pvalue > 0.001
    assert binomtest(split, res.trees_drawn, 0.75).pvalue > 0.001


def test_batch_and_single_agree_on_stage_rates():
    g = make_grid(2, 3)
    rng = make_rng(6)
    single = Counter(split_tree_once(g, 2, rng).stage for _ in range(20_000))
    batch = sample_balanced_partitions(g, 2, 10**9, make_rng(7), max_trees=20_000)
    obs = [batch.not_splittable, batch.tree_weight_rejected, batch.accepted]
    ref = [single[Stage.NOT_SPLITTABLE], single[Stage.TREE_WEIGHT_REJECTED], single[Stage.ACCEPTED]]
    from scipy.stats import chi2_contingency
    assert chi2_contingency([obs, ref]).pvalue > 0.001


def test_batch_is_reproducible():
    a = sample_balanced_partitions(make_cycle(6), 2, 500, make_rng(8))
    b = sample_balanced_partitions(make_cycle(6), 2, 500, make_rng(8))
    assert a.partitions == b.partitions and a.trees_drawn == b.trees_drawn


def test_tree_graph_is_deterministic():
    g = make_grid(1, 6)
    res = sample_balanced_partitions(g, 3, 100, make_rng(9))
    assert res.not_splittable == 0 and res.tree_weight_rejected == 0
    assert set(res.partitions) == {Partition([[0, 1], [2, 3], [4, 5]])}


# -- up-down walk ----------------------------------------------------------------------

def up_down_row(g, f, metropolis):
    """Exact one-step law from ``f`` by listing every (added, removed) choice."""
    lab = f.labels
    cross = [i for i, (u, v) in enumerate(g.edges) if lab[u] != lab[v]]
    row = Counter()
    c = len(cross)
    for a in cross:
        grown = sorted(f.edge_ids | {a})
        for d in grown:
            w = Fraction(1, c * len(grown))
            if d == a:
                row[f.edge_ids] += w
                continue
            new = (f.edge_ids | {a}) - {d}
            c_new = sum(1 for u, v in g.edges if Forest(g, new).labels[u] != Forest(g, new).labels[v])
            acc = min(Fraction(1), Fraction(c, c_new)) if metropolis else Fraction(1)
            row[new] += w * acc
            row[f.edge_ids] += w * (1 - acc)
    return row


def stationary(g, k, metropolis):
    states = list(enumerate_forests(g, k))
    idx = {s: i for i, s in enumerate(states)}
    P = np.zeros((len(states), len(states)))
    for s in states:
        for t, w in up_down_row(g, Forest(g, s), metropolis).items():
            P[idx[s], idx[t]] += float(w)
    vals, vecs = np.linalg.eig(P.T)
    pi = np.real(vecs[:, np.argmin(abs(vals - 1))])
    return states, pi / pi.sum()


@pytest.mark.parametrize("g,k", [(make_complete(4), 2), (make_cycle(6), 2), (make_grid(2, 3), 2),
                                 (make_grid(2, 3), 3), (make_complete(5), 3)],
                         ids=["K4-2", "C6-2", "grid2x3-2", "grid2x3-3", "K5-3"])
def test_corrected_walk_is_uniform(g, k):
    states, pi = stationary(g, k, True)
    assert np.allclose(pi, 1 / len(states))


def test_literal_walk_weights_forests_by_crossing_edges():
    g = make_complete(4)
    states, pi = stationary(g, 2, False)
    c = np.array([len(cross_edges(g, Forest(g, s))) for s in states], dtype=float)
    assert np.allclose(pi, c / c.sum())
    assert 0.5 * np.abs(pi - 1 / len(states)).sum() == pytest.approx(0.05)


@pytest.mark.parametrize("metropolis", [True, False])
def test_one_step_law_matches_exact_row(metropolis):
    g = make_complete(4)
    f = Forest(g, [0, 5])
    row = up_down_row(g, f, metropolis)
    rng = make_rng(10)
    counts = Counter(up_down_step(g, f, rng, metropolis).edge_ids for _ in range(20_000))
    keys = [x for x in row if row[x] > 0]
    assert set(counts) <= set(keys)
    assert chisquare([counts[x] for x in keys], [float(row[x]) * 20_000 for x in keys]).pvalue > 0.001


@given(st.integers(3, 9), st.integers(2, 4), st.booleans(), st.integers(0, 2**32 - 1))
def test_compiled_walk_follows_python_walk(N, k, metropolis, seed):
    rng = make_rng(seed)
    g = gen_gnp(N, 0.6, rng)
    if k >= N or g.num_edges >= 63:
        return
    f = random_forest(g, k, rng)
    slow, x, r = [], f, make_rng(seed + 1)
    for _ in range(40):
        x = up_down_step(g, x, r, metropolis)
        slow.append(x)
        assert len(x.edge_ids) == N - k and x.num_components == k
    assert up_down_trace(g, f, 40, make_rng(seed + 1), metropolis) == slow


def test_up_down_errors_without_cross_edges():
    g = make_cycle(4)
    with pytest.raises(GraphError):
        up_down_step(g, Forest(g, [0, 1, 2]), make_rng(0))


def test_up_down_sampler_trivial_cases():
    rng = make_rng(11)
    assert up_down_sample_balanced(make_cycle(5), 5, rng) == Partition([[v] for v in range(5)])
    assert up_down_sample_balanced(make_cycle(5), 1, rng) == Partition([range(5)])
    assert up_down_sample_balanced(make_star(3), 2, rng, steps_per_sample=5, max_samples=20) is None


@pytest.mark.parametrize("g,k", [(make_complete(4), 2), (make_cycle(6), 2)], ids=["K4-2", "C6-2"])
def test_up_down_sampler_near_uniform(g, k):
    target = balanced_partition_distribution(g, k)
    target = {p: Fraction(1, len(target)) for p in target}
    rng = make_rng(12)
    counts = Counter(up_down_sample_balanced(g, k, rng, steps_per_sample=50) for _ in range(4000))
    assert tv(counts, target) < 0.05


# -- ReCom ---------------------------------------------------------------------------

def exact_stationarity(g, k, n, slack):
    target = slack_partition_distribution(g, k, n, slack)
    flow = Counter()
    for p, w in target.items():
        row = recom_transition_row(g, p, n, slack, max_split_candidates)
        assert sum(row.values()) == 1
        for q, x in row.items():
            flow[q] += w * x
    return all(flow[p] == w for p, w in target.items()) and set(flow) <= set(target)


@pytest.mark.parametrize("g,k,n,slack", [(make_cycle(6), 2, 3, 0), (make_complete(6), 2, 3, 0),
                                         (make_grid(3, 3), 3, 3, 0), (make_grid(2, 4), 2, 4, 1),
                                         (make_grid(3, 3), 3, 3, 1), (make_cycle(8), 2, 4, 2)],
                         ids=["C6-s0", "K6-s0", "grid3x3-s0", "grid2x4-s1", "grid3x3-s1", "C8-s2"])
def test_recom_exactly_reversible(g, k, n, slack):
    assert exact_stationarity(g, k, n, slack)


@pytest.mark.parametrize("g,start,n,slack", [
    (make_complete(6), Partition([[0, 1, 2], [3, 4, 5]]), 3, 0),
    (make_grid(3, 3), Partition([[0, 1, 2], [3, 4, 5], [6, 7, 8]]), 3, 1)], ids=["K6-s0", "grid3x3-s1"])
def test_recom_one_step_matches_exact_row(g, start, n, slack):
    row = recom_transition_row(g, start, n, slack, max_split_candidates)
    rng = make_rng(13)
    counts = Counter(recom_step(g, start, n, slack, rng) for _ in range(20_000))
    keys = [x for x in row if row[x] > 0]
    assert set(counts) <= set(keys)
    assert chisquare([counts[x] for x in keys], [float(row[x]) * 20_000 for x in keys]).pvalue > 0.001


@given(st.integers(0, 2), st.integers(0, 2**32 - 1))
def test_recom_preserves_block_window(slack, seed):
    g = make_grid(4, 3)
    rng = make_rng(seed)
    p = Partition([[0, 1, 4, 5], [2, 3, 6, 7], [8, 9, 10, 11]])
    for _ in range(30):
        p, status = recom_move(g, p, 4, slack, rng)
        p.validate(g)
        assert all(4 - slack <= s <= 4 + slack for s in p.sizes)


def test_recom_self_loops_on_nonadjacent_pair():
    g = make_grid(1, 6)
    p = Partition([[0, 1], [2, 3], [4, 5]])
    statuses = Counter(recom_move(g, p, 2, 0, make_rng(s))[1] for s in range(300))
    assert statuses[MoveStatus.NON_ADJACENT] > 0


def test_recom_rejects_invalid_partition():
    with pytest.raises(GraphError):
        recom_step(make_cycle(6), Partition([[0, 1], [2, 3, 4, 5]]), 3, 0, make_rng(0))


def test_recom_frozen_on_gadget():
    gd = make_slack_gadget(8)
    rng = make_rng(14)
    for p in gadget_balanced_partitions(8):
        for _ in range(30):
            assert recom_step(gd.graph, p, 8, 0, rng) == p


# -- estimator ------------------------------------------------------------------------

@pytest.mark.parametrize("g,k,exact", [(make_complete(4), 2, Fraction(3, 4)), (make_complete(6), 2, Fraction(5, 8)),
                                       (make_complete(6), 3, Fraction(720, 1296))], ids=["K4-2", "K6-2", "K6-3"])
@pytest.mark.parametrize("fast", [True, False])
def test_estimator_brackets_exact_value(g, k, exact, fast):
    est = estimate_splittability(g, k, 100_000, make_rng(15), fast_complete=fast)
    assert est.ci_low <= float(exact) <= est.ci_high


def test_estimator_independent_of_threads():
    g = make_grid(4, 4)
    a = estimate_splittability(g, 2, 5000, make_rng(16), threads=1, block_size=700)
    b = estimate_splittability(g, 2, 5000, make_rng(16), threads=3, block_size=700)
    assert a == b


def test_estimator_with_fresh_graphs():
    fam = lambda r: gen_gnp(8, 0.5, r)
    a = estimate_splittability(fam, 2, 2000, make_rng(17), with_diameter=True)
    assert a == estimate_splittability(fam, 2, 2000, make_rng(17), with_diameter=True)
    assert 0 < a.point < 1 and 1 <= a.mean_diameter <= 7


@pytest.mark.parametrize("s,n", [(0, 10), (10, 10), (3, 17), (500, 1000), (1, 100_000)])
def test_clopper_pearson_matches_scipy(s, n):
    ci = binomtest(s, n).proportion_ci(method="exact")
    lo, hi = clopper_pearson(s, n)
    assert lo == pytest.approx(ci.low, abs=1e-12) and hi == pytest.approx(ci.high, abs=1e-12)


def test_estimate_validation():
    with pytest.raises(ValueError):
        Estimate(5, 4)
    e = Estimate(0, 10)
    assert e.point == 0 and e.ci_low == 0


def test_implicit_complete_graph_matches_materialized():
    a = estimate_splittability(make_complete(60), 3, 3000, make_rng(5))
    b = estimate_splittability(CompleteGraph(60), 3, 3000, make_rng(5))
    assert (a.successes, a.trials) == (b.successes, b.trials)
    with pytest.raises(GraphError):
        estimate_splittability(CompleteGraph(61), 3, 10, make_rng(5))
