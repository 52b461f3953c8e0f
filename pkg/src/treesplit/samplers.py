"""Balanced-partition samplers: tree splitting, the up-down forest walk and reversible ReCom."""
from __future__ import annotations

import enum
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Union

import numpy as np
from scipy.stats import beta

from . import _kernels
from .counting import count_spanning_trees_multigraph
from .graph import Graph, GraphError, Partition, contract_partition
from .split import Forest, apply_split, find_balanced_split, find_two_split_edges_with_slack
from .ust import RngStream, derive_rng, wilson_ust



@dataclass(frozen=True)
class CompleteGraph:
    """K_N by vertex count only; large N would not fit as an edge list."""

    num_vertices: int


GraphSource = Union[Graph, CompleteGraph, Callable[[RngStream], Graph]]


class Stage(enum.Enum):
    NOT_SPLITTABLE = "not_splittable"
    TREE_WEIGHT_REJECTED = "tree_weight_rejected"
    ACCEPTED = "accepted"


@dataclass(frozen=True)
class SampleOutcome:
    result: Partition | None
    stage: Stage
    trees_drawn: int = 1

    def __post_init__(self):
        if (self.result is not None) != (self.stage is Stage.ACCEPTED):
            raise ValueError("result must be present exactly when accepted")


def clopper_pearson(successes: int, trials: int, alpha: float = 0.05) -> tuple[float, float]:
    """Exact two-sided binomial confidence interval."""
    lo = 0.0 if successes == 0 else float(beta.ppf(alpha / 2, successes, trials - successes + 1))
    hi = 1.0 if successes == trials else float(beta.ppf(1 - alpha / 2, successes + 1, trials - successes))
    return lo, hi


@dataclass(frozen=True)
class Estimate:
    successes: int
    trials: int
    ci_low: float = field(init=False)
    ci_high: float = field(init=False)
    mean_diameter: float | None = None

    def __post_init__(self):
        if self.trials < 1 or not 0 <= self.successes <= self.trials:
            raise ValueError("need 0 <= successes <= trials and trials >= 1")
        lo, hi = clopper_pearson(self.successes, self.trials)
        object.__setattr__(self, "ci_low", min(lo, self.point))
        object.__setattr__(self, "ci_high", max(hi, self.point))

    @property
    def point(self) -> float:
        return self.successes / self.trials


def _check_sampling_input(g: Graph, k: int) -> int:
    if not g.connected:
        raise GraphError("graph must be connected")
    if k < 1 or g.num_vertices % k:
        raise GraphError(f"N={g.num_vertices} is not divisible by k={k}")
    return g.num_vertices // k


# -- tree splitting -----------------------------------------------------------------

def split_tree_once(g: Graph, k: int, rng: RngStream) -> SampleOutcome:
    """One attempt: uniform spanning tree, balanced split, accept with ``1/tau(H)``.

    ``H`` is the multigraph obtained by contracting each block. Conditioned on
    acceptance, a partition is returned with probability proportional to its
    spanning-tree weight among balanced k-partitions.
    """
    _check_sampling_input(g, k)
    tree = wilson_ust(g, rng)
    split = find_balanced_split(tree, k)
    if split is None:
        return SampleOutcome(None, Stage.NOT_SPLITTABLE)
    part = apply_split(tree, split)
    tau_h = count_spanning_trees_multigraph(contract_partition(g, part))
    if rng.random() * tau_h < 1.0:
        return SampleOutcome(part, Stage.ACCEPTED)
    return SampleOutcome(None, Stage.TREE_WEIGHT_REJECTED)


def sample_balanced_partition(g: Graph, k: int, rng: RngStream, max_trees: int = 10**6) -> Partition | None:
    """Repeat :func:`split_tree_once` until acceptance; ``None`` once ``max_trees`` trees are used."""
    _check_sampling_input(g, k)
    for _ in range(max_trees):
        out = split_tree_once(g, k, rng)
        if out.result is not None:
            return out.result
    return None


@dataclass
class BatchResult:
    partitions: list[Partition]
    trees_drawn: int = 0
    not_splittable: int = 0
    tree_weight_rejected: int = 0

    @property
    def accepted(self) -> int:
        return len(self.partitions)


def sample_balanced_partitions(g: Graph, k: int, count: int, rng: RngStream,
                               max_trees: int | None = None, chunk: int | None = None) -> BatchResult:
    """Draw ``count`` accepted samples of the tree-splitting sampler in compiled batches.

    Same law as repeated :func:`split_tree_once`; stops early (with fewer
    samples) if ``max_trees`` trees have been drawn.
    """
    _check_sampling_input(g, k)
    indptr, indices, _ = g.csr
    N = g.num_vertices
    chunk = chunk or max(64, min(1 << 16, (1 << 23) // max(N, 1)))
    tau_cache: dict[bytes, tuple[Partition, int]] = {}
    out = BatchResult([])
    while out.accepted < count and (max_trees is None or out.trees_drawn < max_trees):
        size = chunk if max_trees is None else min(chunk, max_trees - out.trees_drawn)
        ok, labels = _kernels.wilson_split_batch(indptr, indices, k, size, rng)
        pos = np.flatnonzero(ok)
        rows = labels[pos]
        taus = np.empty(len(rows))
        row_parts: list[Partition] = []
        if len(rows):
            uniq, inv = np.unique(rows, axis=0, return_inverse=True)
            inv = inv.ravel()
            uniq_parts, uniq_tau = [], np.empty(len(uniq))
            for i, row in enumerate(uniq):
                key = row.tobytes()
                if key not in tau_cache:
                    part = Partition.from_labels(row)
                    tau_cache[key] = (part, count_spanning_trees_multigraph(contract_partition(g, part)))
                uniq_parts.append(tau_cache[key][0])
                uniq_tau[i] = tau_cache[key][1]
            taus = uniq_tau[inv]
            row_parts = [uniq_parts[i] for i in inv]
        hits = np.flatnonzero(rng.random(len(rows)) * taus < 1.0)
        need = count - out.accepted
        used = size
        if len(hits) > need:
            used = int(pos[hits[need - 1]]) + 1
            hits = hits[:need]
        n_split = int(np.count_nonzero(pos < used))
        out.trees_drawn += used
        out.not_splittable += used - n_split
        out.tree_weight_rejected += n_split - len(hits)
        out.partitions.extend(row_parts[r] for r in hits)
    return out


# -- up-down forest walk -------------------------------------------------------------

def cross_edges(g: Graph, f: Forest) -> np.ndarray:
    lab = f.labels
    e = g.edge_array
    return np.flatnonzero(lab[e[:, 0]] != lab[e[:, 1]])


def up_down_step(g: Graph, f: Forest, rng: RngStream, metropolis: bool = True) -> Forest:
    """Add a uniform edge joining two components, then delete a uniform forest edge.

    The bare move is reversible with respect to the number of crossing
    edges of the forest, not the uniform law. With ``metropolis`` the move is
    accepted with probability ``min(1, c(F) / c(F'))``, which makes the
    uniform law on k-component forests stationary.
    """
    if f.host != g:
        raise GraphError("forest does not belong to this graph")
    cross = cross_edges(g, f)
    if len(cross) == 0:
        raise GraphError("no edge joins two components (k = 1?)")
    # floor(U * d) indices, drawn in the same order as the compiled walk
    added = int(cross[int(rng.random() * len(cross))])
    grown = sorted(f.edge_ids | {added})
    dropped = grown[int(rng.random() * len(grown))]
    if dropped == added:
        return f
    new = Forest(g, f.edge_ids.union([added]).difference([dropped]))
    if metropolis:
        c_new = len(cross_edges(g, new))
        if c_new > len(cross) and rng.random() * c_new >= len(cross):
            return f
    return new


def random_forest(g: Graph, k: int, rng: RngStream) -> Forest:
    """Uniform spanning tree with ``k - 1`` uniformly chosen edges removed."""
    tree = wilson_ust(g, rng)
    edges = sorted(tree.edge_ids)
    drop = rng.choice(len(edges), size=k - 1, replace=False) if k > 1 else []
    return Forest(g, set(edges) - {edges[i] for i in drop})


def up_down_sample_balanced(g: Graph, k: int, rng: RngStream, steps_per_sample: int = 100,
                            max_samples: int = 10_000, burn_in: int | None = None,
                            metropolis: bool = True) -> Partition | None:
    """Run the up-down walk until its forest is balanced.

    After ``burn_in`` steps (default ``steps_per_sample``) the forest is
    checked, then re-checked every ``steps_per_sample`` steps, at most
    ``max_samples`` times.
    """
    n = _check_sampling_input(g, k)
    f = random_forest(g, k, rng)
    if k == 1:
        return f.partition()
    in_forest = np.zeros(g.num_edges, dtype=np.bool_)
    in_forest[list(f.edge_ids)] = True
    found = _kernels.up_down_until_balanced(
        g.num_vertices, g.edge_array, in_forest, n,
        steps_per_sample if burn_in is None else burn_in, steps_per_sample, max_samples, rng, metropolis)
    return Forest(g, np.flatnonzero(in_forest)).partition() if found else None


def up_down_trace(g: Graph, f: Forest, steps: int, rng: RngStream, metropolis: bool = True) -> list[Forest]:
    """The forests visited by ``steps`` compiled walk steps from ``f``.

    Consumes ``rng`` exactly like repeated :func:`up_down_step`, so both
    produce the same trajectory from the same generator state.
    """
    if g.num_edges >= 63:
        raise GraphError("trace encodes forests as 63-bit masks")
    in_forest = np.zeros(g.num_edges, dtype=np.bool_)
    in_forest[list(f.edge_ids)] = True
    masks = _kernels.up_down_trace(g.num_vertices, g.edge_array, in_forest, steps, rng, metropolis)
    cache: dict[int, Forest] = {}
    out = []
    for m in masks.tolist():
        if m not in cache:
            cache[m] = Forest(g, [e for e in range(g.num_edges) if m >> e & 1])
        out.append(cache[m])
    return out


# -- reversible ReCom -------------------------------------------------------------------

def max_split_candidates(total: int, n: int, slack: int) -> int:
    """Upper bound on the number of slack-valid split edges of any tree on ``total`` vertices.

    Rooting at a centroid, each edge cuts off a subtree of size ``a <= total/2``;
    equal-size subtrees are disjoint and avoid the centroid, so at most
    ``(total - 1) // a`` edges cut off ``a`` vertices. For ``slack = 0`` and
    ``total = 2n`` the bound is 1.
    """
    lo, hi = n - slack, n + slack
    return sum((total - 1) // a for a in range(max(lo, 1), total // 2 + 1) if lo <= total - a <= hi and a <= hi)


class MoveStatus(enum.Enum):
    NON_ADJACENT = "non_adjacent"
    NOT_SPLITTABLE = "not_splittable"
    REJECTED = "rejected"
    ACCEPTED = "accepted"


def recom_move(g: Graph, p: Partition, n: int, slack: int, rng: RngStream) -> tuple[Partition, MoveStatus]:
    """One reversible ReCom step, also reporting which branch it took.

    A uniform pair of blocks is merged, a uniform spanning tree of the union is
    drawn, and a split edge leaving both sides within ``[n - slack, n + slack]``
    is chosen uniformly among the valid ones. The move is accepted with
    probability ``c / (B * E)``: ``c`` valid edges, ``E`` edges between the two
    new blocks and ``B`` = :func:`max_split_candidates`. With ``slack = 0``,
    ``c = B = 1`` and this is acceptance with ``1/E``.
    """
    if any(not n - slack <= s <= n + slack for s in p.sizes):
        raise GraphError("partition violates the block-size window")
    p.validate(g)
    k = len(p)
    if k < 2:
        return p, MoveStatus.NON_ADJACENT
    i, j = sorted(int(x) for x in rng.choice(k, size=2, replace=False))
    lab = p.labels()
    e = g.edge_array
    a, b = lab[e[:, 0]], lab[e[:, 1]]
    if not np.any(((a == i) & (b == j)) | ((a == j) & (b == i))):
        return p, MoveStatus.NON_ADJACENT
    union = p.blocks[i] + p.blocks[j]
    sub, keep = g.subgraph(union)
    tree = wilson_ust(sub, rng)
    cand = find_two_split_edges_with_slack(tree, n, slack)
    if not cand:
        return p, MoveStatus.NOT_SPLITTABLE
    cut = cand[rng.integers(len(cand))]
    side_a, side_b = apply_split(tree, {cut}).blocks
    in_a = np.zeros(sub.num_vertices, dtype=bool)
    in_a[list(side_a)] = True
    se = sub.edge_array
    crossing = int(np.count_nonzero(in_a[se[:, 0]] != in_a[se[:, 1]]))
    bound = max_split_candidates(len(union), n, slack)
    if rng.random() * bound * crossing >= len(cand):
        return p, MoveStatus.REJECTED
    blocks = [blk for t, blk in enumerate(p.blocks) if t not in (i, j)]
    blocks.append([keep[v] for v in side_a])
    blocks.append([keep[v] for v in side_b])
    return Partition(blocks), MoveStatus.ACCEPTED


def recom_step(g: Graph, p: Partition, n: int, slack: int, rng: RngStream) -> Partition:
    return recom_move(g, p, n, slack, rng)[0]


# -- splittability estimation ----------------------------------------------------------

def _block_trials(family: GraphSource, k: int, trials: int, rng: RngStream,
                  with_diameter: bool, fast_complete: bool) -> tuple[int, int]:
    if isinstance(family, CompleteGraph):
        return _kernels.complete_split_trials(family.num_vertices, k, trials, rng, with_diameter)
    if isinstance(family, Graph):
        g = family
        if fast_complete and g.is_complete():
            return _kernels.complete_split_trials(g.num_vertices, k, trials, rng, with_diameter)
        indptr, indices, _ = g.csr
        return _kernels.wilson_split_trials(indptr, indices, k, trials, rng, with_diameter)
    hits = diam = 0
    for _ in range(trials):
        g = family(rng)
        indptr, indices, _ = g.csr
        h, d = _kernels.wilson_split_trials(indptr, indices, k, 1, rng, with_diameter)
        hits += h
        diam += d
    return hits, diam


def estimate_splittability(family: GraphSource, k: int, trials: int, rng: RngStream,
                           with_diameter: bool = False, fast_complete: bool = True,
                           threads: int = 1, block_size: int = 1000) -> Estimate:
    """Monte Carlo estimate of the probability that a uniform spanning tree is k-splittable.

    ``family`` is a fixed graph, a ``CompleteGraph``, or a callable drawing a
    fresh graph per trial.
    Trials run in blocks with streams derived from one seed taken from
    ``rng``, so the result does not depend on ``threads``.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    if isinstance(family, Graph):
        _check_sampling_input(family, k)
    elif isinstance(family, CompleteGraph) and (k < 1 or family.num_vertices < 1 or family.num_vertices % k):
        raise GraphError(f"N={family.num_vertices} is not divisible by k={k}")
    base = int(rng.integers(2**63))
    sizes = [min(block_size, trials - s) for s in range(0, trials, block_size)]

    def run(b: int) -> tuple[int, int]:
        return _block_trials(family, k, sizes[b], derive_rng(base, b), with_diameter, fast_complete)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(run, range(len(sizes))))
    else:
        results = [run(b) for b in range(len(sizes))]
    hits = sum(r[0] for r in results)
    diam = sum(r[1] for r in results)
    return Estimate(hits, trials, mean_diameter=diam / trials if with_diameter else None)


def pair_count(k: int) -> int:
    return math.comb(k, 2)


def all_pairs(k: int) -> list[tuple[int, int]]:
    return list(combinations(range(k), 2))
