"""Experiment commands behind the CLI. Each returns a :class:`Table`; writers emit CSV or JSON."""
from __future__ import annotations

import csv
import dataclasses
import io
import json
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from typing import Any, Callable, TextIO

import numpy as np

from .counting import partition_weight
from .graph import (BudgetExhausted, Graph, GraphError, Partition, expected_edges, gen_gnm, gen_gnp,
                    make_complete, make_cycle, make_grid, make_path, read_edgelist)
from .lattice import make_slack_gadget
from .oracle import (GADGET_EXHAUSTIVE_MAX_N, enumerate_forests, gadget_balanced_partitions,
                     recom_neighbors, slack_partition_distribution, split_size_histogram_by_enumeration,
                     split_size_weight_histogram, weight_distribution)
from .samplers import (CompleteGraph, Estimate, clopper_pearson, estimate_splittability, random_forest, recom_move,
                       sample_balanced_partition, sample_balanced_partitions, up_down_sample_balanced,
                       up_down_trace)
from .ust import derive_rng

SUBCOMMANDS = ("splittability-scan", "figure2", "slack-gadget", "chain-validate", "algorithm-compare")
FAMILIES = ("complete", "gnm", "gnp", "grid", "cycle", "path", "gadget", "file")
RANDOM_FAMILIES = ("gnm", "gnp")
CHAINS = ("up-down", "recom", "both")
FIGURE2_ENUM_MAX_N = 8


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    seed: int
    graph: str = "complete"
    n_list: tuple[int, ...] = ()
    k: int = 2
    p: float | None = None
    m: int | None = None
    width: int | None = None
    height: int | None = None
    graph_file: str | None = None
    slack: int = 0
    trials: int = 10_000
    steps: int = 10_000
    samples: int = 100
    chain: str = "both"
    fixed_graph: bool = False
    diameter: bool = False
    timing: bool = False
    threads: int = 1
    out: str | None = None
    format: str = "csv"

    def validate(self) -> None:
        """Reject bad parameters before any sampling happens."""
        def need(cond: bool, msg: str) -> None:
            if not cond:
                raise ConfigError(msg)

        need(self.subcommand in SUBCOMMANDS, f"unknown subcommand {self.subcommand!r}")
        need(isinstance(self.seed, int) and self.seed >= 0, "seed must be a nonnegative integer")
        need(self.graph in FAMILIES, f"unknown graph family {self.graph!r}")
        need(self.format in ("csv", "json"), "format must be csv or json")
        need(self.chain in CHAINS, f"chain must be one of {CHAINS}")
        need(self.k >= 1, "k must be >= 1")
        need(self.trials >= 1 and self.steps >= 1 and self.samples >= 1, "trials, steps and samples must be >= 1")
        need(self.threads >= 1, "threads must be >= 1")
        need(self.slack >= 0, "slack must be >= 0")
        need(all(N >= 1 for N in self.n_list), "sizes in --n-list must be positive")
        if self.p is not None:
            need(0.0 < self.p <= 1.0, "p must lie in (0, 1]")
        if self.graph == "gnm":
            need(self.m is not None or self.p is not None, "gnm needs --m or --p")
        if self.graph == "gnp":
            need(self.p is not None, "gnp needs --p")
        if self.graph == "grid" and not self.n_list:
            need(self.width is not None and self.height is not None, "grid needs --width/--height or --n-list")
        if self.graph == "file":
            need(self.graph_file is not None, "file family needs --graph-file")

        sub = self.subcommand
        if sub == "figure2":
            need(all(N >= 2 and N % 2 == 0 for N in self.sizes()), "figure2 needs even N >= 2")
        elif sub == "slack-gadget":
            need(all(n >= 8 and n % 2 == 0 for n in self.sizes()), "gadget sizes must be even and >= 8")
        else:
            if self.graph not in ("file", "gadget") and not (self.graph == "grid" and not self.n_list):
                need(len(self.sizes()) > 0, "--n-list is required")
            for N in self.graph_sizes():
                need(N % self.k == 0, f"N={N} is not divisible by k={self.k}")
                if self.graph == "grid" and self.n_list:
                    need(math.isqrt(N) ** 2 == N, f"grid N={N} must be a perfect square")
                if self.graph == "gnm" and self.m is not None:
                    need(N - 1 <= self.m <= N * (N - 1) // 2, f"m={self.m} infeasible for N={N}")
            if sub in ("chain-validate", "algorithm-compare"):
                need(len(self.graph_sizes()) <= 1, f"{sub} takes a single graph size")
            if sub == "splittability-scan":
                need(self.graph != "gadget", "gadget is not a splittability-scan family")

    def sizes(self) -> tuple[int, ...]:
        if self.n_list:
            return self.n_list
        return {"figure2": (8, 16), "slack-gadget": (8, 10, 12, 14)}.get(self.subcommand, ())

    def graph_sizes(self) -> tuple[int, ...]:
        """Vertex counts of the graphs a sampling subcommand will use."""
        if self.graph == "file":
            return ()
        if self.graph == "grid" and not self.n_list:
            return (self.width * self.height,)
        if self.graph == "gadget":
            return tuple(3 * n for n in self.sizes())
        return self.sizes()

    def echo(self) -> dict[str, Any]:
        d = dataclasses.asdict(self)
        d["n_list"] = list(self.n_list)
        d.pop("out")
        return d


@dataclass(frozen=True)
class ScalingFit:
    points: tuple[tuple[float, float], ...]
    slope: float
    intercept: float
    residual: float


def fit_scaling(points: list[tuple[float, float]]) -> ScalingFit:
    """Least-squares line through ``(log x, log y)`` points; ``residual`` is the RMS error."""
    if len(points) < 3:
        raise ValueError("a scaling fit needs at least 3 points")
    x = np.array([p[0] for p in points])
    y = np.array([p[1] for p in points])
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return ScalingFit(tuple((float(a), float(b)) for a, b in points), float(slope), float(intercept), resid)


@dataclass
class Table:
    subcommand: str
    columns: tuple[str, ...]
    rows: list[dict[str, Any]]

    def column(self, name: str, kind: str | None = None) -> list[Any]:
        return [r.get(name) for r in self.rows if kind is None or r.get("kind") == kind]


# -- graphs ----------------------------------------------------------------------

def build_graph(cfg: ExperimentConfig, N: int | None, rng: np.random.Generator) -> Graph:
    fam = cfg.graph
    if fam == "complete":
        return make_complete(N)
    if fam == "cycle":
        return make_cycle(N)
    if fam == "path":
        return make_path(N)
    if fam == "grid":
        if cfg.n_list:
            s = math.isqrt(N)
            return make_grid(s, s)
        return make_grid(cfg.width, cfg.height)
    if fam == "gadget":
        return make_slack_gadget(N // 3).graph
    if fam == "file":
        with open(cfg.graph_file) as fp:
            return read_edgelist(fp)
    if fam == "gnm":
        m = cfg.m if cfg.m is not None else expected_edges(N, cfg.p)
        return gen_gnm(N, m, rng)
    if fam == "gnp":
        return gen_gnp(N, cfg.p, rng)
    raise ConfigError(f"unknown graph family {fam!r}")


def _single_graph(cfg: ExperimentConfig) -> Graph:
    sizes = cfg.graph_sizes()
    N = sizes[0] if sizes else None
    return build_graph(cfg, N, derive_rng(cfg.seed, 0, N or 0))


# -- subcommands ----------------------------------------------------------------------

SCAN_COLUMNS = ("kind", "graph", "N", "n", "k", "trials", "successes", "point", "ci_low", "ci_high",
                "mean_diameter", "slope", "intercept", "residual", "points")


def cmd_splittability_scan(cfg: ExperimentConfig) -> Table:
    """Estimate the k-splittable fraction of uniform spanning trees for each N, then fit log-log slope."""
    cfg.validate()
    rows = []
    points = []
    sizes = cfg.graph_sizes() or (None,)
    for N in sizes:
        rng = derive_rng(cfg.seed, N or 0, cfg.k)
        if cfg.graph in RANDOM_FAMILIES and not cfg.fixed_graph:
            family: Graph | CompleteGraph | Callable = lambda r, N=N: build_graph(cfg, N, r)
        elif cfg.graph == "complete":
            family = CompleteGraph(N)
        else:
            family = build_graph(cfg, N, derive_rng(cfg.seed, N or 0, cfg.k, 1))
            N = family.num_vertices
            if N % cfg.k:
                raise ConfigError(f"N={N} is not divisible by k={cfg.k}")
        est = estimate_splittability(family, cfg.k, cfg.trials, rng, with_diameter=cfg.diameter,
                                     threads=cfg.threads)
        n = N // cfg.k
        rows.append(dict(kind="estimate", graph=cfg.graph, N=N, n=n, k=cfg.k, trials=est.trials,
                         successes=est.successes, point=est.point, ci_low=est.ci_low, ci_high=est.ci_high,
                         mean_diameter=est.mean_diameter))
        if est.successes > 0:
            points.append((math.log(n), math.log(est.point)))
    if len(points) >= 3:
        fit = fit_scaling(points)
        rows.append(dict(kind="fit", graph=cfg.graph, k=cfg.k, slope=fit.slope, intercept=fit.intercept,
                         residual=fit.residual, points=len(points)))
    return Table(cfg.subcommand, SCAN_COLUMNS, rows)


FIGURE2_COLUMNS = ("N", "i", "weight", "is_min", "enumerated")


def cmd_figure2(cfg: ExperimentConfig) -> Table:
    """Forest counts of K_N by smaller component size; small N are re-counted by enumeration."""
    cfg.validate()
    rows = []
    for N in cfg.sizes():
        hist = split_size_weight_histogram(N)
        check = split_size_histogram_by_enumeration(N) if N <= FIGURE2_ENUM_MAX_N else None
        if check is not None and check != hist:
            raise AssertionError(f"closed form disagrees with enumeration at N={N}")
        low = min(w for _, w in hist)
        for i, w in hist:
            rows.append(dict(N=N, i=i, weight=w, is_min=int(w == low), enumerated=int(check is not None)))
    return Table(cfg.subcommand, FIGURE2_COLUMNS, rows)


GADGET_COLUMNS = ("kind", "n", "vertices", "balanced_count", "exhaustive", "frozen", "max_balanced_weight",
                  "total_balanced_weight", "witness_weight", "log_ratio_max", "log_ratio_total",
                  "slope", "intercept", "residual", "points")


def _log_ratio(a: int, b: int) -> float:
    return math.log(a) - math.log(b)


def cmd_slack_gadget(cfg: ExperimentConfig) -> Table:
    """Exact weights of balanced partitions versus the almost-balanced witness on the slack gadget."""
    cfg.validate()
    rows = []
    points = []
    for n in cfg.sizes():
        gadget = make_slack_gadget(n)
        g = gadget.graph
        exhaustive = n <= GADGET_EXHAUSTIVE_MAX_N
        balanced = gadget_balanced_partitions(n, exhaustive=exhaustive)
        weights = [partition_weight(g, p) for p in balanced]
        frozen = all(not recom_neighbors(g, p, n, 0) for p in balanced)
        witness = partition_weight(g, gadget.witness)
        ratio_max = _log_ratio(witness, max(weights))
        rows.append(dict(kind="gadget", n=n, vertices=g.num_vertices, balanced_count=len(balanced),
                         exhaustive=int(exhaustive), frozen=int(frozen), max_balanced_weight=max(weights),
                         total_balanced_weight=sum(weights), witness_weight=witness,
                         log_ratio_max=ratio_max, log_ratio_total=_log_ratio(witness, sum(weights))))
        points.append((float(n), ratio_max))
    if len(points) >= 3:
        fit = fit_scaling(points)
        rows.append(dict(kind="fit", slope=fit.slope, intercept=fit.intercept, residual=fit.residual,
                         points=len(points)))
    return Table(cfg.subcommand, GADGET_COLUMNS, rows)


CHAIN_COLUMNS = ("chain", "graph", "N", "k", "slack", "states", "steps", "tv")


def checkpoints(steps: int) -> list[int]:
    out = [10**j for j in range(1, 20) if 10**j < steps]
    return out + [steps]


def _tv_curve(visits: list, target: dict, marks: list[int]) -> list[float]:
    counts: dict = {}
    out = []
    done = 0
    for t in marks:
        for x in visits[done:t]:
            counts[x] = counts.get(x, 0) + 1
        done = t
        tv = sum(abs(Fraction(counts.get(x, 0), t) - w) for x, w in target.items())
        tv += sum(Fraction(c, t) for x, c in counts.items() if x not in target)
        out.append(float(tv / 2))
    return out


def _recom_target(cfg: ExperimentConfig, g: Graph, n: int) -> dict[Partition, Fraction]:
    if cfg.graph == "gadget" and cfg.slack == 0:
        return weight_distribution(g, gadget_balanced_partitions(n))
    return slack_partition_distribution(g, g.num_vertices // n, n, cfg.slack)


def cmd_chain_validate(cfg: ExperimentConfig) -> Table:
    """TV distance of chain occupancy to the exact stationary law at log-spaced step counts."""
    cfg.validate()
    g = _single_graph(cfg)
    k = 3 if cfg.graph == "gadget" else cfg.k
    if g.num_vertices % k:
        raise ConfigError(f"N={g.num_vertices} is not divisible by k={k}")
    n = g.num_vertices // k
    marks = checkpoints(cfg.steps)
    rows = []
    if cfg.chain in ("up-down", "both"):
        if g.num_edges >= 63:
            raise ConfigError("up-down validation encodes forests in 63-bit masks")
        forests = list(enumerate_forests(g, k))
        target = {f: Fraction(1, len(forests)) for f in forests}
        rng = derive_rng(cfg.seed, 1)
        visits = [f.edge_ids for f in up_down_trace(g, random_forest(g, k, rng), cfg.steps, rng)]
        for t, tv in zip(marks, _tv_curve(visits, target, marks)):
            rows.append(dict(chain="up-down", graph=g.name, N=g.num_vertices, k=k, slack="", states=len(target),
                             steps=t, tv=tv))
    if cfg.chain in ("recom", "both"):
        target = _recom_target(cfg, g, n)
        states = sorted(target, key=lambda p: p.blocks)
        rng = derive_rng(cfg.seed, 2)
        p = states[int(rng.integers(len(states)))]
        visits = []
        for _ in range(cfg.steps):
            p, _ = recom_move(g, p, n, cfg.slack, rng)
            visits.append(p)
        for t, tv in zip(marks, _tv_curve(visits, target, marks)):
            rows.append(dict(chain="recom", graph=g.name, N=g.num_vertices, k=k, slack=cfg.slack,
                             states=len(target), steps=t, tv=tv))
    return Table(cfg.subcommand, CHAIN_COLUMNS, rows)


COMPARE_COLUMNS = ("algorithm", "graph", "N", "k", "work", "not_splittable", "tree_weight_rejected",
                   "accepted", "stage2_rate", "stage2_ci_low", "stage2_ci_high", "stage2_expected",
                   "samples_per_second")


def stage2_formula(n: int, k: int) -> Fraction:
    """Tree-weight acceptance probability on the complete graph: ``1 / (k^(k-2) n^(2k-2))``."""
    return Fraction(1, k ** (k - 2) * n ** (2 * k - 2)) if k >= 2 else Fraction(1)


def cmd_algorithm_compare(cfg: ExperimentConfig) -> Table:
    """Rejection counts and acceptance rates for the tree-splitting, up-down and ReCom samplers."""
    cfg.validate()
    g = _single_graph(cfg)
    k = cfg.k
    N = g.num_vertices
    if N % k:
        raise ConfigError(f"N={N} is not divisible by k={k}")
    n = N // k
    rows = []

    def speed(count: int, start: float) -> float | None:
        return count / max(time.perf_counter() - start, 1e-9) if cfg.timing else None

    start = time.perf_counter()
    res = sample_balanced_partitions(g, k, cfg.trials, derive_rng(cfg.seed, 1), max_trees=cfg.trials)
    split = res.trees_drawn - res.not_splittable
    lo, hi = clopper_pearson(res.accepted, split) if split else (None, None)
    expected = None
    if g.is_complete():
        expected = float(stage2_formula(n, k))
    elif g.num_edges == N - 1:
        expected = 1.0
    rows.append(dict(algorithm="tree-splitting", graph=g.name, N=N, k=k, work=res.trees_drawn,
                     not_splittable=res.not_splittable, tree_weight_rejected=res.tree_weight_rejected,
                     accepted=res.accepted, stage2_rate=res.accepted / split if split else None,
                     stage2_ci_low=lo, stage2_ci_high=hi, stage2_expected=expected,
                     samples_per_second=speed(res.accepted, start)))

    if k >= 2:
        rng = derive_rng(cfg.seed, 2)
        start = time.perf_counter()
        got = 0
        for _ in range(cfg.samples):
            if up_down_sample_balanced(g, k, rng, steps_per_sample=max(1, cfg.steps // 100)) is None:
                raise BudgetExhausted("up-down walk found no balanced forest within its budget")
            got += 1
        rows.append(dict(algorithm="up-down", graph=g.name, N=N, k=k, work=cfg.samples, accepted=got,
                         samples_per_second=speed(got, start)))

        rng = derive_rng(cfg.seed, 3)
        p = sample_balanced_partition(g, k, rng, max_trees=max(cfg.trials, 10**6))
        if p is None:
            raise BudgetExhausted("no balanced starting partition for ReCom")
        start = time.perf_counter()
        status: dict[str, int] = {}
        for _ in range(cfg.steps):
            p, st = recom_move(g, p, n, cfg.slack, rng)
            status[st.value] = status.get(st.value, 0) + 1
        rows.append(dict(algorithm="recom", graph=g.name, N=N, k=k, work=cfg.steps,
                         not_splittable=status.get("not_splittable", 0),
                         tree_weight_rejected=status.get("rejected", 0),
                         accepted=status.get("accepted", 0),
                         samples_per_second=speed(cfg.steps, start)))
    return Table(cfg.subcommand, COMPARE_COLUMNS, rows)


COMMANDS: dict[str, Callable[[ExperimentConfig], Table]] = {
    "splittability-scan": cmd_splittability_scan,
    "figure2": cmd_figure2,
    "slack-gadget": cmd_slack_gadget,
    "chain-validate": cmd_chain_validate,
    "algorithm-compare": cmd_algorithm_compare,
}


def run(cfg: ExperimentConfig) -> Table:
    cfg.validate()
    try:
        return COMMANDS[cfg.subcommand](cfg)
    except GraphError as exc:
        raise ConfigError(str(exc)) from exc


# -- output ---------------------------------------------------------------------------

def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v)


def write_csv(table: Table, fp: TextIO) -> None:
    w = csv.writer(fp, lineterminator="\n")
    w.writerow(table.columns)
    for row in table.rows:
        w.writerow([_cell(row.get(c)) for c in table.columns])


def _json_value(v: Any) -> Any:
    # counts as decimal strings so big integers survive any JSON reader
    if isinstance(v, bool) or v is None or isinstance(v, float):
        return v
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    return v


def write_json(table: Table, cfg: ExperimentConfig, fp: TextIO) -> None:
    doc = {
        "subcommand": table.subcommand,
        "seed": str(cfg.seed),
        "config": cfg.echo(),
        "columns": list(table.columns),
        "rows": [{c: _json_value(r.get(c)) for c in table.columns} for r in table.rows],
    }
    json.dump(doc, fp, indent=2, sort_keys=False)
    fp.write("\n")


def render(table: Table, cfg: ExperimentConfig) -> str:
    buf = io.StringIO()
    if cfg.format == "json":
        write_json(table, cfg, buf)
    else:
        write_csv(table, buf)
    return buf.getvalue()
