"""Sampling balanced partitions of graphs by splitting uniform spanning trees."""
from .counting import count_spanning_trees, count_spanning_trees_multigraph, partition_weight
from .graph import (BudgetExhausted, Graph, GraphError, Multigraph, Partition, contract_partition, gen_gnm,
                    gen_gnp, make_complete, make_cycle, make_grid, make_path)
from .lattice import make_slack_gadget, make_triangular_ladder
from .samplers import (Estimate, SampleOutcome, Stage, estimate_splittability, recom_step,
                       sample_balanced_partition, sample_balanced_partitions, split_tree_once,
                       up_down_sample_balanced, up_down_step)
from .split import Forest, apply_split, find_balanced_split, find_two_split_edges_with_slack
from .ust import SpanningTree, derive_rng, make_rng, random_labeled_tree, wilson_ust

__all__ = [
    "BudgetExhausted", "Estimate", "Forest", "Graph", "GraphError", "Multigraph", "Partition",
    "SampleOutcome", "SpanningTree", "Stage", "apply_split", "contract_partition", "count_spanning_trees",
    "count_spanning_trees_multigraph", "derive_rng", "estimate_splittability", "find_balanced_split",
    "find_two_split_edges_with_slack", "gen_gnm", "gen_gnp", "make_complete", "make_cycle", "make_grid",
    "make_path", "make_rng", "make_slack_gadget", "make_triangular_ladder", "partition_weight",
    "random_labeled_tree", "recom_step", "sample_balanced_partition", "sample_balanced_partitions",
    "split_tree_once", "up_down_sample_balanced", "up_down_step", "wilson_ust",
]
