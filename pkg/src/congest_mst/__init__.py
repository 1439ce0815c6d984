"""Distributed MST in a simulated synchronous CONGEST network."""

from .boruvka import MstRun, run_mst, select_k
from .graph import EdgeOrderKey, GraphFamily, WeightedGraph, build_graph, generate
from .oracle import kruskal_mst, validate_spanning_tree
from .sim import RunMetrics, replay_digest, run

__all__ = [
    "EdgeOrderKey",
    "GraphFamily",
    "MstRun",
    "RunMetrics",
    "WeightedGraph",
    "build_graph",
    "generate",
    "kruskal_mst",
    "replay_digest",
    "run",
    "run_mst",
    "select_k",
    "validate_spanning_tree",
]
