"""Run reports: one verified, optionally audited run per instance."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

from .boruvka import run_mst
from .checks import InvariantChecker
from .coloring import log_star
from .graph import GraphFamily, InvalidParams, WeightedGraph, generate, hop_diameter
from .oracle import kruskal_mst
from .sim import replay_digest


def family_for_size(name: str, n: int, seed: int = 0, m_factor: int = 4) -> GraphFamily:
    """Pick family parameters that give roughly ``n`` vertices."""
    if name == "grid":
        rows = max(1, math.isqrt(n))
        return GraphFamily("grid", rows=rows, cols=max(1, n // rows), seed=seed)
    if name == "lollipop":
        clique = max(1, min(n, max(3, n // 8)))
        return GraphFamily("lollipop", clique=clique, tail=n - clique, seed=seed)
    if name in ("gnm", "gnm_connected"):
        m = max(n - 1, min(m_factor * n, n * (n - 1) // 2))
        return GraphFamily("gnm_connected", n=n, m=m, seed=seed)
    return GraphFamily(name, n=n, seed=seed)


def round_envelope(ecc: int, n: int, b: int = 1) -> float:
    return (ecc + math.sqrt(n / b)) * max(1.0, math.log2(n))


def message_envelope(m: int, n: int, max_id: int) -> float:
    lg = max(1.0, math.log2(n))
    return m * lg + n * lg * max(1, log_star(max_id))


@dataclass
class RunReport:
    family: str
    n: int
    m: int
    seed: int | None
    D: int
    ecc_rt: int
    b: int
    k: int
    metrics: dict
    mst_weight: str
    verified: bool
    invariant_violations: list = field(default_factory=list)
    round_ratio: float = 0.0
    message_ratio: float = 0.0
    base_fragments: int = 0
    levels: int = 0
    digest: str = ""

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


def run_instance(
    graph: WeightedGraph,
    b: int = 1,
    *,
    k: int | None = None,
    root: int | None = None,
    check: bool = False,
    round_cap: int | None = None,
    family: str = "file",
    seed: int | None = None,
    order=None,
) -> RunReport:
    checker = InvariantChecker(graph) if check else None
    result = run_mst(
        graph, b, k=k, root=root, round_cap=round_cap, order=order,
        snapshot_hook=checker.hook if checker else None,
    )
    violations = checker.finish(result) if checker else []
    if result.one_sided:
        violations = violations + [f"output: {len(result.one_sided)} edges marked at one endpoint only"]
    oracle = kruskal_mst(graph)
    metrics = result.metrics
    n, m = graph.n, graph.m
    return RunReport(
        family=family,
        n=n,
        m=m,
        seed=seed,
        D=hop_diameter(graph),
        ecc_rt=result.ecc,
        b=b,
        k=result.k,
        metrics=metrics.to_json(),
        mst_weight=str(result.total_weight),
        verified=result.edges == oracle.edges,
        invariant_violations=violations,
        round_ratio=metrics.rounds / round_envelope(result.ecc, n, b),
        message_ratio=metrics.messages / message_envelope(m, n, max(graph.vertices)),
        base_fragments=result.base_fragments,
        levels=result.levels,
        digest=f"{replay_digest(metrics, result.outputs):016x}",
    )


def run_family(name: str, n: int, seed: int, b: int = 1, *, m_factor: int = 4, **kw) -> RunReport:
    fam = family_for_size(name, n, seed, m_factor)
    if fam.size() < 1:
        raise InvalidParams(f"{name} with n={n} is empty")
    return run_instance(generate(fam), b, family=fam.name, seed=seed, **kw)
