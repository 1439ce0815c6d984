"""Centralized ground truth for the minimum spanning tree."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .graph import EdgeOrderKey, WeightedGraph, edge_order_key


class UnionFind:
    def __init__(self, items=()):
        self.parent = {x: x for x in items}
        self.size = {x: 1 for x in items}

    def add(self, x):
        if x not in self.parent:
            self.parent[x] = x
            self.size[x] = 1

    def find(self, x):
        root = x
        while self.parent[root] != root:
            root = self.parent[root]
        while self.parent[x] != root:
            self.parent[x], x = root, self.parent[x]
        return root

    def union(self, a, b) -> bool:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return False
        if self.size[ra] < self.size[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        self.size[ra] += self.size[rb]
        return True


@dataclass(frozen=True)
class MstResult:
    edges: frozenset  # of EdgeOrderKey
    total_weight: object
    incidence: dict  # vertex -> sorted tuple of (neighbor, weight)

    def sorted_edges(self) -> list:
        return sorted(self.edges)


def _result(g: WeightedGraph, keys) -> MstResult:
    inc = {v: [] for v in g.vertices}
    for k in keys:
        inc[k.lo].append((k.hi, k.w))
        inc[k.hi].append((k.lo, k.w))
    return MstResult(
        frozenset(keys),
        sum((k.w for k in keys), 0),
        {v: tuple(sorted(x)) for v, x in inc.items()},
    )


def kruskal_mst(g: WeightedGraph) -> MstResult:
    uf = UnionFind(g.vertices)
    chosen = []
    for key in g.edges:  # already ascending by EdgeOrderKey
        if uf.union(key.lo, key.hi):
            chosen.append(key)
    return _result(g, chosen)


def validate_spanning_tree(g: WeightedGraph, edges) -> str | None:
    """Return None when ``edges`` is a spanning tree of ``g``, else a violation message."""
    keys = []
    for e in edges:
        if isinstance(e, EdgeOrderKey):
            keys.append(e)
        else:
            u, v, w = e
            keys.append(edge_order_key(u, v, w))
    if len(set(keys)) != len(keys):
        return "cycle/duplicate: repeated edge"
    for k in keys:
        if not g.has_edge(k.lo, k.hi) or g.weight(k.lo, k.hi) != k.w:
            return f"edge {tuple(k)} not in graph"
    uf = UnionFind(g.vertices)
    for k in keys:
        if not uf.union(k.lo, k.hi):
            return f"cycle/duplicate: edge {tuple(k)} closes a cycle"
    if len(keys) != g.n - 1:
        return f"not spanning: {len(keys)} edges for {g.n} vertices"
    return None


def exhaustive_mst_small(g: WeightedGraph) -> MstResult:
    """Brute force over all (n-1)-edge subsets; only for n <= 8."""
    if g.n > 8:
        raise ValueError("exhaustive_mst_small is limited to n <= 8")
    if g.n == 1:
        return _result(g, [])
    best = None
    for subset in combinations(g.edges, g.n - 1):
        uf = UnionFind(g.vertices)
        if not all(uf.union(k.lo, k.hi) for k in subset):
            continue
        rank = (sum(k.w for k in subset), sorted(subset))
        if best is None or rank < best:
            best = rank
    return _result(g, best[1])
