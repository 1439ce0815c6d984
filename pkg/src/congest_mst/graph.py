"""Immutable weighted graphs, the total edge order, and instance generators."""

from __future__ import annotations

import random
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Iterable, NamedTuple, Union

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

Weight = Union[int, Fraction]


class GraphError(ValueError):
    pass


class DisconnectedGraph(GraphError):
    def __init__(self, vertex):
        super().__init__(f"graph is disconnected: vertex {vertex} unreachable")
        self.vertex = vertex


class DuplicateEdge(GraphError):
    def __init__(self, u, v):
        super().__init__(f"duplicate edge ({u}, {v})")
        self.edge = (u, v)


class SelfLoop(GraphError):
    def __init__(self, v):
        super().__init__(f"self-loop at vertex {v}")
        self.vertex = v


class InvalidParams(GraphError):
    pass


class EdgeOrderKey(NamedTuple):
    w: Weight
    lo: int
    hi: int


def edge_order_key(u: int, v: int, w: Weight) -> EdgeOrderKey:
    """Key realizing the strict total order on edges: weight, then endpoint ids."""
    if u < v:
        return EdgeOrderKey(w, u, v)
    return EdgeOrderKey(w, v, u)


@dataclass(frozen=True)
class WeightedGraph:
    vertices: tuple
    edges: tuple  # EdgeOrderKey, ascending
    adj: dict = field(repr=False)  # vertex -> tuple of (neighbor, weight), ascending neighbor

    @property
    def n(self) -> int:
        return len(self.vertices)

    @property
    def m(self) -> int:
        return len(self.edges)

    def weight(self, u, v):
        for x, w in self.adj[u]:
            if x == v:
                return w
        raise KeyError((u, v))

    def has_edge(self, u, v) -> bool:
        return any(x == v for x, _ in self.adj.get(u, ()))

    def edge_list(self):
        return [(e.lo, e.hi, e.w) for e in self.edges]


def build_graph(edge_list: Iterable, vertices: Iterable | None = None) -> WeightedGraph:
    """Validate an edge list and return the graph.

    ``vertices`` lets callers declare isolated vertices; it only matters for
    the single-vertex graph, since anything else must be connected.
    """
    adj: dict = {}
    seen = set()
    keys = []
    for v in vertices or ():
        adj.setdefault(v, [])
    for u, v, w in edge_list:
        if u == v:
            raise SelfLoop(u)
        if w < 0:
            raise GraphError(f"negative weight on edge ({u}, {v})")
        pair = (min(u, v), max(u, v))
        if pair in seen:
            raise DuplicateEdge(*pair)
        seen.add(pair)
        keys.append(edge_order_key(u, v, w))
        adj.setdefault(u, []).append((v, w))
        adj.setdefault(v, []).append((u, w))
    if not adj:
        raise GraphError("empty graph")
    for v in adj:
        if not isinstance(v, int) or v < 0:
            raise GraphError(f"vertex identity must be a non-negative integer, got {v!r}")
    verts = tuple(sorted(adj))
    # connectivity
    reached = {verts[0]}
    queue = deque([verts[0]])
    while queue:
        x = queue.popleft()
        for y, _ in adj[x]:
            if y not in reached:
                reached.add(y)
                queue.append(y)
    if len(reached) != len(verts):
        missing = min(v for v in verts if v not in reached)
        raise DisconnectedGraph(missing)
    frozen = {v: tuple(sorted(adj[v])) for v in verts}
    return WeightedGraph(verts, tuple(sorted(keys)), frozen)


# ---------------------------------------------------------------- generators

FAMILIES = ("path", "cycle", "grid", "star", "complete", "gnm_connected", "lollipop")


@dataclass(frozen=True)
class GraphFamily:
    name: str
    n: int = 0
    m: int = 0
    rows: int = 0
    cols: int = 0
    clique: int = 0
    tail: int = 0
    seed: int = 0

    def size(self) -> int:
        if self.name == "grid":
            return self.rows * self.cols
        if self.name == "lollipop":
            return self.clique + self.tail
        return self.n


def _structure(fam: GraphFamily, rng: random.Random) -> tuple[int, list]:
    name = fam.name
    if name == "path":
        n = fam.n
        if n < 1:
            raise InvalidParams("path needs n >= 1")
        return n, [(i, i + 1) for i in range(n - 1)]
    if name == "cycle":
        n = fam.n
        if n < 3:
            raise InvalidParams("cycle needs n >= 3")
        return n, [(i, (i + 1) % n) for i in range(n)]
    if name == "grid":
        r, c = fam.rows, fam.cols
        if r < 1 or c < 1 or r * c < 1:
            raise InvalidParams("grid needs rows, cols >= 1")
        pairs = []
        for i in range(r):
            for j in range(c):
                x = i * c + j
                if j + 1 < c:
                    pairs.append((x, x + 1))
                if i + 1 < r:
                    pairs.append((x, x + c))
        return r * c, pairs
    if name == "star":
        n = fam.n
        if n < 1:
            raise InvalidParams("star needs n >= 1")
        return n, [(0, i) for i in range(1, n)]
    if name == "complete":
        n = fam.n
        if n < 1:
            raise InvalidParams("complete needs n >= 1")
        return n, [(i, j) for i in range(n) for j in range(i + 1, n)]
    if name == "lollipop":
        q, t = fam.clique, fam.tail
        if q < 1 or t < 0:
            raise InvalidParams("lollipop needs clique >= 1, tail >= 0")
        pairs = [(i, j) for i in range(q) for j in range(i + 1, q)]
        prev = q - 1
        for x in range(q, q + t):
            pairs.append((prev, x))
            prev = x
        return q + t, pairs
    if name == "gnm_connected":
        n, m = fam.n, fam.m
        if n < 1 or m < n - 1 or m > n * (n - 1) // 2:
            raise InvalidParams(f"gnm_connected needs n-1 <= m <= n(n-1)/2, got n={n} m={m}")
        order = list(range(n))
        rng.shuffle(order)
        chosen = set()
        for i in range(1, n):
            a, b = order[i], order[rng.randrange(i)]
            chosen.add((min(a, b), max(a, b)))
        while len(chosen) < m:
            a, b = rng.randrange(n), rng.randrange(n)
            if a != b:
                chosen.add((min(a, b), max(a, b)))
        return n, sorted(chosen)
    raise InvalidParams(f"unknown family {name!r}")


def generate(fam: GraphFamily) -> WeightedGraph:
    """Deterministic instance for (family, params, seed).

    Vertex identities are distinct random integers in [0, n^3 + 16), weights
    are integers in [1, n^2] so ties occur and the id tie-break matters.
    """
    rng = random.Random(fam.seed)
    n, pairs = _structure(fam, rng)
    ids = rng.sample(range(n ** 3 + 16), n)
    wmax = max(1, n * n)
    edges = [(ids[a], ids[b], rng.randint(1, wmax)) for a, b in pairs]
    return build_graph(edges, vertices=ids)


def hop_diameter(g: WeightedGraph) -> int:
    if g.n == 1:
        return 0
    return int(_hop_distances(g).max())


def eccentricity(g: WeightedGraph, v: int) -> int:
    dist = {v: 0}
    queue = deque([v])
    while queue:
        x = queue.popleft()
        for y, _ in g.adj[x]:
            if y not in dist:
                dist[y] = dist[x] + 1
                queue.append(y)
    return max(dist.values())


def _hop_distances(g: WeightedGraph) -> np.ndarray:
    index = {v: i for i, v in enumerate(g.vertices)}
    rows = [index[e.lo] for e in g.edges]
    cols = [index[e.hi] for e in g.edges]
    mat = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(g.n, g.n))
    return shortest_path(mat, directed=False, unweighted=True)


# ---------------------------------------------------------------- edge-list files

def dumps_edge_list(g: WeightedGraph) -> str:
    lines = [f"{e.lo} {e.hi} {e.w}" for e in g.edges]
    if not lines:
        lines = [str(v) for v in g.vertices]
    return "\n".join(lines) + "\n"


def loads_edge_list(text: str) -> WeightedGraph:
    edges, lone = [], []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) == 1:
            lone.append(int(parts[0]))
        elif len(parts) == 3:
            w = Fraction(parts[2])
            edges.append((int(parts[0]), int(parts[1]), int(w) if w.denominator == 1 else w))
        else:
            raise GraphError(f"line {lineno}: expected 'u v w', got {raw!r}")
    return build_graph(edges, vertices=lone)


def write_edge_list(g: WeightedGraph, path) -> None:
    Path(path).write_text(dumps_edge_list(g), encoding="utf-8")


def read_edge_list(path) -> WeightedGraph:
    return loads_edge_list(Path(path).read_text(encoding="utf-8"))
