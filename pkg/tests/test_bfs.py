import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from congest_mst.bfs import (
    NoSuchChild,
    assign_intervals,
    build_bfs,
    child_blocks,
    convergecast_sizes,
    next_hop_for_target,
)
from congest_mst.graph import GraphFamily, build_graph, eccentricity, generate
from congest_mst.node import Node, until
from congest_mst.sim import run
from congest_mst.state import VertexState


def run_tree_stages(g, root=None):
    root = min(g.vertices) if root is None else root
    states = {}
    starts = {}

    def body(ctx):
        st = ctx.state
        yield from build_bfs(ctx, st)
        yield from convergecast_sizes(ctx, st)
        starts[st.id] = yield from assign_intervals(ctx, st)
        yield from until(ctx, starts[st.id])

    def factory(view):
        st = VertexState(id=view.id, weights=dict(view.incident), is_root=view.id == root)
        states[view.id] = st
        return Node(view, body, st)

    _, metrics = run(g, factory)
    return states, starts, metrics


def bfs_depths(g, root):
    depth = {root: 0}
    frontier = [root]
    while frontier:
        nxt = []
        for x in frontier:
            for y, _ in g.adj[x]:
                if y not in depth:
                    depth[y] = depth[x] + 1
                    nxt.append(y)
        frontier = nxt
    return depth


GRAPHS = [
    generate(GraphFamily("path", n=9)),
    generate(GraphFamily("grid", rows=4, cols=5, seed=1)),
    generate(GraphFamily("gnm_connected", n=60, m=150, seed=4)),
    generate(GraphFamily("lollipop", clique=6, tail=10, seed=2)),
    generate(GraphFamily("star", n=8)),
]


@pytest.mark.parametrize("g", GRAPHS)
def test_bfs_tree_is_shortest_path_tree(g):
    root = min(g.vertices)
    states, _, _ = run_tree_stages(g)
    depth = bfs_depths(g, root)
    for v, st in states.items():
        assert st.depth == depth[v]
        if v != root:
            p = st.parent
            assert g.has_edge(v, p) and depth[p] == depth[v] - 1
            # ties go to the smallest id on the previous layer
            assert p == min(x for x, _ in g.adj[v] if depth[x] == depth[v] - 1)
        assert set(st.children) == {c for c, s in states.items() if s.parent == v}


@pytest.mark.parametrize("g", GRAPHS)
def test_sizes_and_globals(g):
    root = min(g.vertices)
    states, starts, _ = run_tree_stages(g)
    assert states[root].subtree_size == g.n
    for st in states.values():
        assert st.n == g.n
        assert st.ecc == eccentricity(g, root)
        assert st.max_id == max(g.vertices)
        assert st.subtree_size == 1 + sum(states[c].subtree_size for c in st.children)
    assert len(set(starts.values())) == 1


def test_bfs_message_count_is_two_m():
    g = generate(GraphFamily("gnm_connected", n=40, m=100, seed=9))
    messages = []

    def body(ctx):
        yield from build_bfs(ctx, ctx.state)

    def factory(view):
        st = VertexState(id=view.id, weights=dict(view.incident), is_root=view.id == min(g.vertices))
        return Node(view, body, st)

    _, metrics = run(g, factory, snapshot_hook=lambda s: messages.append(len(s.packets)))
    assert metrics.messages == 2 * g.m


@pytest.mark.parametrize("g", GRAPHS)
def test_intervals_nest_exactly_by_ancestry(g):
    states, _, _ = run_tree_stages(g)
    assert sorted(st.lo for st in states.values()) == list(range(1, g.n + 1))

    def ancestors(v):
        out = set()
        while states[v].parent is not None:
            v = states[v].parent
            out.add(v)
        return out

    for u, su in states.items():
        anc = ancestors(u)
        for v, sv in states.items():
            inside = sv.lo <= su.lo <= sv.hi
            assert inside == (v == u or v in anc)


def test_child_blocks_by_ascending_child_id():
    assert child_blocks(1, {9: 3, 4: 2}) == [(2, 3, 4), (4, 6, 9)]
    assert child_blocks(5, {}) == []


def test_three_vertex_path_intervals():
    g = build_graph([(1, 2, 1), (2, 3, 1)])
    states, _, _ = run_tree_stages(g, root=1)
    assert [(states[v].lo, states[v].hi) for v in (1, 2, 3)] == [(1, 3), (2, 3), (3, 3)]
    # routing from rt to slot 3 goes through vertex 2
    assert next_hop_for_target(states[1], 3) == 2
    assert next_hop_for_target(states[2], 3) == 3
    with pytest.raises(ValueError):
        next_hop_for_target(states[2], 1)
    with pytest.raises(ValueError):
        next_hop_for_target(states[3], 3)


def test_star_routing_uses_direct_child():
    g = build_graph([(0, i, i) for i in range(1, 6)])
    states, _, _ = run_tree_stages(g, root=0)
    for leaf in range(1, 6):
        assert next_hop_for_target(states[0], states[leaf].lo) == leaf


def test_routing_gap_raises_no_such_child():
    st = VertexState(id=1, weights={}, lo=1, hi=5, child_intervals=((2, 3, 7),))
    with pytest.raises(NoSuchChild):
        next_hop_for_target(st, 5)


@settings(max_examples=25, deadline=None)
@given(st.integers(2, 40), st.integers(0, 10**6))
def test_routing_reaches_every_target_along_tree_path(n, seed):
    m = min(n * (n - 1) // 2, 2 * n)
    g = generate(GraphFamily("gnm_connected", n=n, m=max(m, n - 1), seed=seed))
    states, _, _ = run_tree_stages(g)
    root = min(g.vertices)
    by_lo = {st.lo: v for v, st in states.items()}
    for target, dest in by_lo.items():
        cur, hops = root, 0
        while states[cur].lo != target:
            nxt = next_hop_for_target(states[cur], target)
            assert states[nxt].parent == cur
            cur, hops = nxt, hops + 1
        assert cur == dest and hops == states[dest].depth
