from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from congest_mst.graph import (
    DisconnectedGraph,
    DuplicateEdge,
    EdgeOrderKey,
    GraphError,
    GraphFamily,
    InvalidParams,
    SelfLoop,
    build_graph,
    dumps_edge_list,
    eccentricity,
    edge_order_key,
    generate,
    hop_diameter,
    loads_edge_list,
    read_edge_list,
    write_edge_list,
)


def test_edge_order_key_normalizes_endpoints():
    assert edge_order_key(5, 2, 3) == EdgeOrderKey(3, 2, 5)
    assert edge_order_key(2, 5, 3) == edge_order_key(5, 2, 3)


def test_ties_broken_by_endpoint_ids():
    keys = sorted([edge_order_key(3, 4, 1), edge_order_key(1, 4, 1), edge_order_key(1, 2, 1)])
    assert keys == [(1, 1, 2), (1, 1, 4), (1, 3, 4)]


def test_build_graph_adjacency_sorted():
    g = build_graph([(3, 1, 5), (1, 2, 7)])
    assert g.vertices == (1, 2, 3)
    assert g.adj[1] == ((2, 7), (3, 5))
    assert g.weight(3, 1) == 5
    assert g.has_edge(1, 2) and not g.has_edge(2, 3)
    assert (g.n, g.m) == (3, 2)


def test_single_vertex():
    g = build_graph([], vertices=[7])
    assert g.n == 1 and g.m == 0
    assert hop_diameter(g) == 0


@pytest.mark.parametrize(
    "edges, exc",
    [
        ([(1, 1, 2)], SelfLoop),
        ([(1, 2, 1), (2, 1, 3)], DuplicateEdge),
        ([(1, 2, 1), (3, 4, 1)], DisconnectedGraph),
        ([(1, 2, -1)], GraphError),
        ([(-1, 2, 1)], GraphError),
        ([], GraphError),
    ],
)
def test_build_graph_rejects(edges, exc):
    with pytest.raises(exc):
        build_graph(edges)


def test_disconnected_names_a_vertex():
    with pytest.raises(DisconnectedGraph) as info:
        build_graph([(1, 2, 1), (3, 4, 1)])
    assert info.value.args  # carries the unreachable vertex


@pytest.mark.parametrize(
    "fam, n, m",
    [
        (GraphFamily("path", n=5), 5, 4),
        (GraphFamily("cycle", n=6), 6, 6),
        (GraphFamily("grid", rows=3, cols=4), 12, 17),
        (GraphFamily("star", n=7), 7, 6),
        (GraphFamily("complete", n=6), 6, 15),
        (GraphFamily("lollipop", clique=10, tail=90), 100, 45 + 90),
        (GraphFamily("gnm_connected", n=50, m=120, seed=3), 50, 120),
    ],
)
def test_family_shapes(fam, n, m):
    g = generate(fam)
    assert (g.n, g.m) == (n, m)
    assert all(1 <= e.w <= n * n for e in g.edges)


def test_family_diameters():
    assert hop_diameter(generate(GraphFamily("path", n=9))) == 8
    assert hop_diameter(generate(GraphFamily("cycle", n=9))) == 4
    assert hop_diameter(generate(GraphFamily("grid", rows=3, cols=4))) == 5
    assert hop_diameter(generate(GraphFamily("star", n=9))) == 2
    assert hop_diameter(generate(GraphFamily("lollipop", clique=5, tail=4))) == 5


def test_generate_is_deterministic():
    fam = GraphFamily("gnm_connected", n=40, m=100, seed=11)
    assert dumps_edge_list(generate(fam)) == dumps_edge_list(generate(fam))
    other = GraphFamily("gnm_connected", n=40, m=100, seed=12)
    assert dumps_edge_list(generate(fam)) != dumps_edge_list(generate(other))


@pytest.mark.parametrize(
    "fam",
    [
        GraphFamily("path", n=0),
        GraphFamily("cycle", n=2),
        GraphFamily("gnm_connected", n=5, m=3),
        GraphFamily("gnm_connected", n=5, m=11),
        GraphFamily("lollipop", clique=0, tail=3),
        GraphFamily("hypercube", n=8),
    ],
)
def test_invalid_params(fam):
    with pytest.raises(InvalidParams):
        generate(fam)


def test_eccentricity_matches_diameter_on_path_end():
    g = build_graph([(1, 2, 1), (2, 3, 1), (3, 4, 1)])
    assert eccentricity(g, 1) == 3 == hop_diameter(g)
    assert eccentricity(g, 2) == 2


def test_edge_list_round_trip(tmp_path):
    g = generate(GraphFamily("grid", rows=4, cols=5, seed=2))
    path = tmp_path / "g.txt"
    write_edge_list(g, path)
    assert read_edge_list(path) == g
    assert dumps_edge_list(read_edge_list(path)) == path.read_text()


def test_edge_list_comments_fractions_and_lone_vertex():
    g = loads_edge_list("# header\n1 2 1/2  # half\n\n2 3 4\n")
    assert g.weight(1, 2) == Fraction(1, 2)
    assert g.weight(2, 3) == 4 and isinstance(g.weight(2, 3), int)
    lone = loads_edge_list("42\n")
    assert lone.vertices == (42,)
    with pytest.raises(GraphError):
        loads_edge_list("1 2\n")


def test_path_file_has_n_minus_one_lines():
    text = dumps_edge_list(generate(GraphFamily("path", n=5)))
    assert len(text.splitlines()) == 4


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 30), st.integers(0, 10**6))
def test_gnm_always_connected_with_exact_m(n, seed):
    m = min(n * (n - 1) // 2, 2 * n)
    m = max(m, n - 1)
    g = generate(GraphFamily("gnm_connected", n=n, m=m, seed=seed))
    assert (g.n, g.m) == (n, m)
    assert len(set(g.vertices)) == n
