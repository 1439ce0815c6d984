"""The invariant checker must flag broken states, not just pass good ones."""

import copy
from types import SimpleNamespace

import pytest

from congest_mst.boruvka import run_mst
from congest_mst.checks import InvariantChecker
from congest_mst.graph import GraphFamily, generate
from congest_mst.sim import Packet, Snapshot, Tag

G = generate(GraphFamily("gnm_connected", n=60, m=150, seed=4))


def capture(event: str):
    """Deep copies of all vertex states at the first occurrence of ``event``."""
    found = {}

    def hook(snap):
        if not found and any(name == event for _, name, _ in snap.events):
            found.update({v: copy.deepcopy(p.state) for v, p in snap.processes.items()})

    run_mst(G, k=8, snapshot_hook=hook)
    assert found
    return found


def feed(states, event, **data):
    checker = InvariantChecker(G)
    procs = {v: SimpleNamespace(state=st) for v, st in states.items()}
    checker.hook(Snapshot(1, "x", procs, [], [(min(states), event, data)], set()))
    return checker.violations


def small_roots(states):
    return {
        st.frag_id: st for st in states.values()
        if st.frag_parent is None and st.ledger.in_small_set
    }


def test_clean_states_pass():
    assert feed(capture("intervals_done"), "intervals_done") == []
    assert feed(capture("base_phase_matching"), "base_phase_matching", i=0) == []
    assert feed(capture("base_phase_end"), "base_phase_end", i=0) == []


def test_detects_improper_coloring():
    states = capture("base_phase_matching")
    roots = small_roots(states)
    child = next(st for st in roots.values() if st.ledger.g_parent is not None)
    child.ledger.cv_color = roots[child.ledger.g_parent].ledger.cv_color
    assert any("share color" in v for v in feed(states, "base_phase_matching", i=0))


def test_detects_non_maximal_matching():
    states = capture("base_phase_matching")
    roots = small_roots(states)
    child = next(st for st in roots.values() if st.ledger.g_parent is not None)
    for st in (child, roots[child.ledger.g_parent]):
        st.ledger.matched = False
        st.ledger.match_role = None
    assert any("both ends unmatched" in v for v in feed(states, "base_phase_matching", i=0))


def test_detects_crossing_intervals():
    states = capture("intervals_done")
    leaf = next(st for st in states.values() if not st.children and st.parent is not None)
    leaf.lo, leaf.hi = 1, 1
    violations = feed(states, "intervals_done")
    assert violations and all(v.startswith("A9") for v in violations)


def test_detects_non_mst_fragment_edge():
    states = capture("base_phase_end")
    mst = InvariantChecker(G).mst
    # re-hang a vertex on a non-tree neighbor in the same fragment
    for v, st in states.items():
        for x in st.weights:
            same = states[x].frag_id == st.frag_id
            if same and st.frag_parent is not None and x != st.frag_parent:
                key = (st.weights[x], min(v, x), max(v, x))
                if key not in mst:
                    st.frag_parent = x
                    assert any(s.startswith("A6") for s in feed(states, "base_phase_end", i=0))
                    return
    pytest.skip("no suitable non-tree edge inside a fragment")


def test_detects_stalled_level():
    violations = feed(capture("intervals_done"), "boruvka_level", level=0, before=6, after=4)
    assert violations == ["A8: level 0: 6 fragments became 4"]


def test_detects_filter_breach():
    checker = InvariantChecker(G)
    pkt = Packet(1, 2, (Tag.CAND, 7, 5, 1, 2, 9, Tag.CAND, 7, 6, 1, 3, 9))
    checker.hook(Snapshot(1, "boruvka_phase_0", {}, [pkt], [], set()))
    assert checker.violations and checker.violations[0].startswith("filter")


def test_detects_wrong_route():
    checker = InvariantChecker(G)
    run = run_mst(G, k=8, snapshot_hook=checker.hook)
    assert checker.finish(run) == []
    key = next(iter(checker.routes))
    checker.routes[key] = checker.routes[key][::-1] + [run.root]
    assert any(v.startswith("A9") for v in checker.finish(run))
