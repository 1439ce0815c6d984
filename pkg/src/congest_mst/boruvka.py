"""Boruvka merging over the base forest, coordinated by the BFS root.

Each level: every base fragment finds its lightest edge leaving its current
coarse fragment, the candidates travel up tau through a filtered pipeline
that keeps only the lightest per coarse fragment, rt contracts the
fragments' graph locally, and routes the new ids back down by interval
address. Slot lengths depend only on |F|, the largest base-fragment height,
ecc and b, which every vertex learns from the SCHEDULE broadcast.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field

from .base_forest import NONE, SlotOverrun, _broadcast, build_base_forest
from .bfs import (
    assign_intervals,
    broadcast_down_tau,
    build_bfs,
    convergecast_sizes,
    next_hop_for_target,
    upcast_fragment_directory,
)
from .graph import EdgeOrderKey, WeightedGraph
from .node import Node, until, wait_for
from .oracle import UnionFind
from .sim import WORDS_PER_UNIT, RunMetrics, Tag, run
from .state import VertexState


class StalledMerge(RuntimeError):
    pass


def select_k(n: int, b: int, ecc: int) -> int:
    """k = ceil(sqrt(n / b)) unless the tree depth exceeds it, in which case k = ecc."""
    s = 1
    while s * s * b < n:
        s += 1
    return s if ecc <= s else ecc


@dataclass(frozen=True)
class CandidateRecord:
    coarse: int
    w: object
    lo: int
    hi: int
    far: int  # coarse fragment on the other side

    @property
    def order(self):
        return (self.w, self.lo, self.hi, self.coarse)


@dataclass
class MergeResult:
    new_of: dict  # old coarse id -> new coarse id
    chosen: dict  # old coarse id -> (lo, hi) of its MWOE
    count: int


def root_merge(coarse_ids, best: dict) -> MergeResult:
    """Contract the graph whose nodes are coarse fragments and whose edges are their MWOEs."""
    coarse_ids = sorted(set(coarse_ids))
    uf = UnionFind(coarse_ids)
    for c in coarse_ids:
        rec = best.get(c)
        if rec is None:
            if len(coarse_ids) > 1:
                raise StalledMerge(f"fragment {c} reported no outgoing edge")
            continue
        uf.union(c, rec.far)
    groups: dict = {}
    for c in coarse_ids:
        groups.setdefault(uf.find(c), []).append(c)
    new_of = {c: min(members) for members in groups.values() for c in members}
    count = len(groups)
    if len(coarse_ids) > 1 and count > len(coarse_ids) // 2:
        raise StalledMerge(f"{len(coarse_ids)} fragments only merged into {count}")
    chosen = {c: (rec.lo, rec.hi) for c, rec in best.items()}
    return MergeResult(new_of, chosen, count)


# ------------------------------------------------------------------ vertex side

def _base_min_crossing(ctx: Node, st: VertexState, end: int):
    """Convergecast of the lightest edge leaving the coarse fragment, per base fragment."""
    best = None
    for x, w in st.weights.items():
        if st.nbr_cur[x] != st.cur_frag:
            key = (w, min(st.id, x), max(st.id, x), st.nbr_cur[x])
            if best is None or key < best:
                best = key
    need = len(st.frag_children)
    count = lambda: len(ctx.mailbox.get(Tag.BMC_UP, ())) + len(ctx.mailbox.get(Tag.BMC_NONE, ()))
    ok = yield from wait_for(ctx, lambda: count() >= need, end - 1)
    if not ok:
        raise SlotOverrun(f"vertex {st.id}: crossing-edge convergecast incomplete")
    ctx.take(Tag.BMC_NONE)
    for _, fields in ctx.take(Tag.BMC_UP):
        if best is None or fields < best:
            best = fields
    if not st.is_frag_root:
        if best is None:
            ctx.send(st.frag_parent, Tag.BMC_NONE, NONE)
        else:
            ctx.send(st.frag_parent, Tag.BMC_UP, *best)
    yield from until(ctx, end)
    if st.is_frag_root and best is not None:
        w, lo, hi, far = best
        return CandidateRecord(st.cur_frag, w, lo, hi, far)
    return None


def _filtered_upcast(ctx: Node, st: VertexState, own, end: int):
    """Pipelined convergecast on tau keeping the lightest record per coarse fragment.

    Records leave each vertex in increasing order; a record is released only
    when every child is finished or has already sent something at least as
    heavy, so the first record seen for a coarse fragment is its lightest.
    Returns rt's map coarse id -> record (empty elsewhere).
    """
    heap = []
    if own is not None:
        heapq.heappush(heap, (own.order, own))
    last = {c: None for c in st.children}
    done = set()
    sent = set()
    kept = {}
    while True:
        for src, fields in ctx.take(Tag.CAND):
            rec = CandidateRecord(*fields)
            last[src] = rec.order
            heapq.heappush(heap, (rec.order, rec))
        for src, _ in ctx.take(Tag.CAND_DONE):
            done.add(src)
        while heap:
            order, rec = heap[0]
            if not all(c in done or (last[c] is not None and last[c] >= order) for c in st.children):
                break
            heapq.heappop(heap)
            if rec.coarse in sent:
                continue
            sent.add(rec.coarse)
            if st.is_root:
                kept[rec.coarse] = rec
            else:
                ctx.send(st.parent, Tag.CAND, rec.coarse, rec.w, rec.lo, rec.hi, rec.far)
        if len(done) == len(st.children) and not heap:
            if not st.is_root:
                ctx.send(st.parent, Tag.CAND_DONE)
            break
        if ctx.round >= end - 1:
            raise SlotOverrun(f"vertex {st.id}: candidate upcast incomplete")
        yield end - 1
    yield from until(ctx, end)
    return kept


def _route_down(ctx: Node, st: VertexState, level: int, records, end: int, final: bool):
    """Interval-routed downcast of (target lo, new id, u, v); returns the record for this vertex."""
    mine = None

    def dispatch(rec):
        nonlocal mine
        ctx.mark("route", level=level, target=rec[0])
        if rec[0] == st.lo:
            mine = rec
        else:
            ctx.send(next_hop_for_target(st, rec[0]), Tag.ROUTE, *rec)

    if st.is_root:
        if final:
            st.final = True
            for c in st.children:
                ctx.send(c, Tag.TERMINATE)
        for rec in records:
            dispatch(rec)
    while True:
        if ctx.take(Tag.TERMINATE):
            st.final = True
            for c in st.children:
                ctx.send(c, Tag.TERMINATE)
        for _, rec in ctx.take(Tag.ROUTE):
            dispatch(rec)
        if ctx.round >= end - 1:
            break
        yield end - 1
    yield from until(ctx, end)
    if st.is_frag_root and mine is None:
        raise SlotOverrun(f"base fragment {st.base_frag} missed its level-{level} record")
    return mine


def merge_levels(ctx: Node, st: VertexState, count: int, hmax: int, start: int):
    pipe = st.ecc + -(-count // ctx.b) + 3
    yield from until(ctx, start)
    level = 0
    while True:
        if st.is_root:
            ctx.stage(f"boruvka_phase_{level}")
        s = ctx.round
        own = yield from _base_min_crossing(ctx, st, s + hmax + 2)

        s = ctx.round
        kept = yield from _filtered_upcast(ctx, st, own, s + pipe)

        records = []
        if st.is_root:
            coarse = set(st.coarse_of.values())
            merged = root_merge(coarse, kept)
            st.levels += 1
            ctx.mark("boruvka_level", level=level, before=len(coarse), after=merged.count)
            for fid in sorted(st.directory, key=st.directory.get):
                old = st.coarse_of[fid]
                u, v = merged.chosen.get(old, (NONE, NONE))
                records.append((st.directory[fid], merged.new_of[old], u, v))
                st.coarse_of[fid] = merged.new_of[old]
            final = merged.count == 1
        else:
            final = False

        s = ctx.round
        mine = yield from _route_down(ctx, st, level, records, s + pipe, final)
        if st.is_root and st.final:
            ctx.stage("finalize")

        s = ctx.round
        end = s + hmax + 2

        def adopt(fields):
            newid, u, v = fields
            st.cur_frag = newid
            if st.id in (u, v):
                other = v if st.id == u else u
                st.mst.add(other)
                ctx.send(other, Tag.MST_MARK)

        yield from _broadcast(ctx, st, Tag.BF_NEW, end - 1, mine[1:] if mine else None, adopt)
        yield from until(ctx, end)
        for src, _ in ctx.take(Tag.MST_MARK):
            st.mst.add(src)
        if st.final:
            return

        s = ctx.round
        for x in ctx.ports:
            ctx.send(x, Tag.CUR_FRAG, st.cur_frag)
        yield from until(ctx, s + 1)
        for src, (fid,) in ctx.take(Tag.CUR_FRAG):
            st.nbr_cur[src] = fid
        if st.is_root:
            ctx.mark("boruvka_level_end", level=level)
        yield from until(ctx, s + 2)
        level += 1


def mst_program(k_override: int | None = None):
    """The full per-vertex program: BFS, intervals, base forest, merging levels."""

    def body(ctx: Node):
        st = ctx.state
        if st.is_root:
            ctx.stage("bfs")
        yield from build_bfs(ctx, st)
        yield from convergecast_sizes(ctx, st)
        if st.is_root:
            ctx.stage("intervals")
        start = yield from assign_intervals(ctx, st)
        st.k = k_override if k_override is not None else select_k(st.n, ctx.b, st.ecc)
        yield from until(ctx, start)
        if st.is_root:
            ctx.mark("intervals_done")
        finished = yield from build_base_forest(ctx, st, st.k, start)
        if finished:
            return

        if st.is_root:
            ctx.stage("directory")
            ctx.mark("base_forest_end")
        st.base_frag = st.cur_frag = st.frag_id
        st.nbr_cur = dict(st.nbr_frag)
        yield from upcast_fragment_directory(ctx, st)
        payload = ()
        if st.is_root:
            st.base_count = len(st.directory)
            st.coarse_of = {f: f for f in st.directory}
            payload = (st.base_count, st.frag_height_max)
            if st.base_count == 1:
                ctx.stage("finalize")
        count, hmax = yield from broadcast_down_tau(ctx, st, Tag.SCHEDULE, payload)
        if count == 1:
            return
        start = ctx.round + (st.ecc - st.depth) + 1
        yield from merge_levels(ctx, st, count, hmax, start)

    return body


# ------------------------------------------------------------------ harness side

@dataclass
class MstRun:
    edges: frozenset  # EdgeOrderKey
    outputs: dict
    metrics: RunMetrics
    root: int
    k: int
    ecc: int
    base_fragments: int
    levels: int
    one_sided: frozenset = field(default_factory=frozenset)

    @property
    def total_weight(self):
        return sum(e.w for e in self.edges)


def run_mst(
    graph: WeightedGraph,
    b: int = 1,
    *,
    root: int | None = None,
    k: int | None = None,
    snapshot_hook=None,
    round_cap: int | None = None,
    order=None,
    words_per_unit: int = WORDS_PER_UNIT,
) -> MstRun:
    if root is None:
        root = min(graph.vertices)
    if root not in graph.adj:
        raise ValueError(f"root {root} is not a vertex")
    if k is not None and k < 1:
        raise ValueError("k must be >= 1")
    states: dict = {}
    body = mst_program(k)

    def factory(view):
        st = VertexState(id=view.id, weights=dict(view.incident), is_root=view.id == root)
        states[view.id] = st
        return Node(view, body, st)

    outputs, metrics = run(
        graph, factory, b, snapshot_hook,
        words_per_unit=words_per_unit, round_cap=round_cap, order=order,
    )
    marks: dict = {}
    for v, out in outputs.items():
        for nbr, w in out:
            key = EdgeOrderKey(w, min(v, nbr), max(v, nbr))
            marks[key] = marks.get(key, 0) + 1
    rt = states[root]
    return MstRun(
        edges=frozenset(marks),
        outputs=outputs,
        metrics=metrics,
        root=root,
        k=rt.k,
        ecc=rt.ecc,
        base_fragments=rt.base_count,
        levels=rt.levels,
        one_sided=frozenset(e for e, c in marks.items() if c != 2),
    )
