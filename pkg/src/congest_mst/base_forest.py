"""Distributed construction of an (n/k, O(k))-MST forest.

Phase i runs on a global schedule whose slot lengths depend only on i, so
every vertex moves between steps in lockstep without extra coordination.
Fragments of diameter at most 2^i pick their MWOE, the MWOE links form a
rooted candidate forest, Cole-Vishkin 3-colors it, a maximal matching is
built color class by color class, and then matched pairs merge while every
unmatched small fragment hooks along its MWOE.

Slot convention: a slot occupying rounds [s, s + L) never sends in its last
round, so nothing crosses into the next slot.
"""

from __future__ import annotations

from .coloring import cv_iterations, cv_step, eliminate, shift_down
from .node import Node, until, wait_for
from .sim import Tag
from .state import PhaseLedger, VertexState

NONE = -1


class OrphanUnmatched(RuntimeError):
    pass


class NoOutgoingEdge(Exception):
    """A fragment of the forest already spans the graph."""


class SlotOverrun(RuntimeError):
    pass


def phase_count(k: int) -> int:
    return max(0, (k - 1).bit_length())  # ceil(log2 k)


def build_base_forest(ctx: Node, st: VertexState, k: int, start: int):
    """Returns True when the forest became spanning and the run is over."""
    yield from until(ctx, start)
    st.frag_id = st.id
    st.frag_parent = None
    st.frag_children = set()
    st.nbr_frag = {x: x for x in ctx.ports}
    steps = cv_iterations(st.max_id)
    for i in range(phase_count(k)):
        if st.is_root:
            ctx.stage(f"base_forest_phase_{i}")
        finished = yield from run_phase(ctx, st, i, steps)
        if finished:
            return True
    return False


# ------------------------------------------------------------------ helpers

def _key_fields(st: VertexState):
    best = None
    for x, w in st.weights.items():
        if st.nbr_frag[x] != st.frag_id:
            key = (w, min(st.id, x), max(st.id, x))
            if best is None or key < best:
                best = key
    return best


def _relay_up(ctx: Node, st: VertexState, tag, end: int, origin=None):
    """Forward ``tag`` records toward the fragment root until the slot ends.

    Returns the records that reached this vertex as root.
    """
    got = []
    if origin is not None:
        if st.is_frag_root:
            got.append(origin)
        else:
            ctx.send(st.frag_parent, tag, *origin)
    while True:
        for _, fields in ctx.take(tag):
            if st.is_frag_root:
                got.append(fields)
            else:
                ctx.send(st.frag_parent, tag, *fields)
        if ctx.round >= end - 1:
            break
        yield end - 1
    yield from until(ctx, end)
    return got


def _broadcast(ctx: Node, st: VertexState, tag, end: int, fields=None, on_receive=None):
    """Root sends ``fields`` down its fragment; others forward on receipt.

    ``on_receive(fields)`` runs at every vertex that gets the message.
    Returns the fields seen, or None.
    """
    seen = None
    if st.is_frag_root and fields is not None:
        seen = tuple(fields)
    elif not st.is_frag_root:
        yield from wait_for(ctx, lambda: ctx.has(tag), end - 1)
        got = ctx.take(tag)
        if got:
            seen = got[0][1]
    if seen is not None:
        for c in st.frag_children:
            ctx.send(c, tag, *seen)
        if on_receive is not None:
            on_receive(seen)
    yield from until(ctx, end)
    return seen


def _convergecast(ctx: Node, st: VertexState, tag, end: int, local, combine, encode):
    """Aggregate up the fragment tree.

    Non-roots may only send before round end - 2 (so the root hears by end - 1).
    Returns the root's aggregate, or None when incomplete by the deadline.
    """
    need = len(st.frag_children)
    ready = lambda: len(ctx.mailbox.get(tag, ())) >= need
    deadline = end - 1 if st.is_frag_root else end - 2
    complete = yield from wait_for(ctx, ready, deadline)
    result = None
    if complete:
        parts = [fields for _, fields in ctx.take(tag)]
        result = combine(local, parts)
        if not st.is_frag_root:
            ctx.send(st.frag_parent, tag, *encode(result))
            result = None
    yield from until(ctx, end)
    ctx.take(tag)  # stragglers from fragments that missed the deadline
    return result


# ------------------------------------------------------------------ one phase

def run_phase(ctx: Node, st: VertexState, i: int, cv_steps: int):
    g = 1 << i
    st.small = False
    st.mwoe_target = None
    st.g_parent_target = False
    st.foreign_children = {}
    st.frag_matched = False
    st.frag_joins = False
    st.new_children = set()
    st.got_matched = False
    st.ledger = led = PhaseLedger()

    # MEASURE: exact diameter and MWOE of fragments with diameter <= 2^i
    s = ctx.round
    best = _key_fields(st)
    local = (0, 0) + (best if best is not None else (NONE, NONE, NONE))

    def combine(own, parts):
        heights = sorted((p[0] + 1 for p in parts), reverse=True)
        height = heights[0] if heights else 0
        through = sum(heights[:2])
        diam = max([through] + [p[1] for p in parts])
        cands = [p[2:] for p in parts if p[2] != NONE]
        if own[2] != NONE:
            cands.append(own[2:])
        key = min(cands) if cands else (NONE, NONE, NONE)
        return (height, diam) + tuple(key)

    agg = yield from _convergecast(ctx, st, Tag.MWOE_UP, s + g + 1, local, combine, lambda r: r)
    if agg is not None:
        led.diameter = agg[1]
        led.in_small_set = agg[1] <= g
        if led.in_small_set and agg[2] != NONE:
            led.mwoe = agg[2:]

    # ANNOUNCE: small roots tell their fragment the MWOE endpoints (or that it spans)
    s = ctx.round
    out = None
    if st.is_frag_root and led.in_small_set:
        out = led.mwoe if led.mwoe is not None else (NONE, NONE, NONE)
    ann = yield from _broadcast(ctx, st, Tag.ANNOUNCE, s + g + 1, out)
    if ann is not None:
        st.small = True
        _, lo, hi = ann
        if lo == NONE:
            if st.is_root:
                ctx.stage("finalize")
            return True
        if st.id in (lo, hi):
            st.mwoe_target = hi if st.id == lo else lo
    if st.is_root:
        ctx.mark("base_phase_mwoe", i=i)

    # LINK: MWOE endpoints announce themselves across; receivers record foreign children
    s = ctx.round
    if st.mwoe_target is not None:
        ctx.send(st.mwoe_target, Tag.CROSS_LINK, st.frag_id)
    yield from until(ctx, s + 1)
    mutual = False
    gparent = NONE
    for src, (fid,) in ctx.take(Tag.CROSS_LINK):
        if src == st.mwoe_target:
            mutual = True
            if st.frag_id > fid:
                st.foreign_children[src] = [fid, False]
            else:
                gparent = fid
        else:
            st.foreign_children[src] = [fid, False]
            ctx.send(src, Tag.LINK_ACK, 1 if st.small else 0)
    yield from until(ctx, s + 2)
    if st.mwoe_target is not None and not mutual:
        (_, (flag,)), = ctx.take(Tag.LINK_ACK)
        if flag:
            gparent = st.nbr_frag[st.mwoe_target]
    st.g_parent_target = gparent != NONE
    yield from until(ctx, s + 3)

    # LINK_UP: the endpoint reports the candidate-forest parent to its root
    s = ctx.round
    if st.small:
        origin = (gparent,) if st.mwoe_target is not None else None
        got = yield from _relay_up(ctx, st, Tag.LINK_UP, s + g + 1, origin)
        if st.is_frag_root:
            (gp,), = got
            led.g_parent = None if gp == NONE else gp
    else:
        yield from until(ctx, s + g + 1)

    # COLORING
    def exchange(value):
        """One parent-to-child color delivery across the candidate forest."""
        s = ctx.round
        end = s + 2 * g + 2
        if not st.small:
            yield from until(ctx, end)
            return None
        got = None

        def deliver(fields):
            for x, entry in st.foreign_children.items():
                ctx.send(x, Tag.CV_CROSS, *fields)

        if st.is_frag_root:
            for c in st.frag_children:
                ctx.send(c, Tag.CV_COLOR, value)
            deliver((value,))
        while True:
            for _, fields in ctx.take(Tag.CV_COLOR):
                for c in st.frag_children:
                    ctx.send(c, Tag.CV_COLOR, *fields)
                deliver(fields)
            for _, fields in ctx.take(Tag.CV_CROSS) + ctx.take(Tag.CV_UP):
                if st.is_frag_root:
                    got = fields[0]
                else:
                    ctx.send(st.frag_parent, Tag.CV_UP, *fields)
            if ctx.round >= end - 1:
                break
            yield end - 1
        yield from until(ctx, end)
        if st.is_frag_root and led.g_parent is not None and got is None:
            raise SlotOverrun(f"phase {i}: fragment {st.frag_id} missed its parent color")
        return got

    color = st.frag_id
    for _ in range(cv_steps):
        parent = yield from exchange(color)
        if st.is_frag_root and st.small:
            color = cv_step(color, parent if led.g_parent is not None else None)
            led.cv_iterations += 1
    for target in (5, 4, 3):
        before = color
        parent = yield from exchange(color)
        if st.is_frag_root and st.small:
            color = shift_down(color, parent if led.g_parent is not None else None)
        parent = yield from exchange(color)
        if st.is_frag_root and st.small:
            color = eliminate(color, target, parent if led.g_parent is not None else None, before)
    if st.is_frag_root and st.small:
        led.cv_color = color

    # MATCHING, one color class at a time
    for c in (0, 1, 2):
        s = ctx.round
        if st.small:
            own = min((e[0] for e in st.foreign_children.values() if not e[1]), default=NONE)

            def pick(local, parts):
                vals = [p[0] for p in parts + [local] if p[0] != NONE]
                return (min(vals) if vals else NONE,)

            agg = yield from _convergecast(ctx, st, Tag.MATCH_UP, s + g + 1, (own,), pick, lambda r: r)
        else:
            agg = None
            yield from until(ctx, s + g + 1)

        s = ctx.round
        out = None
        if st.is_frag_root and st.small:
            if agg is None:
                raise SlotOverrun(f"phase {i}: matching convergecast incomplete at {st.id}")
            if led.cv_color == c and not led.matched and agg[0] != NONE:
                led.matched, led.match_role, led.partner = True, "parent", agg[0]
                out = (agg[0],)

        def matched_now(fields):
            (partner,) = fields
            st.frag_matched = True
            for x, entry in st.foreign_children.items():
                if entry[0] == partner:
                    entry[1] = True
                    ctx.send(x, Tag.MATCH_CROSS)
            if st.g_parent_target:
                ctx.send(st.mwoe_target, Tag.CHILD_MATCHED)

        if st.small:
            end = s + g + 2
            yield from _broadcast(ctx, st, Tag.MATCH, end - 1, out, matched_now)
            yield from until(ctx, end)
        else:
            yield from until(ctx, s + g + 2)
        if ctx.take(Tag.MATCH_CROSS):
            st.got_matched = True
        for src, _ in ctx.take(Tag.CHILD_MATCHED):
            st.foreign_children[src][1] = True

        s = ctx.round
        if st.small:
            origin = () if st.got_matched else None
            st.got_matched = False
            got = yield from _relay_up(ctx, st, Tag.MATCHED_UP, s + g + 1, origin)
            if st.is_frag_root and got:
                led.matched, led.match_role = True, "child"
        else:
            yield from until(ctx, s + g + 1)

    if st.is_root:
        ctx.mark("base_phase_matching", i=i)

    # ROLE: who stays put and who hooks along its MWOE
    s = ctx.round
    out = None
    if st.is_frag_root and st.small:
        led.joins = not (led.matched and led.match_role == "parent")
        out = (1 if led.joins else 0, 1 if led.matched else 0)
    role = yield from _broadcast(ctx, st, Tag.ROLE, s + g + 1, out)
    if role is not None:
        st.frag_joins, st.frag_matched = bool(role[0]), bool(role[1])

    # MERGE: joining fragments attach below their MWOE target and re-root
    s = ctx.round
    end = s + g + 1
    if st.frag_joins and st.mwoe_target is not None:
        ctx.send(st.mwoe_target, Tag.MERGE)
        st.mst.add(st.mwoe_target)
        old = st.frag_parent
        st.frag_parent = st.mwoe_target
        if old is not None:
            st.frag_children.add(old)
            ctx.send(old, Tag.FLIP)
    while True:
        for src, _ in ctx.take(Tag.MERGE):
            if st.small and not st.frag_matched:
                raise OrphanUnmatched(
                    f"phase {i}: unmatched fragment hooked onto unmatched fragment {st.frag_id} at {st.id}"
                )
            st.frag_children.add(src)
            st.new_children.add(src)
            st.mst.add(src)
        for src, _ in ctx.take(Tag.FLIP):
            st.frag_children.discard(src)
            old = st.frag_parent
            st.frag_parent = src
            if old is not None:
                st.frag_children.add(old)
                ctx.send(old, Tag.FLIP)
        if ctx.round >= end - 1:
            break
        yield end - 1
    yield from until(ctx, end)

    # NEW_ID: the surviving root's id spreads into every joined subtree
    s = ctx.round
    end = s + 2 * g + 3
    if not st.frag_joins:
        for x in st.new_children:
            ctx.send(x, Tag.NEW_ID, st.frag_id)
        yield from until(ctx, end)
    else:
        yield from wait_for(ctx, lambda: ctx.has(Tag.NEW_ID), end - 1)
        got = ctx.take(Tag.NEW_ID)
        if not got:
            raise SlotOverrun(f"phase {i}: vertex {st.id} never learned its new fragment id")
        (_, (fid,)), = got
        st.frag_id = fid
        for x in st.frag_children:
            ctx.send(x, Tag.NEW_ID, fid)
        yield from until(ctx, end)

    # FRAG_ID: refresh neighbor fragment ids
    s = ctx.round
    for x in ctx.ports:
        ctx.send(x, Tag.FRAG_ID, st.frag_id)
    yield from until(ctx, s + 1)
    for src, (fid,) in ctx.take(Tag.FRAG_ID):
        st.nbr_frag[src] = fid
    if st.is_root:
        ctx.mark("base_phase_end", i=i)
    yield from until(ctx, s + 2)
    return False
