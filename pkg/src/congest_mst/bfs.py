"""BFS tree construction, subtree-size convergecast, interval labels and routing."""

from __future__ import annotations

from .node import Node, until, wait_for
from .sim import Tag
from .state import VertexState


class NoSuchChild(RuntimeError):
    pass


def build_bfs(ctx: Node, st: VertexState):
    """Layered flooding from rt.

    Every vertex sends exactly one record per port: CONFIRM to its parent,
    JOIN everywhere else, so each port tells whether the neighbor is a child.
    Parent ties within a round go to the smallest sender id.
    """
    if st.is_root:
        st.parent, st.depth = None, 0
    else:
        yield from wait_for(ctx, lambda: ctx.has(Tag.JOIN), float("inf"))
        offers = ctx.mailbox[Tag.JOIN]
        src, (sender, depth) = min(offers, key=lambda o: o[1][0])
        st.parent, st.depth = src, depth + 1
    for x in ctx.ports:
        if x == st.parent:
            ctx.send(x, Tag.CONFIRM, st.id)
        else:
            ctx.send(x, Tag.JOIN, st.id, st.depth)
    heard = lambda: len(ctx.mailbox.get(Tag.JOIN, ())) + len(ctx.mailbox.get(Tag.CONFIRM, ())) >= len(ctx.ports)
    yield from wait_for(ctx, heard, float("inf"))
    ctx.take(Tag.JOIN)
    st.children = tuple(sorted(src for src, _ in ctx.take(Tag.CONFIRM)))


def convergecast_sizes(ctx: Node, st: VertexState):
    """Subtree size, height and maximum id flow up tau; rt learns n, ecc, max id."""
    yield from wait_for(ctx, lambda: len(ctx.mailbox.get(Tag.SIZE, ())) == len(st.children), float("inf"))
    reports = dict(ctx.take(Tag.SIZE))
    st.child_sizes = {c: reports[c][0] for c in st.children}
    st.subtree_size = 1 + sum(r[0] for r in reports.values())
    st.height = max((r[1] + 1 for r in reports.values()), default=0)
    st.max_id = max([st.id] + [r[2] for r in reports.values()])
    if st.parent is not None:
        ctx.send(st.parent, Tag.SIZE, st.subtree_size, st.height, st.max_id)


def child_blocks(lo: int, child_sizes: dict) -> list:
    """Slots for children: own slot at ``lo``, then consecutive blocks by ascending child id."""
    blocks, nxt = [], lo + 1
    for c in sorted(child_sizes):
        size = child_sizes[c]
        blocks.append((nxt, nxt + size - 1, c))
        nxt += size
    return blocks


def assign_intervals(ctx: Node, st: VertexState):
    """Interval downcast; also spreads n, ecc, max id and a common start round.

    Returns the round at which every vertex begins the next stage.
    """
    if st.is_root:
        st.lo, st.n, st.ecc = 1, st.subtree_size, st.height
    else:
        yield from wait_for(ctx, lambda: ctx.has(Tag.INTERVAL), float("inf"))
        (_, (lo, n, ecc, max_id)), = ctx.take(Tag.INTERVAL)
        st.lo, st.n, st.ecc, st.max_id = lo, n, ecc, max_id
    st.hi = st.lo + st.subtree_size - 1
    st.child_intervals = tuple(child_blocks(st.lo, st.child_sizes))
    for clo, _, c in st.child_intervals:
        ctx.send(c, Tag.INTERVAL, clo, st.n, st.ecc, st.max_id)
    # rt sent at round r0 = ctx.round - depth; the deepest vertex hears at r0 + ecc
    return ctx.round + (st.ecc - st.depth) + 1


def next_hop_for_target(st: VertexState, target_lo: int) -> int:
    if not st.lo < target_lo <= st.hi:
        raise ValueError(f"target {target_lo} is not strictly inside [{st.lo}, {st.hi}]")
    for clo, chi, c in st.child_intervals:
        if clo <= target_lo <= chi:
            return c
    raise NoSuchChild(f"vertex {st.id}: no child interval holds {target_lo}")


def upcast_fragment_directory(ctx: Node, st: VertexState):
    """Fragment heights are convergecast inside base fragments, then every base
    fragment root injects (fragment id, interval lo) into a pipelined upcast on
    tau. rt ends with the directory and the largest base-fragment height.
    """
    # height convergecast in the base fragment
    yield from wait_for(
        ctx, lambda: len(ctx.mailbox.get(Tag.FRAG_HEIGHT, ())) == len(st.frag_children), float("inf")
    )
    st.frag_height = max((h + 1 for _, (h,) in ctx.take(Tag.FRAG_HEIGHT)), default=0)
    if st.frag_parent is not None:
        ctx.send(st.frag_parent, Tag.FRAG_HEIGHT, st.frag_height)
    pairs = []
    max_h = st.frag_height if st.is_frag_root else 0
    if st.is_frag_root:
        pairs.append((st.frag_id, st.lo))
    done = set()
    while True:
        for _, rec in ctx.take(Tag.DIR_PAIR):
            pairs.append(rec)
        for src, (h,) in ctx.take(Tag.DIR_DONE):
            done.add(src)
            max_h = max(max_h, h)
        if st.is_root:
            if len(done) == len(st.children):
                st.directory = dict(pairs)
                st.frag_height_max = max_h
                return
        else:
            for fid, lo in pairs:
                ctx.send(st.parent, Tag.DIR_PAIR, fid, lo)
            pairs = []
            if len(done) == len(st.children):
                ctx.send(st.parent, Tag.DIR_DONE, max_h)
                return
        yield float("inf")


def broadcast_down_tau(ctx: Node, st: VertexState, tag, payload_at_root=()):
    """rt sends ``tag`` to every tau-child; others forward on receipt. Returns the fields."""
    if st.is_root:
        fields = tuple(payload_at_root)
    else:
        yield from wait_for(ctx, lambda: ctx.has(tag), float("inf"))
        (_, fields), = ctx.take(tag)
    for c in st.children:
        ctx.send(c, tag, *fields)
    return fields
