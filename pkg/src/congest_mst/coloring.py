"""Cole-Vishkin color reduction on rooted forests, as local recoloring rules."""

from __future__ import annotations

import math

PALETTE = (0, 1, 2)


class IterationOverrun(RuntimeError):
    pass


def cv_step(own: int, parent: int | None) -> int:
    """One reduction step: <lowest differing bit index, own bit there>.

    Roots compare against a virtual parent that differs in bit 0, so they keep
    their own low bit.
    """
    if parent is None:
        return own & 1
    diff = own ^ parent
    if diff == 0:
        raise ValueError("parent and child share a color")
    idx = (diff & -diff).bit_length() - 1
    return 2 * idx + ((own >> idx) & 1)


def cv_iterations(max_color: int) -> int:
    """Reduction steps needed until every color lies in 0..5, starting from 0..max_color."""
    space = max_color + 1
    steps = 0
    while space > 6:
        space = 2 * (space - 1).bit_length()
        steps += 1
    return steps


def shift_down(own: int, parent: int | None) -> int:
    if parent is None:
        return min(c for c in PALETTE if c != own)
    return parent


def eliminate(own: int, target: int, parent: int | None, children_color: int) -> int:
    """Recolor a vertex holding ``target`` into the palette after a shift-down.

    After a shift-down all children share one color, the vertex's color before
    the shift, passed as ``children_color``.
    """
    if own != target:
        return own
    banned = {children_color}
    if parent is not None:
        banned.add(parent)
    return min(c for c in PALETTE if c not in banned)


def log_star(x: float) -> int:
    """Iterated base-2 logarithm: applications of log2 until the value is <= 2."""
    count = 0
    while x > 2:
        x = math.log2(x)
        count += 1
    return count


def three_color_forest(parent: dict, ids: dict | None = None) -> tuple[dict, int]:
    """Centralized reference run of the same rules on a forest given as child -> parent.

    Returns (coloring, reduction steps). Used by tests as a direct check of the
    local rules; the protocol applies them one fragment at a time.
    """
    color = dict(ids) if ids is not None else {v: v for v in parent}
    steps = cv_iterations(max(color.values(), default=0))
    for _ in range(steps):
        color = {v: cv_step(color[v], None if p is None else color[p]) for v, p in parent.items()}
    for target in (5, 4, 3):
        before = color
        color = {v: shift_down(before[v], None if p is None else before[p]) for v, p in parent.items()}
        color = {
            v: eliminate(color[v], target, None if p is None else color[p], before[v])
            for v, p in parent.items()
        }
    return color, steps
