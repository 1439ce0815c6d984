"""Generator-based vertex processes.

A protocol body is a generator ``body(ctx)``. Each ``yield`` ends the current
round; ``yield r`` additionally says "nothing to do before round r unless a
packet arrives". Sends are queued per port as whole records and flushed FIFO,
packing as many records as fit in the per-edge bandwidth each round.
"""

from __future__ import annotations

from collections import deque

from .sim import LocalView, Tag, VertexProcess, count_words


class Node(VertexProcess):
    def __init__(self, view: LocalView, body, state=None):
        self.view = view
        self.id = view.id
        self.weights = dict(view.incident)
        self.ports = tuple(x for x, _ in view.incident)
        self.b = view.b
        self.bandwidth = view.bandwidth
        self.stage = view.stage
        self.mark = view.mark
        self.state = state
        self.round = 0
        self.mailbox: dict = {}
        self._queues: dict = {}
        self._wake = 1
        self._gen = body(self)
        self._done = False
        self._result = None

    # -- protocol-facing API
    def send(self, dst, tag: Tag, *fields):
        self._queues.setdefault(dst, deque()).append((tag,) + fields)

    def take(self, tag: Tag) -> list:
        """Remove and return every buffered record with ``tag`` as (src, fields)."""
        return self.mailbox.pop(tag, [])

    def has(self, tag: Tag) -> bool:
        return bool(self.mailbox.get(tag))

    # -- engine-facing
    def step(self, rnd, inbox):
        self.round = rnd
        for pkt in inbox:
            self._unpack(pkt.src, pkt.payload)
        if not self._done and (rnd >= self._wake or inbox):
            try:
                value = next(self._gen)
            except StopIteration as stop:
                self._done = True
                self._result = stop.value
            else:
                self._wake = rnd + 1 if value is None else max(value, rnd + 1)
        outbox = self._flush()
        return outbox, self._done and not self._queues

    def next_wake(self, rnd):
        if self._queues:
            return rnd + 1
        return self._wake

    def output(self):
        if self.state is not None and hasattr(self.state, "output"):
            return self.state.output()
        return self._result

    def _unpack(self, src, payload):
        tag, fields = None, []
        for item in payload:
            if isinstance(item, Tag):
                if tag is not None or fields:
                    self.mailbox.setdefault(tag, []).append((src, tuple(fields)))
                tag, fields = item, []
            else:
                fields.append(item)
        if tag is not None or fields:
            self.mailbox.setdefault(tag, []).append((src, tuple(fields)))

    def _flush(self) -> dict:
        out = {}
        for dst in list(self._queues):
            queue = self._queues[dst]
            payload, used = [], 0
            while queue:
                size = count_words(queue[0])
                if payload and used + size > self.bandwidth:
                    break
                payload.extend(queue.popleft())
                used += size
            out[dst] = payload
            if not queue:
                del self._queues[dst]
        return out


# -- generator helpers

def until(ctx: Node, rnd: int):
    """Idle until round ``rnd`` (arrivals are buffered)."""
    while ctx.round < rnd:
        yield rnd


def wait_for(ctx: Node, pred, deadline: int):
    """Wait until ``pred()`` holds or round ``deadline`` is reached; return pred()."""
    while not pred():
        if ctx.round >= deadline:
            return False
        yield deadline
    return True
