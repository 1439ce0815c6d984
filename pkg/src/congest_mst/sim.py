"""Synchronous CONGEST(b log n) round engine with exact message accounting.

One packet per directed edge per round, at most ``b * words_per_unit`` Words.
Control tags (``Tag`` members) ride in packet headers and are not charged as
Words; every other payload item is one Word.
"""

from __future__ import annotations

import hashlib
import heapq
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

from .graph import WeightedGraph, hop_diameter

WORDS_PER_UNIT = 5


class Tag(Enum):
    # bfs / intervals / directory
    JOIN = "JOIN"
    CONFIRM = "CONFIRM"
    SIZE = "SIZE"
    INTERVAL = "INTERVAL"
    FRAG_HEIGHT = "FRAG_HEIGHT"
    DIR_PAIR = "DIR_PAIR"
    DIR_DONE = "DIR_DONE"
    SCHEDULE = "SCHEDULE"
    TERMINATE = "TERMINATE"
    # base forest
    FRAG_ID = "FRAG_ID"
    MWOE_UP = "MWOE_UP"
    ANNOUNCE = "ANNOUNCE"
    CROSS_LINK = "CROSS_LINK"
    LINK_ACK = "LINK_ACK"
    LINK_UP = "LINK_UP"
    CV_COLOR = "CV_COLOR"
    CV_CROSS = "CV_CROSS"
    CV_UP = "CV_UP"
    MATCH_UP = "MATCH_UP"
    MATCH = "MATCH"
    MATCH_CROSS = "MATCH_CROSS"
    CHILD_MATCHED = "CHILD_MATCHED"
    MATCHED_UP = "MATCHED_UP"
    ROLE = "ROLE"
    MERGE = "MERGE"
    FLIP = "FLIP"
    NEW_ID = "NEW_ID"
    DONE = "DONE"
    # boruvka levels
    BMC_UP = "BMC_UP"
    BMC_NONE = "BMC_NONE"
    CAND = "CAND"
    CAND_DONE = "CAND_DONE"
    ROUTE = "ROUTE"
    BF_NEW = "BF_NEW"
    MST_MARK = "MST_MARK"
    CUR_FRAG = "CUR_FRAG"


class SimError(RuntimeError):
    pass


class BandwidthExceeded(SimError):
    def __init__(self, vertex, dst, rnd, words, cap):
        super().__init__(
            f"vertex {vertex} sent {words} words to {dst} in round {rnd} (cap {cap})"
        )
        self.vertex, self.dst, self.round, self.words = vertex, dst, rnd, words


class NonNeighborSend(SimError):
    def __init__(self, vertex, dst, rnd):
        super().__init__(f"vertex {vertex} sent to non-neighbor {dst} in round {rnd}")
        self.vertex, self.dst, self.round = vertex, dst, rnd


class RoundLimitExceeded(SimError):
    def __init__(self, cap):
        super().__init__(f"no termination within {cap} rounds")
        self.cap = cap


def count_words(payload) -> int:
    return sum(1 for x in payload if not isinstance(x, Tag))


@dataclass(frozen=True)
class Packet:
    src: int
    dst: int
    payload: tuple

    @property
    def words(self) -> int:
        return count_words(self.payload)


@dataclass
class StageMetrics:
    rounds: int = 0
    messages: int = 0
    words: int = 0


@dataclass
class RunMetrics:
    rounds: int = 0
    messages: int = 0
    words: int = 0
    stages: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "rounds": self.rounds,
            "messages": self.messages,
            "words": self.words,
            "stages": {k: vars(s).copy() for k, s in self.stages.items()},
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunMetrics":
        return cls(
            data["rounds"],
            data["messages"],
            data["words"],
            {k: StageMetrics(**v) for k, v in data["stages"].items()},
        )


@dataclass(frozen=True)
class LocalView:
    """What a vertex knows at start-up, plus write-only channels to the engine."""

    id: int
    incident: tuple  # (neighbor, weight), ascending neighbor
    b: int
    bandwidth: int
    stage: Callable = field(repr=False, compare=False)
    mark: Callable = field(repr=False, compare=False)


class VertexProcess:
    """Per-vertex protocol state machine.

    ``step`` receives the packets delivered this round and returns
    ``(outbox, halted)`` where outbox maps neighbor id to payload.
    ``next_wake`` lets a process declare that its step is a no-op until that
    round unless a packet arrives; the engine then skips it.
    """

    def step(self, rnd: int, inbox: list) -> tuple[dict, bool]:
        raise NotImplementedError

    def next_wake(self, rnd: int) -> int:
        return rnd + 1

    def output(self):
        return None


@dataclass
class Snapshot:
    round: int
    stage: str
    processes: dict
    packets: list
    events: list  # (vertex, name, data)
    halted: set


class _Engine:
    def __init__(self, graph, factory, b, hook, words_per_unit, round_cap, order):
        if b < 1 or int(b) != b:
            raise ValueError("bandwidth multiplier b must be an integer >= 1")
        self.graph = graph
        self.b = int(b)
        self.cap = self.b * words_per_unit
        self.hook = hook
        self.metrics = RunMetrics()
        self.label = "default"
        self.pending_labels: dict = {}
        self.events: list = []
        self.round = 0
        if round_cap is None:
            n = graph.n
            d = hop_diameter(graph)
            round_cap = 64 * (n + d * math.ceil(math.log2(n))) if n > 1 else 64
        self.round_cap = round_cap
        self.order = list(order) if order is not None else list(graph.vertices)
        self.position = {v: i for i, v in enumerate(self.order)}
        self.nbrs = {v: {x for x, _ in graph.adj[v]} for v in graph.vertices}
        self.procs = {}
        for v in graph.vertices:
            view = LocalView(
                v, graph.adj[v], self.b, self.cap,
                stage=self._stage_setter(v), mark=self._marker(v),
            )
            self.procs[v] = factory(view)

    def _stage_setter(self, v):
        def set_stage(label: str):
            self.pending_labels[v] = label
        return set_stage

    def _marker(self, v):
        if self.hook is None:
            return lambda name, **data: None

        def mark(name, **data):
            self.events.append((v, name, data))
        return mark

    def run(self):
        try:
            return self._run()
        except Exception as exc:
            if not hasattr(exc, "stage"):
                exc.stage = self.label  # stage attribution for reports
            raise

    def _run(self):
        procs = self.procs
        alive = set(procs)
        wake = {v: 1 for v in procs}
        heap = [(1, self.position[v], v) for v in procs]
        heapq.heapify(heap)
        inboxes: dict = {}
        m = self.metrics
        while alive:
            self.round += 1
            rnd = self.round
            if rnd > self.round_cap:
                raise RoundLimitExceeded(self.round_cap)
            due = set(inboxes)
            while heap and heap[0][0] <= rnd:
                t, _, v = heapq.heappop(heap)
                if v in alive and wake[v] == t:
                    due.add(v)
            delivered, inboxes = inboxes, {}
            sent = []
            for v in sorted(due, key=self.position.__getitem__):
                if v not in alive:
                    continue
                outbox, halted = procs[v].step(rnd, delivered.get(v, []))
                for dst, payload in outbox.items():
                    if dst not in self.nbrs[v]:
                        raise NonNeighborSend(v, dst, rnd)
                    payload = tuple(payload)
                    words = count_words(payload)
                    if words > self.cap:
                        raise BandwidthExceeded(v, dst, rnd, words, self.cap)
                    if payload:
                        sent.append(Packet(v, dst, payload))
                if halted:
                    alive.discard(v)
                else:
                    t = max(procs[v].next_wake(rnd), rnd + 1)
                    wake[v] = t
                    heapq.heappush(heap, (t, self.position[v], v))
            if self.pending_labels:
                self.label = self.pending_labels[min(self.pending_labels)]
                self.pending_labels = {}
            stage = m.stages.setdefault(self.label, StageMetrics())
            sent.sort(key=lambda p: (p.src, p.dst))
            words = sum(p.words for p in sent)
            m.rounds = rnd
            m.messages += len(sent)
            m.words += words
            stage.rounds += 1
            stage.messages += len(sent)
            stage.words += words
            for p in sent:
                if p.dst in alive:
                    inboxes.setdefault(p.dst, []).append(p)
            if self.hook is not None:
                self.events.sort(key=lambda e: e[0])
                self.hook(Snapshot(rnd, self.label, procs, sent, self.events, set(procs) - alive))
                self.events = []
        outputs = {v: p.output() for v, p in procs.items()}
        return outputs, m


def run(
    graph: WeightedGraph,
    factory: Callable[[LocalView], VertexProcess],
    b: int = 1,
    snapshot_hook: Callable[[Snapshot], None] | None = None,
    *,
    words_per_unit: int = WORDS_PER_UNIT,
    round_cap: int | None = None,
    order=None,
):
    """Execute ``factory``'s protocol on ``graph`` until every vertex halts."""
    engine = _Engine(graph, factory, b, snapshot_hook, words_per_unit, round_cap, order)
    return engine.run()


def replay_digest(metrics: RunMetrics, outputs) -> int:
    """64-bit digest of (rounds, messages, words, sorted output edges)."""
    edges = set()
    for v, out in (outputs or {}).items():
        for nbr, w in out or ():
            edges.add((min(v, nbr), max(v, nbr), str(w)))
    blob = json.dumps(
        [metrics.rounds, metrics.messages, metrics.words, sorted(edges)],
        separators=(",", ":"),
    )
    return int.from_bytes(hashlib.blake2b(blob.encode(), digest_size=8).digest(), "big")
