"""Global observer that audits protocol invariants between rounds.

Plug ``InvariantChecker(graph).hook`` into the engine as the snapshot hook.
It only reads process state; violations are collected as strings tagged with
the property they break, and ``finish`` runs the end-of-run checks.
"""

from __future__ import annotations

import math
from collections import defaultdict, deque

from .base_forest import phase_count
from .coloring import PALETTE, log_star
from .graph import WeightedGraph, edge_order_key
from .oracle import kruskal_mst
from .sim import Snapshot, Tag


def _tree_diameter(vertices, adj) -> int:
    def far(src):
        dist = {src: 0}
        queue = deque([src])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if y not in dist:
                    dist[y] = dist[x] + 1
                    queue.append(y)
        node = max(dist, key=dist.get)
        return node, dist[node], len(dist)

    start = next(iter(vertices))
    a, _, _ = far(start)
    _, d, _ = far(a)
    return d


def _records(payload):
    """Split a packet payload into (tag, fields) records."""
    out, tag, fields = [], None, []
    for item in payload:
        if isinstance(item, Tag):
            if tag is not None:
                out.append((tag, tuple(fields)))
            tag, fields = item, []
        else:
            fields.append(item)
    if tag is not None:
        out.append((tag, tuple(fields)))
    return out


class InvariantChecker:
    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        self.mst = kruskal_mst(graph).edges
        self.violations: list[str] = []
        self.phases_checked = 0
        self.levels_checked = 0
        self.routes: dict = defaultdict(list)  # (level, target lo) -> vertices in order
        self.levels_seen = 0
        self._procs = None
        self._stage = None
        self._cand_seen: dict = {}
        self.max_id = max(graph.vertices)

    # -- engine hook
    def hook(self, snap: Snapshot):
        self._procs = snap.processes
        if snap.stage != self._stage:
            self._stage = snap.stage
            self._cand_seen = {}
        self._filter_property(snap)
        for v, name, data in snap.events:
            if name == "route":
                self.routes[(data["level"], data["target"])].append(v)
            elif name == "intervals_done":
                self._intervals()
            elif name == "base_phase_matching":
                self._coloring_and_matching(data["i"])
            elif name == "base_phase_end":
                self._forest_after_phase(data["i"])
            elif name == "base_forest_end":
                self._forest_final()
            elif name == "boruvka_level":
                self._halving(data)
            elif name == "boruvka_level_end":
                self._coarse_partition(data["level"])

    def _fail(self, prop: str, msg: str):
        self.violations.append(f"{prop}: {msg}")

    def _states(self):
        return {v: p.state for v, p in self._procs.items()}

    # -- intervals
    def _intervals(self):
        sts = self._states()
        n = len(sts)
        los = sorted(st.lo for st in sts.values())
        if los != list(range(1, n + 1)):
            self._fail("A9", "interval lows are not a permutation of 1..n")
        for v, st in sts.items():
            if st.hi - st.lo + 1 != st.subtree_size:
                self._fail("A9", f"interval of {v} does not match its subtree size")
            p = st.parent
            if p is not None:
                ps = sts[p]
                if not (ps.lo < st.lo and st.hi <= ps.hi):
                    self._fail("A9", f"interval of {v} not strictly inside its parent's")
        # laminar family: sorted by (lo, -hi) every interval nests in or follows the previous
        stack = []
        for lo, hi in sorted(((st.lo, st.hi) for st in sts.values()), key=lambda t: (t[0], -t[1])):
            while stack and stack[-1][1] < lo:
                stack.pop()
            if stack and hi > stack[-1][1]:
                self._fail("A9", f"intervals [{stack[-1]}] and [{lo}, {hi}] cross")
            stack.append((lo, hi))

    # -- base forest
    def _fragments(self):
        groups = defaultdict(list)
        for v, st in self._states().items():
            groups[st.frag_id].append(v)
        return groups

    def _coloring_and_matching(self, i: int):
        sts = self._states()
        roots = {
            st.frag_id: st.ledger
            for st in sts.values()
            if st.frag_parent is None and st.frag_id == st.id and st.ledger.in_small_set
        }
        bound = log_star(self.max_id) + 6
        for fid, led in roots.items():
            if led.cv_color not in PALETTE:
                self._fail("A7", f"phase {i}: fragment {fid} has color {led.cv_color}")
            if led.cv_iterations > bound:
                self._fail("A7", f"phase {i}: {led.cv_iterations} color steps exceed {bound}")
            gp = led.g_parent
            if gp is None:
                continue
            if gp not in roots:
                self._fail("A7", f"phase {i}: fragment {fid} points at non-candidate {gp}")
                continue
            parent = roots[gp]
            if parent.cv_color == led.cv_color:
                self._fail("A7", f"phase {i}: fragments {fid} and {gp} share color {led.cv_color}")
            if not led.matched and not parent.matched:
                self._fail("A7", f"phase {i}: candidate edge {fid}->{gp} has both ends unmatched")
        # acyclic candidate forest
        for fid in roots:
            seen, cur = set(), fid
            while cur is not None and cur in roots:
                if cur in seen:
                    self._fail("A7", f"phase {i}: candidate forest has a cycle through {fid}")
                    break
                seen.add(cur)
                cur = roots[cur].g_parent
        # matching is consistent: parent partners are children pointing back
        partners = defaultdict(int)
        for fid, led in roots.items():
            if led.match_role == "parent":
                child = roots.get(led.partner)
                partners[led.partner] += 1
                if child is None or child.g_parent != fid or child.match_role != "child":
                    self._fail("A7", f"phase {i}: match {fid}-{led.partner} is inconsistent")
        for fid, led in roots.items():
            if led.match_role == "child" and partners[fid] != 1:
                self._fail("A7", f"phase {i}: fragment {fid} matched {partners[fid]} times as child")
        self.phases_checked += 1

    def _check_forest(self, label: str):
        """Fragment trees span their fragments with oracle MST edges. Returns (sizes, diameters)."""
        sts = self._states()
        sizes, diams = {}, {}
        for fid, members in self._fragments().items():
            member_set = set(members)
            adj = {v: [] for v in members}
            for v in members:
                st = sts[v]
                p = st.frag_parent
                if p is None:
                    if v != fid:
                        self._fail("A6", f"{label}: root {v} of fragment {fid} has a different id")
                    continue
                if p not in member_set:
                    self._fail("A6", f"{label}: parent of {v} lies outside fragment {fid}")
                    continue
                key = edge_order_key(v, p, self.graph.weight(v, p))
                if key not in self.mst:
                    self._fail("A6", f"{label}: fragment edge {key} is not an MST edge")
                adj[v].append(p)
                adj[p].append(v)
            edges = sum(len(a) for a in adj.values()) // 2
            if edges != len(members) - 1:
                self._fail("A6", f"{label}: fragment {fid} is not a tree")
                continue
            d = _tree_diameter(members, adj)
            sizes[fid], diams[fid] = len(members), d
        return sizes, diams

    def _forest_after_phase(self, i: int):
        n = self.graph.n
        sizes, diams = self._check_forest(f"phase {i}")
        if len(sizes) > n / 2 ** i:
            self._fail("A6", f"phase {i}: {len(sizes)} fragments exceed n/2^{i}")
        if diams and max(diams.values()) > 6 * 2 ** (i + 1):
            self._fail("A6", f"phase {i}: diameter {max(diams.values())} exceeds {6 * 2 ** (i + 1)}")
        k = next(iter(self._states().values())).k
        t = phase_count(k)
        if i <= t - 2 and len(sizes) > 1 and min(sizes.values()) < 2 ** i:
            self._fail("A6", f"phase {i}: a fragment has {min(sizes.values())} < 2^{i} vertices")

    def _forest_final(self):
        n = self.graph.n
        k = next(iter(self._states().values())).k
        sizes, diams = self._check_forest("base forest")
        if len(sizes) > 2 * n / k:
            self._fail("A6", f"base forest has {len(sizes)} fragments, more than 2n/k")
        if diams and max(diams.values()) > 12 * k:
            self._fail("A6", f"base forest diameter {max(diams.values())} exceeds 12k")

    # -- merging levels
    def _halving(self, data):
        self.levels_seen += 1
        before, after = data["before"], data["after"]
        if before > 1 and after > before // 2:
            self._fail("A8", f"level {data['level']}: {before} fragments became {after}")

    def _coarse_partition(self, level: int):
        sts = self._states()
        groups = defaultdict(set)
        for v, st in sts.items():
            groups[st.cur_frag].add(v)
        for fid, members in groups.items():
            # marked MST edges inside the group must connect it
            seen, queue = {min(members)}, deque([min(members)])
            while queue:
                x = queue.popleft()
                for y in sts[x].mst:
                    key = edge_order_key(x, y, self.graph.weight(x, y))
                    if key not in self.mst:
                        self._fail("A8", f"level {level}: marked edge {key} is not an MST edge")
                    if y in members and y not in seen:
                        seen.add(y)
                        queue.append(y)
            if seen != members:
                self._fail("A8", f"level {level}: fragment {fid} is not connected by marked edges")
        self.levels_checked += 1

    def _filter_property(self, snap: Snapshot):
        for pkt in snap.packets:
            for tag, fields in _records(pkt.payload):
                if tag is not Tag.CAND:
                    continue
                coarse, w, lo, hi, _ = fields
                slot = (pkt.src, pkt.dst, coarse)
                key = (w, lo, hi)
                prev = self._cand_seen.get(slot)
                if prev is not None and not key < prev:
                    self._fail("filter", f"edge {pkt.src}->{pkt.dst} repeated fragment {coarse}")
                self._cand_seen[slot] = key

    # -- end of run
    def finish(self, run) -> list[str]:
        """End-of-run checks given the MstRun; returns all violations."""
        sts = self._states()
        n = self.graph.n
        by_lo = {st.lo: v for v, st in sts.items()}
        rt = run.root
        for (level, target), trace in sorted(self.routes.items()):
            dest = by_lo.get(target)
            if dest is None:
                self._fail("A9", f"level {level}: record for unknown interval {target}")
                continue
            path = []
            cur = dest
            while cur is not None:
                path.append(cur)
                cur = sts[cur].parent
            path.reverse()
            if trace != path:
                self._fail("A9", f"level {level}: record for {target} took {trace}, tau path is {path}")
            if sts[dest].frag_parent is not None:
                self._fail("A9", f"level {level}: record for {target} ended at non-root {dest}")
        per_level = defaultdict(int)
        for level, _ in self.routes:
            per_level[level] += 1
        for level, count in per_level.items():
            if count != run.base_fragments:
                self._fail("A9", f"level {level}: {count} records for {run.base_fragments} base fragments")
        if self.levels_seen:
            cap = math.ceil(math.log2(2 * n / run.k)) + 1 if 2 * n > run.k else 1
            if self.levels_seen > cap:
                self._fail("A8", f"{self.levels_seen} merging levels exceed {cap}")
        if rt not in sts:
            self._fail("A9", f"root {rt} missing")
        return self.violations
